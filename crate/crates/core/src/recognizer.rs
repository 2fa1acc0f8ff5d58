//! Streaming recognition: a ring buffer of the most recent 1.5M delta
//! frames and the recursive sliding-window matcher. A cursor walks the
//! window end over the newest M offsets; at each offset the
//! confidence-weighted mean absolute error against every template tail is
//! scored, the per-cursor minima collected, and relative errors over the
//! candidate map fused across the coordinate and angle strategies.

use crate::channels::{ChannelKind, ObservedDelta, CHANNEL_COUNT};
use crate::codec::GestureTemplate;
use crate::gesture::Gesture;
use serde::Serialize;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RecognizeError {
    #[error("buffer holds {available} frames, cursor window requires {required}")]
    InsufficientFrames { available: usize, required: usize },
    #[error("{occluded} of the newest frames are fully occluded (limit {limit})")]
    RefusedTooOccluded { occluded: usize, limit: usize },
    #[error("no aligned buffer for template {0}")]
    MissingAlignedBuffer(usize),
}

/// Which channel family drives the matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Coordinate,
    Angle,
}

impl Strategy {
    pub const BOTH: [Strategy; 2] = [Strategy::Coordinate, Strategy::Angle];

    pub fn channel_kind(self) -> ChannelKind {
        match self {
            Strategy::Coordinate => ChannelKind::Vector,
            Strategy::Angle => ChannelKind::Angle,
        }
    }

    pub fn dimension(self) -> usize {
        self.channel_kind().channel_count()
    }
}

/// Ring of the most recent ceil(1.5 M) observed delta frames.
#[derive(Debug, Clone)]
pub struct FrameBuffer {
    frames: VecDeque<ObservedDelta>,
    gesture_len: usize,
    capacity: usize,
}

impl FrameBuffer {
    pub fn new(gesture_len: usize) -> FrameBuffer {
        let capacity = (3 * gesture_len).div_ceil(2);
        FrameBuffer {
            frames: VecDeque::with_capacity(capacity),
            gesture_len,
            capacity,
        }
    }

    /// Appends a frame, evicting the oldest when full.
    pub fn push_frame(&mut self, frame: ObservedDelta) {
        if self.frames.len() == self.capacity {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
    }

    pub fn fill(&self) -> usize {
        self.frames.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn gesture_len(&self) -> usize {
        self.gesture_len
    }

    /// Frame by age: index 0 is the oldest retained frame.
    pub fn frame(&self, index: usize) -> &ObservedDelta {
        &self.frames[index]
    }

    /// How many of the newest `window` frames carry no observation at all.
    pub fn fully_occluded_recent(&self, window: usize) -> usize {
        let n = self.frames.len();
        let start = n.saturating_sub(window);
        self.frames
            .iter()
            .skip(start)
            .filter(|f| f.fully_occluded())
            .count()
    }

    pub fn extend<I: IntoIterator<Item = ObservedDelta>>(&mut self, frames: I) {
        for f in frames {
            self.push_frame(f);
        }
    }
}

/// Frames scored at a cursor: the full buffer tail while the cursor is in
/// the older half of its range, capped at the gesture length after that.
/// Always within [ceil(M/2), M] over the cursor domain [-M, 0].
pub fn window_k(gesture_len: usize, cursor: i64) -> usize {
    let capacity = (3 * gesture_len).div_ceil(2) as i64;
    let half = (gesture_len as i64 + 1) / 2;
    if cursor <= -half {
        (capacity + cursor).clamp(half, gesture_len as i64) as usize
    } else {
        gesture_len
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowScore {
    pub error: f64,
    pub mean_error: f64,
    pub k: usize,
}

/// Confidence-weighted error of a candidate window against a template tail
/// of the same length: E sums conf * |candidate - template| over every frame
/// and channel, ME divides by frames x channels.
pub fn window_score(values: &[Vec<f64>], conf: &[Vec<f64>], template: &[Vec<f64>]) -> WindowScore {
    let k = values.len();
    debug_assert_eq!(conf.len(), k);
    debug_assert_eq!(template.len(), k);
    let n_dim = values.first().map_or(0, |v| v.len());
    let mut error = 0.0;
    for ((v, c), t) in values.iter().zip(conf).zip(template) {
        for i in 0..n_dim {
            error += c[i] * (v[i] - t[i]).abs();
        }
    }
    WindowScore {
        error,
        mean_error: error / (k as f64 * n_dim as f64),
        k,
    }
}

fn window_span(buffer: &FrameBuffer, cursor: i64) -> Result<(usize, usize), RecognizeError> {
    let k = window_k(buffer.gesture_len(), cursor);
    let required = (buffer.capacity() as i64 + cursor).max(k as i64) as usize;
    if cursor > 0 || buffer.fill() < required {
        return Err(RecognizeError::InsufficientFrames {
            available: buffer.fill(),
            required,
        });
    }
    Ok((required - k, k))
}

/// Scores one template at one cursor. The window is the K frames ending at
/// the cursor offset, matched against the template's last K frames.
pub fn window_error(
    buffer: &FrameBuffer,
    template: &GestureTemplate,
    cursor: i64,
    strategy: Strategy,
) -> Result<WindowScore, RecognizeError> {
    let (start, k) = window_span(buffer, cursor)?;
    let channels = template.channel_frames();
    Ok(score_window(
        buffer,
        start,
        k,
        &channels,
        strategy.channel_kind().channel_range(),
    ))
}

fn score_window(
    buffer: &FrameBuffer,
    start: usize,
    k: usize,
    template_channels: &[[f64; CHANNEL_COUNT]],
    range: std::ops::Range<usize>,
) -> WindowScore {
    let tail_start = template_channels.len() - k;
    let mut error = 0.0;
    for i in 0..k {
        let frame = buffer.frame(start + i);
        let tmpl = &template_channels[tail_start + i];
        for ch in range.clone() {
            error += frame.conf[ch] * (frame.channels[ch] - tmpl[ch]).abs();
        }
    }
    WindowScore {
        error,
        mean_error: error / (k as f64 * range.len() as f64),
        k,
    }
}

/// One row of a candidate map: the best template at one cursor position.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEntry {
    pub cursor: i64,
    pub gesture: Gesture,
    pub mean_error: f64,
    pub relative_error: f64,
}

/// Per-gesture relative errors observed in the two candidate maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GestureErrors {
    pub gesture: Gesture,
    pub re_coord: Option<f64>,
    pub re_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub gesture: Gesture,
    pub relative_error: f64,
    pub strategy: Strategy,
    pub table: Vec<GestureErrors>,
}

pub struct Matcher {
    labels: Vec<Gesture>,
    channel_frames: Vec<Vec<[f64; CHANNEL_COUNT]>>,
}

impl Matcher {
    pub fn new(templates: &[GestureTemplate]) -> Matcher {
        Matcher {
            labels: templates.iter().map(|t| t.label).collect(),
            channel_frames: templates.iter().map(|t| t.channel_frames()).collect(),
        }
    }

    pub fn labels(&self) -> &[Gesture] {
        &self.labels
    }

    fn map_for<'a, F>(&self, strategy: Strategy, buffer_for: F) -> Vec<CandidateEntry>
    where
        F: Fn(usize) -> &'a FrameBuffer,
    {
        let range = strategy.channel_kind().channel_range();
        let m = buffer_for(0).gesture_len() as i64;
        let mut entries = Vec::new();
        for cursor in -m..=0 {
            let mut best: Option<(usize, f64, usize)> = None;
            for ti in 0..self.labels.len() {
                let buffer = buffer_for(ti);
                let (start, k) = match window_span(buffer, cursor) {
                    Ok(span) => span,
                    Err(_) => continue,
                };
                let score = score_window(buffer, start, k, &self.channel_frames[ti], range.clone());
                match best {
                    Some((_, me, _)) if me <= score.mean_error => {}
                    _ => best = Some((ti, score.mean_error, k)),
                }
            }
            if let Some((ti, me, _)) = best {
                entries.push(CandidateEntry {
                    cursor,
                    gesture: self.labels[ti],
                    mean_error: me,
                    relative_error: 0.0,
                });
            }
        }
        // Relative error: each entry's share of the map's total mean error.
        // A zero total means an exact match somewhere; those entries keep
        // relative error 0 and win outright.
        let total: f64 = entries.iter().map(|e| e.mean_error).sum();
        if total > 0.0 {
            for e in entries.iter_mut() {
                e.relative_error = e.mean_error / total;
            }
        }
        entries
    }

    fn fuse(&self, maps: [Vec<CandidateEntry>; 2]) -> MatchResult {
        let mut table: Vec<GestureErrors> = self
            .labels
            .iter()
            .map(|&gesture| GestureErrors {
                gesture,
                re_coord: None,
                re_angle: None,
            })
            .collect();
        let mut winner: Option<(f64, usize, usize)> = None; // (re, strategy idx, gesture ordinal)
        for (si, map) in maps.iter().enumerate() {
            for entry in map {
                let row = table
                    .iter_mut()
                    .find(|r| r.gesture == entry.gesture)
                    .expect("table covers every template label");
                let slot = match si {
                    0 => &mut row.re_coord,
                    _ => &mut row.re_angle,
                };
                *slot =
                    Some(slot.map_or(entry.relative_error, |v: f64| v.min(entry.relative_error)));
                let key = (entry.relative_error, si, entry.gesture.ordinal());
                let better = match winner {
                    None => true,
                    Some(w) => (key.0, key.1, key.2) < w,
                };
                if better {
                    winner = Some(key);
                }
            }
        }
        let (re, si, ord) = winner.expect("candidate maps are non-empty");
        MatchResult {
            gesture: crate::gesture::ALL_GESTURES[ord],
            relative_error: re,
            strategy: Strategy::BOTH[si],
            table,
        }
    }

    /// Both candidate maps over a single buffer, coordinate first.
    pub fn candidate_maps(
        &self,
        buffer: &FrameBuffer,
    ) -> Result<[Vec<CandidateEntry>; 2], RecognizeError> {
        self.check_fill(buffer)?;
        let coord = self.map_for(Strategy::Coordinate, |_| buffer);
        let angle = self.map_for(Strategy::Angle, |_| buffer);
        Ok([coord, angle])
    }

    fn check_fill(&self, buffer: &FrameBuffer) -> Result<(), RecognizeError> {
        let required = (buffer.gesture_len() + 1) / 2;
        if buffer.fill() < required {
            return Err(RecognizeError::InsufficientFrames {
                available: buffer.fill(),
                required,
            });
        }
        Ok(())
    }

    fn check_occlusion(&self, buffer: &FrameBuffer) -> Result<(), RecognizeError> {
        let m = buffer.gesture_len();
        let limit = m / 2;
        let occluded = buffer.fully_occluded_recent(m);
        if occluded > limit {
            return Err(RecognizeError::RefusedTooOccluded { occluded, limit });
        }
        Ok(())
    }

    /// Algorithm: traverse the cursor over both strategies, collect the
    /// per-cursor best templates, and return the gesture attaining the
    /// overall minimum relative error. Refuses when too many of the newest
    /// M frames are fully occluded.
    pub fn recognize(&self, buffer: &FrameBuffer) -> Result<MatchResult, RecognizeError> {
        self.check_fill(buffer)?;
        self.check_occlusion(buffer)?;
        let maps = self.candidate_maps(buffer)?;
        Ok(self.fuse(maps))
    }

    /// Like [`Matcher::recognize`], but template `i` may be scored on
    /// `aligned[i]` (its own normalized view of the capture) instead of the
    /// raw buffer. `use_aligned[i]` selects per strategy (coordinate, angle)
    /// whether the aligned view applies; a template whose alignment
    /// degenerated keeps the raw stream. Occlusion refusal and the fill
    /// requirement are checked on the raw buffer.
    pub fn recognize_aligned(
        &self,
        raw: &FrameBuffer,
        aligned: &[FrameBuffer],
        use_aligned: &[[bool; 2]],
    ) -> Result<MatchResult, RecognizeError> {
        if aligned.len() != self.labels.len() || use_aligned.len() != self.labels.len() {
            return Err(RecognizeError::MissingAlignedBuffer(aligned.len()));
        }
        self.check_fill(raw)?;
        self.check_occlusion(raw)?;
        let coord = self.map_for(Strategy::Coordinate, |i| {
            if use_aligned[i][0] {
                &aligned[i]
            } else {
                raw
            }
        });
        let angle = self.map_for(Strategy::Angle, |i| {
            if use_aligned[i][1] {
                &aligned[i]
            } else {
                raw
            }
        });
        Ok(self.fuse([coord, angle]))
    }
}
