//! Symbol encoding of delta channels (0.2 steps for vector components, 20
//! degree steps for angles, letters A through J) and greedy normalization of
//! variable-length captured sequences against a fixed-length template.

use crate::channels::{
    channel_kind, ChannelKind, ObservedDelta, CHANNEL_COUNT, VECTOR_CHANNEL_COUNT,
};
use crate::gesture::Gesture;
use crate::hand::{DeltaFrame, KEYPOINT_COUNT, VECTOR_KEYPOINT_COUNT};
use thiserror::Error;

pub const VECTOR_STEP: f64 = 0.2;
pub const ANGLE_STEP: f64 = 20.0;

/// One of the ten encoded categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub fn from_index(index: usize) -> Option<Letter> {
        if index < 10 {
            Some(Letter(index as u8))
        } else {
            None
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn as_char(self) -> char {
        (b'A' + self.0) as char
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if ('A'..='J').contains(&c) {
            Some(Letter(c as u8 - b'A'))
        } else {
            None
        }
    }
}

impl std::fmt::Display for Letter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodedSymbol {
    pub letter: Letter,
    pub kind: ChannelKind,
}

/// Bins a scalar into its letter: half-open bins [0, step), [step, 2*step),
/// ... with everything at or above the top bin clamped to J. Vector
/// components and angle deltas encode by magnitude.
pub fn encode_value(value: f64, kind: ChannelKind) -> EncodedSymbol {
    let step = match kind {
        ChannelKind::Vector => VECTOR_STEP,
        ChannelKind::Angle => ANGLE_STEP,
    };
    let index = (value.abs() / step).floor() as i64;
    EncodedSymbol {
        letter: Letter(index.clamp(0, 9) as u8),
        kind,
    }
}

/// A fixed-arity symbol frame: one letter per canonical channel.
pub type SymbolFrame = [Letter; CHANNEL_COUNT];

/// An encoded gesture sequence: per frame, 19x3 vector symbols followed by
/// 14 angle symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    pub frames: Vec<SymbolFrame>,
}

fn encode_channels(channels: &[f64; CHANNEL_COUNT]) -> SymbolFrame {
    let mut out = [Letter(0); CHANNEL_COUNT];
    for ch in 0..CHANNEL_COUNT {
        out[ch] = encode_value(channels[ch], channel_kind(ch)).letter;
    }
    out
}

pub fn encode_sequence(frames: &[DeltaFrame]) -> SymbolSequence {
    SymbolSequence {
        frames: frames
            .iter()
            .map(|f| encode_channels(&crate::channels::flatten_delta(f)))
            .collect(),
    }
}

impl SymbolSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// One symbol list per channel, for per-channel normalization.
    pub fn to_channels(&self) -> Vec<Vec<Letter>> {
        let mut out = vec![Vec::with_capacity(self.frames.len()); CHANNEL_COUNT];
        for frame in &self.frames {
            for (ch, &letter) in frame.iter().enumerate() {
                out[ch].push(letter);
            }
        }
        out
    }

    /// Inverse of [`SymbolSequence::to_channels`]. All channel lists must
    /// have equal length.
    pub fn from_channels(channels: &[Vec<Letter>]) -> SymbolSequence {
        assert_eq!(channels.len(), CHANNEL_COUNT);
        let len = channels[0].len();
        debug_assert!(channels.iter().all(|c| c.len() == len));
        let mut frames = vec![[Letter(0); CHANNEL_COUNT]; len];
        for (ch, list) in channels.iter().enumerate() {
            for (t, &letter) in list.iter().enumerate() {
                frames[t][ch] = letter;
            }
        }
        SymbolSequence { frames }
    }

    /// ASCII grid: one frame per line, channels space-separated.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for frame in &self.frames {
            for (ch, letter) in frame.iter().enumerate() {
                if ch > 0 {
                    out.push(' ');
                }
                out.push(letter.as_char());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_ascii(text: &str) -> Result<SymbolSequence, CodecError> {
        let mut frames = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut frame = [Letter(0); CHANNEL_COUNT];
            let mut count = 0;
            for tok in line.split_whitespace() {
                let mut chars = tok.chars();
                let (c, rest) = (chars.next(), chars.next());
                let letter = match (c, rest) {
                    (Some(c), None) => Letter::from_char(c),
                    _ => None,
                };
                let letter = letter.ok_or(CodecError::BadSymbol {
                    line: lineno + 1,
                    token: tok.to_string(),
                })?;
                if count >= CHANNEL_COUNT {
                    return Err(CodecError::BadArity { line: lineno + 1 });
                }
                frame[count] = letter;
                count += 1;
            }
            if count != CHANNEL_COUNT {
                return Err(CodecError::BadArity { line: lineno + 1 });
            }
            frames.push(frame);
        }
        Ok(SymbolSequence { frames })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("line {line}: invalid symbol {token:?}")]
    BadSymbol { line: usize, token: String },
    #[error("line {line}: expected {CHANNEL_COUNT} symbols")]
    BadArity { line: usize },
}

/// Where each normalized position takes its content from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignSource {
    /// Index into the captured sequence.
    Actual(usize),
    /// Cold-start fallback: index into the template itself.
    Template(usize),
}

/// Aligns a captured symbol channel against a template channel, producing
/// one source per template position.
///
/// A capture of the template's own length is taken as frame-for-frame
/// correspondence and passes through directly. Otherwise a cursor walks the
/// capture: an in-place symbol match advances it; on a mismatch the first
/// matching symbol at or after the cursor is taken; with no match the last
/// hit is repeated (or the template symbol itself before any hit).
pub fn align_channel(actual: &[Letter], template: &[Letter]) -> Vec<AlignSource> {
    if actual.len() == template.len() {
        return (0..actual.len()).map(AlignSource::Actual).collect();
    }
    let mut out = Vec::with_capacity(template.len());
    let mut cursor: isize = -1;
    for (i, &want) in template.iter().enumerate() {
        if i < actual.len() && actual[i] == want {
            out.push(AlignSource::Actual(i));
            cursor = i as isize;
            continue;
        }
        let start = cursor.max(0) as usize;
        match (start..actual.len()).find(|&j| actual[j] == want) {
            Some(j) => {
                out.push(AlignSource::Actual(j));
                cursor = j as isize;
            }
            None => {
                if cursor >= 0 {
                    out.push(AlignSource::Actual(cursor as usize));
                } else {
                    out.push(AlignSource::Template(i));
                }
            }
        }
    }
    out
}

/// Normalizes one symbol channel to the template's length.
pub fn normalize_sequence(actual: &[Letter], template: &[Letter]) -> Vec<Letter> {
    align_channel(actual, template)
        .into_iter()
        .map(|src| match src {
            AlignSource::Actual(j) => actual[j],
            AlignSource::Template(i) => template[i],
        })
        .collect()
}

/// Per-gesture reference: the template's numeric deltas and their encoded
/// form, both of the configured gesture length.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureTemplate {
    pub label: Gesture,
    pub numeric: Vec<DeltaFrame>,
    pub symbolic: SymbolSequence,
}

impl GestureTemplate {
    pub fn from_numeric(label: Gesture, numeric: Vec<DeltaFrame>) -> GestureTemplate {
        let symbolic = encode_sequence(&numeric);
        GestureTemplate {
            label,
            numeric,
            symbolic,
        }
    }

    pub fn len(&self) -> usize {
        self.numeric.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numeric.is_empty()
    }

    /// Flattened channel values, one array per frame.
    pub fn channel_frames(&self) -> Vec<[f64; CHANNEL_COUNT]> {
        self.numeric
            .iter()
            .map(crate::channels::flatten_delta)
            .collect()
    }
}

/// A capture rebuilt on a template's time base, with per-family alignment
/// coverage: the worst fraction, over a family's channels, of distinct
/// capture frames that channel's alignment consumed. Coverage near 1 means
/// the template's symbol structure absorbed the capture frame for frame;
/// low coverage means some channel degenerated into replaying a few lucky
/// frames.
pub struct NormalizedStream {
    pub frames: Vec<ObservedDelta>,
    /// Worst-channel coverage for the vector channels and the angle channels.
    pub coverage: [f64; 2],
}

/// Rebuilds a captured numeric stream on the template's time base. Each
/// channel is aligned independently on its symbols; numeric values and
/// confidences flow from the chosen capture frames. A cold start (no symbol
/// hit yet) keeps the capture's own value at that position rather than
/// copying the template's: fabricated template values would hand every
/// candidate template a perfectly matching channel.
pub fn normalize_stream(
    actual: &[ObservedDelta],
    template: &GestureTemplate,
) -> Vec<ObservedDelta> {
    normalize_stream_with_coverage(actual, template).frames
}

pub fn normalize_stream_with_coverage(
    actual: &[ObservedDelta],
    template: &GestureTemplate,
) -> NormalizedStream {
    let m = template.len();
    if actual.is_empty() {
        // Nothing observed: an all-zero, zero-confidence stream that no
        // matcher window can score.
        let mut blank = ObservedDelta::fully_observed(&crate::hand::DeltaFrame::ZERO);
        blank.kp_conf = [0.0; KEYPOINT_COUNT];
        blank.conf = [0.0; CHANNEL_COUNT];
        return NormalizedStream {
            frames: vec![blank; m],
            coverage: [0.0; 2],
        };
    }
    let template_symbols = template.symbolic.to_channels();

    let mut out = vec![
        ObservedDelta {
            channels: [0.0; CHANNEL_COUNT],
            kp_conf: [1.0; KEYPOINT_COUNT],
            conf: [1.0; CHANNEL_COUNT],
        };
        m
    ];
    let mut coverage = [1.0f64; 2];
    let denom = actual.len().min(m) as f64;

    let mut actual_symbols: Vec<Letter> = Vec::with_capacity(actual.len());
    let mut consumed = vec![false; actual.len()];
    for ch in 0..CHANNEL_COUNT {
        actual_symbols.clear();
        let kind = channel_kind(ch);
        for frame in actual {
            actual_symbols.push(encode_value(frame.channels[ch], kind).letter);
        }
        let sources = align_channel(&actual_symbols, &template_symbols[ch]);
        consumed.iter_mut().for_each(|c| *c = false);
        for (i, src) in sources.into_iter().enumerate() {
            let j = match src {
                AlignSource::Actual(j) => {
                    consumed[j] = true;
                    j
                }
                AlignSource::Template(_) => i.min(actual.len() - 1),
            };
            out[i].channels[ch] = actual[j].channels[ch];
            out[i].conf[ch] = actual[j].conf[ch];
        }
        let distinct = consumed.iter().filter(|&&c| c).count() as f64;
        let family = match kind {
            ChannelKind::Vector => 0,
            ChannelKind::Angle => 1,
        };
        coverage[family] = coverage[family].min(distinct / denom);
    }

    // Rebuild the keypoint confidence record from the channel weights.
    for frame in out.iter_mut() {
        for v in 0..VECTOR_KEYPOINT_COUNT {
            frame.kp_conf[v] = frame.conf[v * 3]
                .min(frame.conf[v * 3 + 1])
                .min(frame.conf[v * 3 + 2]);
        }
        let elbow_angles = [1usize, 4, 7, 10, 13];
        frame.kp_conf[KEYPOINT_COUNT - 1] = elbow_angles
            .iter()
            .map(|&i| frame.conf[VECTOR_CHANNEL_COUNT + i])
            .fold(1.0, f64::min);
    }
    NormalizedStream {
        frames: out,
        coverage,
    }
}
