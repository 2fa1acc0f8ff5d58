//! Experiment harness: synthetic trial streams, occlusion injection,
//! sequence retiming, and accuracy sweeps over frame counts and occlusion
//! levels.

use crate::channels::{ObservedDelta, CHANNEL_COUNT, VECTOR_CHANNEL_COUNT};
use crate::codec::{normalize_stream_with_coverage, GestureTemplate};
use crate::datagen::registry::synth_gesture;
use crate::gesture::Gesture;
use crate::hand::{delta_sequence, HandError, HandFrame, KeypointId, Vec3};
use crate::predictor::PredictorModel;
use crate::recognizer::{FrameBuffer, MatchResult, Matcher, RecognizeError};
use crate::rngutil::{mix_seed, mix_seed3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("occlusion count {k} exceeds sequence length {len}")]
    BadOcclusionCount { k: usize, len: usize },
    #[error("synthesis failed: {0}")]
    Synthesis(#[from] HandError),
    #[error("recognition failed: {0}")]
    Recognition(#[from] RecognizeError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Experiment parameters. Defaults follow the reference setup: 30-frame
/// gestures, 50 seed samples, 5000 amplified samples, noise amplitudes 1
/// (vector) and 5 (angle), 100 trials per condition, actual frame counts
/// swept over 21..=35 and occlusion over 0..=15 frames.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub m: usize,
    pub n_sample: usize,
    pub gan_samples: usize,
    pub noise_vector: f64,
    pub noise_angle: f64,
    pub occlusion_frames: usize,
    pub frame_range: (usize, usize),
    pub trials: usize,
    pub rng_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 30,
            n_sample: 50,
            gan_samples: 5000,
            noise_vector: 1.0,
            noise_angle: 5.0,
            occlusion_frames: 0,
            frame_range: (21, 35),
            trials: 100,
            rng_seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.m < 2 || self.n_sample == 0 || self.trials == 0 {
            return Err(SweepError::BadConfig(
                "m must be >= 2 and counts >= 1".into(),
            ));
        }
        if self.occlusion_frames > 15 {
            return Err(SweepError::BadConfig(format!(
                "occlusion frames {} exceed the 15-frame operating range",
                self.occlusion_frames
            )));
        }
        if self.frame_range.0 < 2 || self.frame_range.0 > self.frame_range.1 {
            return Err(SweepError::BadConfig("bad frame range".into()));
        }
        Ok(())
    }
}

/// Which channel family (or their fusion) decides the winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    Coordinate,
    Angle,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipeline {
    pub normalize: bool,
    pub infill: bool,
    pub strategy: StrategyChoice,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline {
            normalize: true,
            infill: true,
            strategy: StrategyChoice::Joint,
        }
    }
}

/// Minimum worst-channel fraction of distinct capture frames a template's
/// alignments must consume for its normalized view to be admissible.
pub const ALIGNMENT_COVERAGE_THRESHOLD: f64 = 0.6;

/// One sweep condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// The reference setup: exact-length streams, no occlusion.
    Baseline,
    /// The gesture is performed in this many frames instead of M.
    Frames(usize),
    /// This many frames of the capture are fully occluded.
    Occlusion(usize),
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::Baseline => write!(f, "baseline"),
            Condition::Frames(n) => write!(f, "frames={n}"),
            Condition::Occlusion(k) => write!(f, "occlusion={k}"),
        }
    }
}

/// Marks `k` uniformly chosen distinct frames as unobservable for the
/// affected keypoints (all of them by default). Values are preserved, only
/// confidences drop to zero.
pub fn inject_occlusion(
    frames: &[ObservedDelta],
    k: usize,
    affected: Option<&[KeypointId]>,
    seed: u64,
) -> Result<Vec<ObservedDelta>, SweepError> {
    if k > frames.len() {
        return Err(SweepError::BadOcclusionCount {
            k,
            len: frames.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: the first k slots end up uniformly chosen.
    let mut indices: Vec<usize> = (0..frames.len()).collect();
    for i in 0..k {
        let j = rng.random_range(i..indices.len());
        indices.swap(i, j);
    }
    let mut out = frames.to_vec();
    for &idx in &indices[..k] {
        match affected {
            None => {
                for kp in KeypointId::all() {
                    out[idx].occlude_keypoint(kp);
                }
            }
            Some(list) => {
                for &kp in list {
                    out[idx].occlude_keypoint(kp);
                }
            }
        }
    }
    Ok(out)
}

/// Linear interpolation of a scalar series onto `target_len` uniformly
/// spaced points. The first and last values are preserved exactly.
pub fn lerp_series(values: &[f64], target_len: usize) -> Vec<f64> {
    debug_assert!(target_len >= 2);
    if values.len() == 1 {
        return vec![values[0]; target_len];
    }
    let scale = (values.len() - 1) as f64 / (target_len - 1) as f64;
    (0..target_len)
        .map(|j| {
            let pos = j as f64 * scale;
            let i0 = (pos.floor() as usize).min(values.len() - 2);
            let frac = pos - i0 as f64;
            values[i0] * (1.0 - frac) + values[i0 + 1] * frac
        })
        .collect()
}

/// Retimes an observed delta stream channel-wise: values are linearly
/// interpolated, confidences (and the keypoint record) take the nearer
/// source frame.
pub fn retime_observed(
    frames: &[ObservedDelta],
    target_len: usize,
) -> Result<Vec<ObservedDelta>, SweepError> {
    if target_len < 2 || frames.is_empty() {
        return Err(SweepError::BadConfig(
            "retime needs target_len >= 2 and a non-empty source".into(),
        ));
    }
    if target_len == frames.len() {
        return Ok(frames.to_vec());
    }
    let n = frames.len();
    let scale = (n - 1) as f64 / (target_len - 1) as f64;
    let mut out = Vec::with_capacity(target_len);
    for j in 0..target_len {
        let pos = j as f64 * scale;
        let i0 = (pos.floor() as usize).min(n.saturating_sub(2));
        let frac = if n == 1 { 0.0 } else { pos - i0 as f64 };
        let i1 = (i0 + 1).min(n - 1);
        let nearer = if frac < 0.5 { i0 } else { i1 };
        let mut frame = frames[nearer].clone();
        for ch in 0..CHANNEL_COUNT {
            frame.channels[ch] =
                frames[i0].channels[ch] * (1.0 - frac) + frames[i1].channels[ch] * frac;
        }
        out.push(frame);
    }
    Ok(out)
}

/// Retimes a hand-frame sequence to `target_len` frames: numeric channels
/// are linearly interpolated, confidences take the nearer source frame.
pub fn retime_sequence(
    frames: &[HandFrame],
    target_len: usize,
) -> Result<Vec<HandFrame>, SweepError> {
    if target_len < 2 || frames.is_empty() {
        return Err(SweepError::BadConfig(
            "retime needs target_len >= 2 and a non-empty source".into(),
        ));
    }
    if target_len == frames.len() {
        return Ok(frames.to_vec());
    }
    let n = frames.len();
    let scale = (n - 1) as f64 / (target_len - 1) as f64;
    let mut out = Vec::with_capacity(target_len);
    for j in 0..target_len {
        let pos = j as f64 * scale;
        let i0 = (pos.floor() as usize).min(n.saturating_sub(2));
        let frac = if n == 1 { 0.0 } else { pos - i0 as f64 };
        let i1 = (i0 + 1).min(n - 1);
        let lerp3 = |a: Vec3, b: Vec3| a * (1.0 - frac) + b * frac;
        let mut vectors = [Vec3::ZERO; crate::hand::VECTOR_KEYPOINT_COUNT];
        for (i, v) in vectors.iter_mut().enumerate() {
            *v = lerp3(frames[i0].vectors()[i], frames[i1].vectors()[i]);
        }
        let mut angles = [0.0; crate::hand::ANGLE_COUNT];
        for (i, a) in angles.iter_mut().enumerate() {
            *a = frames[i0].angles()[i] * (1.0 - frac) + frames[i1].angles()[i] * frac;
        }
        let nearer = if frac < 0.5 { i0 } else { i1 };
        let confidence = *frames[nearer].confidences();
        out.push(HandFrame::new(vectors, angles, confidence, j as u64)?);
    }
    Ok(out)
}

/// Everything a recognition pipeline needs at run time.
pub struct Models {
    pub templates: Vec<GestureTemplate>,
    pub predictor: Option<PredictorModel>,
}

impl Models {
    pub fn templates_only(m: usize) -> Models {
        Models {
            templates: crate::datagen::registry::all_templates(m),
            predictor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub condition: String,
    pub gesture: Gesture,
    pub trials: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<(), SweepError> {
        writeln!(w, "condition,gesture,trials,correct,accuracy")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                row.condition, row.gesture, row.trials, row.correct, row.accuracy
            )?;
        }
        Ok(())
    }

    pub fn accuracy_for(&self, condition: &str, gesture: Gesture) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.condition == condition && r.gesture == gesture)
            .map(|r| r.accuracy)
    }

    /// Mean accuracy over all gestures of one condition.
    pub fn mean_accuracy(&self, condition: &str) -> Option<f64> {
        let rows: Vec<&SweepRow> = self
            .rows
            .iter()
            .filter(|r| r.condition == condition)
            .collect();
        if rows.is_empty() {
            return None;
        }
        Some(rows.iter().map(|r| r.accuracy).sum::<f64>() / rows.len() as f64)
    }
}

fn perturb_observed<R: Rng>(
    frames: &mut [ObservedDelta],
    noise_vector: f64,
    noise_angle: f64,
    rng: &mut R,
) {
    for frame in frames.iter_mut() {
        for ch in 0..CHANNEL_COUNT {
            let a = if ch < VECTOR_CHANNEL_COUNT {
                noise_vector
            } else {
                noise_angle
            };
            if a > 0.0 {
                frame.channels[ch] += rng.random_range(-a..=a);
            }
        }
    }
}

/// One noisy performance of a gesture at a given actual length.
fn performance(
    config: &RunConfig,
    gesture: Gesture,
    actual_len: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ObservedDelta>, SweepError> {
    let clean = synth_gesture(gesture, config.m, rng.random(), None)?;
    let timed = if actual_len != config.m {
        retime_sequence(&clean, actual_len)?
    } else {
        clean
    };
    let mut stream: Vec<ObservedDelta> = delta_sequence(&timed)
        .iter()
        .map(ObservedDelta::fully_observed)
        .collect();
    perturb_observed(&mut stream, config.noise_vector, config.noise_angle, rng);
    Ok(stream)
}

/// Per-channel velocity range of the pre-gesture drift, baseline units and
/// degrees per frame.
const DRIFT_VECTOR: f64 = 0.5;
const DRIFT_ANGLE: f64 = 6.0;

/// Pre-gesture filler: the hand moving at a constant per-channel velocity
/// (plus observation noise). Each channel keeps at least half the nominal
/// drift speed, so the filler is neither template-shaped nor still and no
/// template scores spuriously well on buffer windows that predate the
/// capture.
fn drift_lead_in(
    len: usize,
    noise_vector: f64,
    noise_angle: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<ObservedDelta> {
    let mut velocity = [0.0; CHANNEL_COUNT];
    for (ch, v) in velocity.iter_mut().enumerate() {
        let a = if ch < VECTOR_CHANNEL_COUNT {
            DRIFT_VECTOR
        } else {
            DRIFT_ANGLE
        };
        let sign = if rng.random_range(0..2) == 0 {
            -1.0
        } else {
            1.0
        };
        *v = sign * rng.random_range(a / 2.0..=a);
    }
    let mut frames = Vec::with_capacity(len);
    for _ in 0..len {
        let mut frame = ObservedDelta::fully_observed(&crate::hand::DeltaFrame::ZERO);
        frame.channels = velocity;
        frames.push(frame);
    }
    perturb_observed(&mut frames, noise_vector, noise_angle, rng);
    frames
}

struct TrialStream {
    /// Drift lead-in followed by the capture.
    frames: Vec<ObservedDelta>,
    /// Length of the lead-in; the capture is everything after it.
    lead_in: usize,
}

/// Builds one trial's buffer content: enough pre-gesture drift to fill the
/// ring, then the capture itself (with occlusion injected there when
/// requested).
fn trial_stream(
    config: &RunConfig,
    gesture: Gesture,
    condition: Condition,
    rng: &mut ChaCha8Rng,
) -> Result<TrialStream, SweepError> {
    let actual_len = match condition {
        Condition::Frames(n) => n,
        _ => config.m,
    };
    let capacity = (3 * config.m).div_ceil(2);
    let lead_in = capacity.saturating_sub(actual_len);
    let mut frames = drift_lead_in(lead_in, config.noise_vector, config.noise_angle, rng);
    let mut capture = performance(config, gesture, actual_len, rng)?;
    if let Condition::Occlusion(k) = condition {
        capture = inject_occlusion(&capture, k, None, rng.random())?;
    }
    frames.extend(capture);
    Ok(TrialStream { frames, lead_in })
}

fn winner(result: &MatchResult, choice: StrategyChoice) -> Gesture {
    match choice {
        StrategyChoice::Joint => result.gesture,
        StrategyChoice::Coordinate | StrategyChoice::Angle => {
            let mut best: Option<(f64, usize)> = None;
            for row in &result.table {
                let re = match choice {
                    StrategyChoice::Coordinate => row.re_coord,
                    _ => row.re_angle,
                };
                if let Some(re) = re {
                    let better = match best {
                        None => true,
                        Some((b, _)) => re < b,
                    };
                    if better {
                        best = Some((re, row.gesture.ordinal()));
                    }
                }
            }
            crate::gesture::ALL_GESTURES[best.expect("table has at least one entry").1]
        }
    }
}

/// Runs one trial end to end and reports the recognized gesture.
pub fn run_trial(
    config: &RunConfig,
    pipeline: &Pipeline,
    models: &Models,
    matcher: &Matcher,
    gesture: Gesture,
    condition: Condition,
    trial_seed: u64,
) -> Result<Result<Gesture, RecognizeError>, SweepError> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let mut stream = trial_stream(config, gesture, condition, &mut rng)?;

    if pipeline.infill {
        if let Some(predictor) = &models.predictor {
            predictor.infill_sequence(&mut stream.frames);
        }
    }

    let lead_in = &stream.frames[..stream.lead_in];
    let capture = &stream.frames[stream.lead_in..];
    let mut raw = FrameBuffer::new(config.m);
    raw.extend(stream.frames.iter().cloned());

    let result = if pipeline.normalize {
        // Per-template view: the capture is aligned to each template's time
        // base behind the shared lead-in. A template whose alignment
        // collapses into replaying a few capture frames is not a plausible
        // reading of the capture and keeps its raw-stream score.
        let mut aligned = Vec::with_capacity(models.templates.len());
        let mut use_aligned = Vec::with_capacity(models.templates.len());
        for template in &models.templates {
            let normalized = normalize_stream_with_coverage(capture, template);
            let mut buffer = FrameBuffer::new(config.m);
            buffer.extend(lead_in.iter().cloned());
            buffer.extend(normalized.frames);
            use_aligned.push([
                normalized.coverage[0] >= ALIGNMENT_COVERAGE_THRESHOLD,
                normalized.coverage[1] >= ALIGNMENT_COVERAGE_THRESHOLD,
            ]);
            aligned.push(buffer);
        }
        matcher.recognize_aligned(&raw, &aligned, &use_aligned)
    } else if capture.len() < config.m {
        // Without symbol normalization a fast capture is stretched back to
        // M frames by plain interpolation (the residual frames of a quick
        // gesture carry no movement); a slow capture stays as is and the
        // window simply cannot see all of it.
        let mut interp = FrameBuffer::new(config.m);
        interp.extend(lead_in.iter().cloned());
        interp.extend(retime_observed(capture, config.m)?);
        matcher.recognize(&interp)
    } else {
        matcher.recognize(&raw)
    };

    match result {
        Ok(r) => Ok(Ok(winner(&r, pipeline.strategy))),
        Err(e @ RecognizeError::RefusedTooOccluded { .. }) => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

/// Accuracy of the pipeline over gestures x conditions, `config.trials`
/// trials each. Deterministic in `config.rng_seed`.
pub fn run_accuracy(
    config: &RunConfig,
    pipeline: &Pipeline,
    models: &Models,
    conditions: &[Condition],
    gestures: &[Gesture],
) -> Result<SweepReport, SweepError> {
    config.validate()?;
    let matcher = Matcher::new(&models.templates);
    let mut report = SweepReport::default();
    for (ci, &condition) in conditions.iter().enumerate() {
        for &gesture in gestures {
            let mut correct = 0;
            for trial in 0..config.trials {
                let seed = mix_seed3(
                    mix_seed(config.rng_seed, ci as u64),
                    gesture.ordinal() as u64,
                    trial as u64,
                    0x5eed,
                );
                let outcome =
                    run_trial(config, pipeline, models, &matcher, gesture, condition, seed)?;
                if outcome == Ok(gesture) {
                    correct += 1;
                }
            }
            report.rows.push(SweepRow {
                condition: condition.to_string(),
                gesture,
                trials: config.trials,
                correct,
                accuracy: correct as f64 / config.trials as f64,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::DeltaFrame;

    #[test]
    fn inject_occlusion_counts_and_preserves_values() {
        let frames: Vec<ObservedDelta> = (0..30)
            .map(|i| {
                let mut d = DeltaFrame::ZERO;
                d.dangles[0] = i as f64;
                ObservedDelta::fully_observed(&d)
            })
            .collect();
        let out = inject_occlusion(&frames, 7, None, 3).unwrap();
        let occluded = out.iter().filter(|f| f.fully_occluded()).count();
        assert_eq!(occluded, 7);
        for (a, b) in out.iter().zip(&frames) {
            assert_eq!(a.channels, b.channels);
        }
        // k = 0 leaves the stream untouched.
        let same = inject_occlusion(&frames, 0, None, 3).unwrap();
        assert_eq!(same, frames);
        // k = len occludes everything.
        let all = inject_occlusion(&frames, 30, None, 3).unwrap();
        assert!(all.iter().all(|f| f.fully_occluded()));
        assert!(inject_occlusion(&frames, 31, None, 3).is_err());
    }

    #[test]
    fn inject_occlusion_subset_only_touches_listed_keypoints() {
        let frames: Vec<ObservedDelta> = vec![ObservedDelta::fully_observed(&DeltaFrame::ZERO); 10];
        let kp = KeypointId::from_ordinal(5).unwrap();
        let out = inject_occlusion(&frames, 10, Some(&[kp]), 1).unwrap();
        for f in &out {
            assert_eq!(f.kp_conf[5], 0.0);
            assert!(!f.fully_occluded());
        }
    }

    #[test]
    fn inject_occlusion_is_deterministic() {
        let frames: Vec<ObservedDelta> = vec![ObservedDelta::fully_observed(&DeltaFrame::ZERO); 20];
        let a = inject_occlusion(&frames, 5, None, 9).unwrap();
        let b = inject_occlusion(&frames, 5, None, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lerp_series_ramp_example() {
        let out = lerp_series(&[0.0, 1.0], 5);
        let expect = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (a, b) in out.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn retime_identity_and_endpoints() {
        let frames = synth_gesture(Gesture::Push, 12, 3, None).unwrap();
        let same = retime_sequence(&frames, 12).unwrap();
        assert_eq!(same.len(), 12);
        for (a, b) in same.iter().zip(&frames) {
            assert_eq!(a.vectors(), b.vectors());
        }
        for target in [8usize, 17] {
            let out = retime_sequence(&frames, target).unwrap();
            assert_eq!(out.len(), target);
            // Endpoints exact.
            for i in 0..crate::hand::VECTOR_KEYPOINT_COUNT {
                assert!((out[0].vectors()[i] - frames[0].vectors()[i]).norm() < 1e-12);
                assert!((out[target - 1].vectors()[i] - frames[11].vectors()[i]).norm() < 1e-12);
            }
        }
        // A constant sequence stays constant at any length.
        let hold = synth_gesture(Gesture::Hold, 6, 0, None).unwrap();
        let out = retime_sequence(&hold, 15).unwrap();
        for f in &out {
            for (v, b) in f.vectors().iter().zip(hold[0].vectors()) {
                assert!((*v - *b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn retime_confidence_takes_the_nearer_source_frame() {
        use crate::hand::{HandFrame, Vec3, ANGLE_COUNT, KEYPOINT_COUNT, VECTOR_KEYPOINT_COUNT};
        // Two frames with distinct confidences, stretched to five: the first
        // two outputs sit nearer the first source frame, the rest nearer the
        // second.
        let frame = |conf: f64, t: u64| {
            HandFrame::new(
                [Vec3::ZERO; VECTOR_KEYPOINT_COUNT],
                [90.0; ANGLE_COUNT],
                [conf; KEYPOINT_COUNT],
                t,
            )
            .unwrap()
        };
        let out = retime_sequence(&[frame(0.25, 0), frame(0.75, 1)], 5).unwrap();
        let confs: Vec<f64> = out
            .iter()
            .map(|f| f.confidence(KeypointId::ELBOW))
            .collect();
        assert_eq!(confs, vec![0.25, 0.25, 0.75, 0.75, 0.75]);

        let mut a = ObservedDelta::fully_observed(&crate::hand::DeltaFrame::ZERO);
        a.occlude_keypoint(KeypointId::ELBOW);
        let b = ObservedDelta::fully_observed(&crate::hand::DeltaFrame::ZERO);
        let out = retime_observed(&[a, b], 5).unwrap();
        let occluded: Vec<bool> = out
            .iter()
            .map(|f| f.kp_conf[KeypointId::ELBOW.ordinal()] == 0.0)
            .collect();
        assert_eq!(occluded, vec![true, true, false, false, false]);
    }

    #[test]
    fn clean_baseline_trials_recognize_every_gesture() {
        // Zero noise, exact frame counts: templates match themselves.
        let config = RunConfig {
            noise_vector: 0.0,
            noise_angle: 0.0,
            trials: 2,
            ..RunConfig::default()
        };
        let models = Models::templates_only(config.m);
        let pipeline = Pipeline {
            normalize: false,
            infill: false,
            strategy: StrategyChoice::Joint,
        };
        let report = run_accuracy(
            &config,
            &pipeline,
            &models,
            &[Condition::Baseline],
            &crate::gesture::ALL_GESTURES,
        )
        .unwrap();
        for row in &report.rows {
            assert_eq!(row.accuracy, 1.0, "{} failed", row.gesture);
        }
        // And with normalization on, identically.
        let pipeline = Pipeline {
            normalize: true,
            infill: false,
            strategy: StrategyChoice::Joint,
        };
        let report = run_accuracy(
            &config,
            &pipeline,
            &models,
            &[Condition::Baseline],
            &crate::gesture::ALL_GESTURES,
        )
        .unwrap();
        for row in &report.rows {
            assert_eq!(row.accuracy, 1.0, "{} failed normalized", row.gesture);
        }
    }

    #[test]
    fn sweep_reports_are_reproducible() {
        let config = RunConfig {
            trials: 3,
            noise_vector: 0.5,
            noise_angle: 2.0,
            rng_seed: 5,
            ..RunConfig::default()
        };
        let models = Models::templates_only(config.m);
        let pipeline = Pipeline::default();
        let conditions = [Condition::Frames(28), Condition::Frames(30)];
        let gestures = [Gesture::Push, Gesture::Hold];
        let a = run_accuracy(&config, &pipeline, &models, &conditions, &gestures).unwrap();
        let b = run_accuracy(&config, &pipeline, &models, &conditions, &gestures).unwrap();
        assert_eq!(a, b);
        let mut csv_a = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        let mut csv_b = Vec::new();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        assert!(a.accuracy_for("frames=30", Gesture::Push).is_some());
    }

    #[test]
    fn config_validation() {
        let mut config = RunConfig::default();
        assert!(config.validate().is_ok());
        config.occlusion_frames = 16;
        assert!(config.validate().is_err());
        let mut config = RunConfig::default();
        config.trials = 0;
        assert!(config.validate().is_err());
    }
}
