//! Dataset synthesis and amplification: labeled delta-sequence sample sets,
//! the uniform perturbation that feeds the adversarial generator, the
//! generator/discriminator pair itself, and the nearest-center relabeling
//! validation pass.

pub mod gan;
pub mod registry;
pub mod validate;

use crate::channels::{ChannelKind, ObservedDelta};
use crate::gesture::Gesture;
use crate::hand::{DeltaFrame, KeypointId, ANGLE_COUNT, KEYPOINT_COUNT, VECTOR_KEYPOINT_COUNT};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("noise amplitude must be positive, got {0}")]
    BadAmplitude(f64),
    #[error("sample has {got} frames, expected {expected}")]
    BadSampleLength { expected: usize, got: usize },
    #[error("csv: {0}")]
    Csv(#[from] CsvError),
}

/// Uniform noise on [-amplitude, +amplitude], the input perturbation of the
/// adversarial generator. Defaults: 5 for angles, 1 for vector components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    amplitude: f64,
}

impl NoiseSpec {
    pub fn new(amplitude: f64) -> Result<NoiseSpec, DatagenError> {
        if amplitude > 0.0 && amplitude.is_finite() {
            Ok(NoiseSpec { amplitude })
        } else {
            Err(DatagenError::BadAmplitude(amplitude))
        }
    }

    pub fn vector_default() -> NoiseSpec {
        NoiseSpec { amplitude: 1.0 }
    }

    pub fn angle_default() -> NoiseSpec {
        NoiseSpec { amplitude: 5.0 }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

/// One labeled gesture sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: Gesture,
    pub frames: Vec<DeltaFrame>,
}

/// A labeled collection of fixed-length sequences. `mode` names the channel
/// family this set is meant to train or validate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub mode: ChannelKind,
    seq_len: usize,
    samples: Vec<Sample>,
}

impl SampleSet {
    pub fn new(mode: ChannelKind, seq_len: usize) -> SampleSet {
        SampleSet {
            mode,
            seq_len,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, sample: Sample) -> Result<(), DatagenError> {
        if sample.frames.len() != self.seq_len {
            return Err(DatagenError::BadSampleLength {
                expected: self.seq_len,
                got: sample.frames.len(),
            });
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The values of the mode's channels, one row per frame.
    pub fn mode_rows(&self, sample: &Sample) -> Vec<Vec<f64>> {
        let range = self.mode.channel_range();
        sample
            .frames
            .iter()
            .map(|f| crate::channels::flatten_delta(f)[range.clone()].to_vec())
            .collect()
    }
}

/// Adds an independent uniform draw in [-a, +a] to every scalar of the
/// mode's channel family; the other family is untouched. Deterministic in
/// `seed`.
pub fn perturb(
    frames: &[DeltaFrame],
    mode: ChannelKind,
    spec: &NoiseSpec,
    seed: u64,
) -> Vec<DeltaFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_with(frames, mode, spec, &mut rng)
}

pub fn perturb_with<R: Rng>(
    frames: &[DeltaFrame],
    mode: ChannelKind,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Vec<DeltaFrame> {
    let a = spec.amplitude();
    frames
        .iter()
        .map(|frame| {
            let mut out = *frame;
            match mode {
                ChannelKind::Vector => {
                    for v in out.dvectors.iter_mut() {
                        v.x += rng.random_range(-a..=a);
                        v.y += rng.random_range(-a..=a);
                        v.z += rng.random_range(-a..=a);
                    }
                }
                ChannelKind::Angle => {
                    for d in out.dangles.iter_mut() {
                        *d += rng.random_range(-a..=a);
                    }
                }
            }
            out
        })
        .collect()
}

/// Synthesizes a seed dataset: `per_gesture` jittered performances of every
/// gesture, M frames each.
pub fn synth_sample_set(
    mode: ChannelKind,
    m: usize,
    per_gesture: usize,
    jitter: Option<&NoiseSpec>,
    seed: u64,
) -> SampleSet {
    let mut set = SampleSet::new(mode, m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &gesture in &crate::gesture::ALL_GESTURES {
        for _ in 0..per_gesture {
            let frames = registry::synth_gesture(gesture, m, rng.random(), jitter)
                .expect("registry trajectories are nondegenerate");
            set.push(Sample {
                label: gesture,
                frames: crate::hand::delta_sequence(&frames),
            })
            .unwrap();
        }
    }
    set
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn csv_header() -> String {
    let mut cols: Vec<String> = vec!["label".into(), "sample_id".into(), "frame_idx".into()];
    for kp in KeypointId::all().filter(|k| *k != KeypointId::ELBOW) {
        for axis in ["x", "y", "z"] {
            cols.push(format!("dv_{kp}_{axis}"));
        }
    }
    for i in 0..ANGLE_COUNT {
        cols.push(format!("da_{i}"));
    }
    for kp in KeypointId::all() {
        cols.push(format!("conf_{kp}"));
    }
    cols.join(",")
}

fn write_row<W: Write>(
    w: &mut W,
    label: &str,
    sample_id: usize,
    frame_idx: usize,
    frame: &DeltaFrame,
    conf: &[f64; KEYPOINT_COUNT],
) -> io::Result<()> {
    write!(w, "{label},{sample_id},{frame_idx}")?;
    for v in frame.dvectors.iter() {
        write!(w, ",{},{},{}", v.x, v.y, v.z)?;
    }
    for a in frame.dangles.iter() {
        write!(w, ",{a}")?;
    }
    for c in conf.iter() {
        write!(w, ",{c}")?;
    }
    writeln!(w)
}

/// Persists a sample set: one row per frame with the 57 vector deltas, 14
/// angle deltas and 20 keypoint confidences (datasets are fully observed,
/// so the confidence columns are 1).
pub fn write_samples_csv<W: Write>(w: &mut W, set: &SampleSet) -> Result<(), CsvError> {
    writeln!(w, "{}", csv_header())?;
    for (sample_id, sample) in set.samples().iter().enumerate() {
        for (frame_idx, frame) in sample.frames.iter().enumerate() {
            write_row(
                w,
                sample.label.name(),
                sample_id,
                frame_idx,
                frame,
                &[1.0; KEYPOINT_COUNT],
            )?;
        }
    }
    Ok(())
}

struct ParsedRow {
    label: String,
    sample_id: usize,
    frame: DeltaFrame,
    conf: [f64; KEYPOINT_COUNT],
}

fn parse_row(line: &str, lineno: usize) -> Result<ParsedRow, CsvError> {
    let fields: Vec<&str> = line.split(',').collect();
    let expected = 3 + VECTOR_KEYPOINT_COUNT * 3 + ANGLE_COUNT + KEYPOINT_COUNT;
    if fields.len() != expected {
        return Err(CsvError::Parse {
            line: lineno,
            message: format!("expected {expected} columns, got {}", fields.len()),
        });
    }
    let parse_f = |s: &str, what: &str| -> Result<f64, CsvError> {
        s.parse().map_err(|_| CsvError::Parse {
            line: lineno,
            message: format!("bad {what}: {s:?}"),
        })
    };
    let sample_id: usize = fields[1].parse().map_err(|_| CsvError::Parse {
        line: lineno,
        message: format!("bad sample_id: {:?}", fields[1]),
    })?;
    let mut frame = DeltaFrame::ZERO;
    let mut cursor = 3;
    for v in frame.dvectors.iter_mut() {
        v.x = parse_f(fields[cursor], "delta")?;
        v.y = parse_f(fields[cursor + 1], "delta")?;
        v.z = parse_f(fields[cursor + 2], "delta")?;
        cursor += 3;
    }
    for a in frame.dangles.iter_mut() {
        *a = parse_f(fields[cursor], "angle delta")?;
        cursor += 1;
    }
    let mut conf = [0.0; KEYPOINT_COUNT];
    for c in conf.iter_mut() {
        *c = parse_f(fields[cursor], "confidence")?;
        cursor += 1;
    }
    Ok(ParsedRow {
        label: fields[0].to_string(),
        sample_id,
        frame,
        conf,
    })
}

/// Reads a sample-set CSV written by [`write_samples_csv`]. Rows must be
/// grouped by sample, frames in order.
pub fn read_samples_csv<R: BufRead>(r: R, mode: ChannelKind) -> Result<SampleSet, CsvError> {
    let mut samples: Vec<Sample> = Vec::new();
    let mut current: Option<(usize, Sample)> = None;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let row = parse_row(&line, lineno + 1)?;
        let label = Gesture::from_name(&row.label).ok_or_else(|| CsvError::Parse {
            line: lineno + 1,
            message: format!("unknown gesture {:?}", row.label),
        })?;
        match current.as_mut() {
            Some((id, sample)) if *id == row.sample_id => sample.frames.push(row.frame),
            _ => {
                if let Some((_, done)) = current.take() {
                    samples.push(done);
                }
                current = Some((
                    row.sample_id,
                    Sample {
                        label,
                        frames: vec![row.frame],
                    },
                ));
            }
        }
    }
    if let Some((_, done)) = current.take() {
        samples.push(done);
    }
    let seq_len = samples.first().map_or(0, |s| s.frames.len());
    let mut set = SampleSet::new(mode, seq_len);
    for sample in samples {
        let got = sample.frames.len();
        set.push(sample).map_err(|_| CsvError::Parse {
            line: 0,
            message: format!("inconsistent sample length: {got} vs {seq_len}"),
        })?;
    }
    Ok(set)
}

/// Persists an observed delta stream in the same row shape as a sample set
/// (sample_id 0, frames in order, real confidences).
pub fn write_stream_csv<W: Write>(
    w: &mut W,
    frames: &[ObservedDelta],
    label: &str,
) -> Result<(), CsvError> {
    writeln!(w, "{}", csv_header())?;
    for (frame_idx, obs) in frames.iter().enumerate() {
        write_row(w, label, 0, frame_idx, &obs.to_delta(), &obs.kp_conf)?;
    }
    Ok(())
}

/// Reads an observed delta stream; the label column is not interpreted.
pub fn read_stream_csv<R: BufRead>(r: R) -> Result<Vec<ObservedDelta>, CsvError> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let row = parse_row(&line, lineno + 1)?;
        out.push(ObservedDelta::new(&row.frame, row.conf));
    }
    Ok(out)
}
