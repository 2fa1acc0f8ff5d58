//! Per-channel temporal prediction: one small GRU per delta channel trained
//! by next-step regression with full backpropagation through time, plus
//! same-class influence-factor fusion for infilling occluded channels.

use crate::channels::{channel_group, ObservedDelta, CHANNEL_COUNT};
use crate::datagen::SampleSet;
use crate::hand::KeypointId;
use crate::matrix::{axpy, dot, sigmoid, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PredictorError {
    #[error("training data is empty")]
    EmptyData,
    #[error("training diverged on channel {channel}")]
    Divergence { channel: usize },
    #[error("missing prediction for same-class keypoint {0}")]
    MissingSource(KeypointId),
}

/// Gate weights over the concatenated [h_prev, x], plus a scalar output head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruCell {
    pub w_update: Matrix,
    pub w_reset: Matrix,
    pub w_candidate: Matrix,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl GruCell {
    pub fn hidden(&self) -> usize {
        self.w_update.rows
    }

    pub fn zeros(hidden: usize) -> GruCell {
        GruCell {
            w_update: Matrix::zeros(hidden, hidden + 1),
            w_reset: Matrix::zeros(hidden, hidden + 1),
            w_candidate: Matrix::zeros(hidden, hidden + 1),
            w_out: vec![0.0; hidden],
            b_out: 0.0,
        }
    }

    fn random(hidden: usize, rng: &mut ChaCha8Rng) -> GruCell {
        let s = 0.5 / ((hidden + 1) as f64).sqrt();
        GruCell {
            w_update: Matrix::random(hidden, hidden + 1, s, rng),
            w_reset: Matrix::random(hidden, hidden + 1, s, rng),
            w_candidate: Matrix::random(hidden, hidden + 1, s, rng),
            w_out: (0..hidden)
                .map(|_| {
                    use rand::Rng;
                    rng.random_range(-s..=s)
                })
                .collect(),
            b_out: 0.0,
        }
    }
}

/// One recurrence step: update gate, reset gate, candidate activation,
/// convex blend, and the scalar output head on the new hidden state.
pub fn gru_step(cell: &GruCell, h_prev: &[f64], x: f64) -> (Vec<f64>, f64) {
    let h_dim = cell.hidden();
    debug_assert_eq!(h_prev.len(), h_dim);
    let mut v = Vec::with_capacity(h_dim + 1);
    v.extend_from_slice(h_prev);
    v.push(x);
    let z: Vec<f64> = cell.w_update.matvec(&v).into_iter().map(sigmoid).collect();
    let r: Vec<f64> = cell.w_reset.matvec(&v).into_iter().map(sigmoid).collect();
    let mut u = Vec::with_capacity(h_dim + 1);
    u.extend(r.iter().zip(h_prev).map(|(ri, hi)| ri * hi));
    u.push(x);
    let c: Vec<f64> = cell
        .w_candidate
        .matvec(&u)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let h: Vec<f64> = (0..h_dim)
        .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * c[i])
        .collect();
    let y = dot(&cell.w_out, &h) + cell.b_out;
    (h, y)
}

struct StepCache {
    h_prev: Vec<f64>,
    x: f64,
    z: Vec<f64>,
    r: Vec<f64>,
    u: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
    y: f64,
}

fn forward_sequence(cell: &GruCell, values: &[f64]) -> Vec<StepCache> {
    let h_dim = cell.hidden();
    let mut h = vec![0.0; h_dim];
    let mut caches = Vec::with_capacity(values.len().saturating_sub(1));
    for t in 0..values.len().saturating_sub(1) {
        let x = values[t];
        let mut v = Vec::with_capacity(h_dim + 1);
        v.extend_from_slice(&h);
        v.push(x);
        let z: Vec<f64> = cell.w_update.matvec(&v).into_iter().map(sigmoid).collect();
        let r: Vec<f64> = cell.w_reset.matvec(&v).into_iter().map(sigmoid).collect();
        let mut u = Vec::with_capacity(h_dim + 1);
        u.extend(r.iter().zip(&h).map(|(ri, hi)| ri * hi));
        u.push(x);
        let c: Vec<f64> = cell
            .w_candidate
            .matvec(&u)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let h_next: Vec<f64> = (0..h_dim)
            .map(|i| (1.0 - z[i]) * h[i] + z[i] * c[i])
            .collect();
        let y = dot(&cell.w_out, &h_next) + cell.b_out;
        caches.push(StepCache {
            h_prev: h.clone(),
            x,
            z,
            r,
            u,
            c,
            h: h_next.clone(),
            y,
        });
        h = h_next;
    }
    caches
}

/// Mean squared next-step prediction error over one sequence.
pub fn sequence_loss(cell: &GruCell, values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let caches = forward_sequence(cell, values);
    let n = caches.len() as f64;
    caches
        .iter()
        .enumerate()
        .map(|(t, cache)| (cache.y - values[t + 1]).powi(2))
        .sum::<f64>()
        / n
}

#[derive(Debug, Clone)]
pub struct CellGradients {
    pub w_update: Matrix,
    pub w_reset: Matrix,
    pub w_candidate: Matrix,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

/// Gradient of [`sequence_loss`] in every cell parameter, by full
/// backpropagation through time (no truncation).
pub fn sequence_gradients(cell: &GruCell, values: &[f64]) -> (CellGradients, f64) {
    let h_dim = cell.hidden();
    let mut grads = CellGradients {
        w_update: Matrix::zeros(h_dim, h_dim + 1),
        w_reset: Matrix::zeros(h_dim, h_dim + 1),
        w_candidate: Matrix::zeros(h_dim, h_dim + 1),
        w_out: vec![0.0; h_dim],
        b_out: 0.0,
    };
    if values.len() < 2 {
        return (grads, 0.0);
    }
    let caches = forward_sequence(cell, values);
    let n = caches.len() as f64;
    let mut loss = 0.0;
    let mut dh_next = vec![0.0; h_dim];
    for (t, cache) in caches.iter().enumerate().rev() {
        let err = cache.y - values[t + 1];
        loss += err * err / n;
        let dy = 2.0 * err / n;
        // y = w_out . h + b_out
        axpy(&mut grads.w_out, dy, &cache.h);
        grads.b_out += dy;
        let mut dh: Vec<f64> = cell.w_out.iter().map(|w| dy * w).collect();
        axpy(&mut dh, 1.0, &dh_next);
        // h = (1 - z) h_prev + z c
        let dz: Vec<f64> = (0..h_dim)
            .map(|i| dh[i] * (cache.c[i] - cache.h_prev[i]))
            .collect();
        let dc: Vec<f64> = (0..h_dim).map(|i| dh[i] * cache.z[i]).collect();
        let mut dh_prev: Vec<f64> = (0..h_dim).map(|i| dh[i] * (1.0 - cache.z[i])).collect();
        // c = tanh(w_candidate . u)
        let da_c: Vec<f64> = (0..h_dim)
            .map(|i| dc[i] * (1.0 - cache.c[i] * cache.c[i]))
            .collect();
        let mut v = Vec::with_capacity(h_dim + 1);
        v.extend_from_slice(&cache.h_prev);
        v.push(cache.x);
        grads.w_candidate.add_outer(&da_c, &cache.u, 1.0);
        let du = cell.w_candidate.tr_matvec(&da_c);
        // u = [r * h_prev; x]
        let dr: Vec<f64> = (0..h_dim).map(|i| du[i] * cache.h_prev[i]).collect();
        for i in 0..h_dim {
            dh_prev[i] += du[i] * cache.r[i];
        }
        // gates
        let da_z: Vec<f64> = (0..h_dim)
            .map(|i| dz[i] * cache.z[i] * (1.0 - cache.z[i]))
            .collect();
        let da_r: Vec<f64> = (0..h_dim)
            .map(|i| dr[i] * cache.r[i] * (1.0 - cache.r[i]))
            .collect();
        grads.w_update.add_outer(&da_z, &v, 1.0);
        grads.w_reset.add_outer(&da_r, &v, 1.0);
        let dv_z = cell.w_update.tr_matvec(&da_z);
        let dv_r = cell.w_reset.tr_matvec(&da_r);
        for i in 0..h_dim {
            dh_prev[i] += dv_z[i] + dv_r[i];
        }
        dh_next = dh_prev;
    }
    (grads, loss)
}

#[derive(Debug, Clone)]
pub struct PredictorConfig {
    pub lr: f64,
    pub epochs: usize,
    pub hidden: usize,
    pub rng_seed: u64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig {
            lr: 0.05,
            epochs: 60,
            hidden: 16,
            rng_seed: 0,
        }
    }
}

/// Fusion weight of a same-class source toward a target: 0.5 for the
/// target's own model, the remaining 0.5 split evenly over the rest, 1.0
/// when the class has a single member.
pub fn influence_factor(class_size: usize, target: usize, source: usize) -> f64 {
    if class_size == 1 {
        1.0
    } else if target == source {
        0.5
    } else {
        0.5 / (class_size as f64 - 1.0)
    }
}

/// Per-channel fusion table: for every channel, its same-class source
/// channels with their weights (summing to 1).
#[derive(Debug, Clone)]
pub struct InfluenceFactors {
    per_channel: Vec<Vec<(usize, f64)>>,
}

impl InfluenceFactors {
    pub fn new() -> InfluenceFactors {
        let per_channel = (0..CHANNEL_COUNT)
            .map(|ch| {
                let group = channel_group(ch);
                let n = group.len();
                let target = group.iter().position(|&g| g == ch).unwrap();
                group
                    .iter()
                    .enumerate()
                    .map(|(source, &src_ch)| (src_ch, influence_factor(n, target, source)))
                    .collect()
            })
            .collect();
        InfluenceFactors { per_channel }
    }

    pub fn sources(&self, channel: usize) -> &[(usize, f64)] {
        &self.per_channel[channel]
    }
}

impl Default for InfluenceFactors {
    fn default() -> Self {
        InfluenceFactors::new()
    }
}

/// One trained cell per channel plus the class fusion weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorModel {
    pub hidden: usize,
    pub cells: Vec<GruCell>,
    /// Fusion weight per hand class, indexed A..F.
    pub w_fuse: [f64; 6],
}

/// Trains one cell per channel by SGD over full-sequence BPTT. Channels are
/// independent and train in parallel, each on its own derived seed.
pub fn train_predictor(
    data: &SampleSet,
    config: &PredictorConfig,
) -> Result<PredictorModel, PredictorError> {
    if data.is_empty() {
        return Err(PredictorError::EmptyData);
    }
    let flattened: Vec<Vec<[f64; CHANNEL_COUNT]>> = data
        .samples()
        .iter()
        .map(|s| {
            s.frames
                .iter()
                .map(crate::channels::flatten_delta)
                .collect()
        })
        .collect();

    let cells: Result<Vec<GruCell>, PredictorError> = (0..CHANNEL_COUNT)
        .into_par_iter()
        .map(|ch| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(crate::rngutil::mix_seed(config.rng_seed, ch as u64));
            let mut cell = GruCell::random(config.hidden, &mut rng);
            let series: Vec<Vec<f64>> = flattened
                .iter()
                .map(|frames| frames.iter().map(|f| f[ch]).collect())
                .collect();
            for _ in 0..config.epochs {
                for values in &series {
                    let (grads, loss) = sequence_gradients(&cell, values);
                    if !loss.is_finite() {
                        return Err(PredictorError::Divergence { channel: ch });
                    }
                    cell.w_update.add_scaled(&grads.w_update, -config.lr);
                    cell.w_reset.add_scaled(&grads.w_reset, -config.lr);
                    cell.w_candidate.add_scaled(&grads.w_candidate, -config.lr);
                    axpy(&mut cell.w_out, -config.lr, &grads.w_out);
                    cell.b_out -= config.lr * grads.b_out;
                }
            }
            Ok(cell)
        })
        .collect();

    Ok(PredictorModel {
        hidden: config.hidden,
        cells: cells?,
        w_fuse: [1.0; 6],
    })
}

impl PredictorModel {
    /// Next-value prediction for one channel given its history.
    pub fn predict_channel(&self, channel: usize, history: &[f64]) -> f64 {
        let cell = &self.cells[channel];
        let mut h = vec![0.0; cell.hidden()];
        let mut y = cell.b_out;
        for &x in history {
            let (h_next, y_next) = gru_step(cell, &h, x);
            h = h_next;
            y = y_next;
        }
        y
    }

    /// Class-level fusion of per-source predictions for a target keypoint:
    /// sigmoid(W_fuse * sum of influence-weighted predictions). Every member
    /// of the target's class must be present.
    pub fn class_fuse(
        &self,
        predictions: &[(KeypointId, f64)],
        target: KeypointId,
    ) -> Result<f64, PredictorError> {
        let class = target.class();
        let n = class.size();
        let target_idx = target.index() as usize;
        let mut s = 0.0;
        for source_idx in 0..n {
            let kp = KeypointId::new(class, source_idx as u8).unwrap();
            let y = predictions
                .iter()
                .find(|(p, _)| *p == kp)
                .map(|(_, y)| *y)
                .ok_or(PredictorError::MissingSource(kp))?;
            s += influence_factor(n, target_idx, source_idx) * y;
        }
        Ok(sigmoid(self.w_fuse[class as usize] * s))
    }

    fn fused_prediction(
        &self,
        factors: &InfluenceFactors,
        frames: &[ObservedDelta],
        channel: usize,
        t: usize,
        memo: &mut [Option<f64>],
    ) -> f64 {
        let mut fused = 0.0;
        for &(src, beta) in factors.sources(channel) {
            let y = match memo[src] {
                Some(y) => y,
                None => {
                    let history: Vec<f64> = frames[..t].iter().map(|f| f.channels[src]).collect();
                    let y = self.predict_channel(src, &history);
                    memo[src] = Some(y);
                    y
                }
            };
            fused += beta * y;
        }
        fused
    }

    /// Infers the target keypoint's three vector-channel values at frame `t`:
    /// channels observed there pass through, unobserved ones are replaced by
    /// the influence-weighted same-class predictions. `None` for the elbow,
    /// which carries no vector channels.
    pub fn infill_missing(
        &self,
        frames: &[ObservedDelta],
        target: KeypointId,
        t: usize,
    ) -> Option<[f64; 3]> {
        let factors = InfluenceFactors::new();
        let mut memo = vec![None; CHANNEL_COUNT];
        let mut out = [0.0; 3];
        target.vector_index()?;
        for (axis, slot) in out.iter_mut().enumerate() {
            let ch = crate::channels::vector_channel(target, axis).unwrap();
            *slot = if frames[t].conf[ch] == 0.0 && t > 0 {
                self.fused_prediction(&factors, frames, ch, t, &mut memo)
            } else {
                frames[t].channels[ch]
            };
        }
        Some(out)
    }

    /// Replaces every zero-confidence channel of frame `t` with its fused
    /// prediction and marks it predicted-but-unobserved (confidence 0.5).
    /// Observed channels are never modified. Frame 0 has no history and is
    /// left as is.
    pub fn infill_frame(&self, frames: &mut [ObservedDelta], t: usize) {
        if t == 0 {
            return;
        }
        let factors = InfluenceFactors::new();
        let mut memo = vec![None; CHANNEL_COUNT];
        let mut updates = Vec::new();
        for ch in 0..CHANNEL_COUNT {
            if frames[t].conf[ch] == 0.0 {
                let fused = self.fused_prediction(&factors, frames, ch, t, &mut memo);
                updates.push((ch, fused));
            }
        }
        for (ch, value) in updates {
            frames[t].channels[ch] = value;
            frames[t].conf[ch] = 0.5;
        }
    }

    /// Streams infill over a whole capture in time order, carrying GRU
    /// hidden states incrementally. Equivalent to calling
    /// [`PredictorModel::infill_frame`] at every index, in one pass.
    pub fn infill_sequence(&self, frames: &mut [ObservedDelta]) {
        let factors = InfluenceFactors::new();
        let mut hidden: Vec<Vec<f64>> = self.cells.iter().map(|c| vec![0.0; c.hidden()]).collect();
        let mut last_y: Vec<f64> = self.cells.iter().map(|c| c.b_out).collect();
        for t in 0..frames.len() {
            if t > 0 {
                let mut updates = Vec::new();
                for ch in 0..CHANNEL_COUNT {
                    if frames[t].conf[ch] == 0.0 {
                        let fused: f64 = factors
                            .sources(ch)
                            .iter()
                            .map(|&(src, beta)| beta * last_y[src])
                            .sum();
                        updates.push((ch, fused));
                    }
                }
                for (ch, value) in updates {
                    frames[t].channels[ch] = value;
                    frames[t].conf[ch] = 0.5;
                }
            }
            for ch in 0..CHANNEL_COUNT {
                let (h, y) = gru_step(&self.cells[ch], &hidden[ch], frames[t].channels[ch]);
                hidden[ch] = h;
                last_y[ch] = y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{vector_channel, ChannelKind};
    use crate::datagen::{synth_sample_set, NoiseSpec};
    use crate::gesture::Gesture;
    use crate::hand::DeltaFrame;
    use crate::hand::HandClass;
    use rand::Rng;

    fn random_cell(hidden: usize, seed: u64) -> GruCell {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GruCell::random(hidden, &mut rng)
    }

    #[test]
    fn gru_step_zero_weights() {
        let cell = GruCell::zeros(4);
        let (h, y) = gru_step(&cell, &[0.0; 4], 1.3);
        assert_eq!(h, vec![0.0; 4]);
        assert_eq!(y, 0.0);
        // With h_prev = v: gates are 0.5, candidate 0, so h = 0.5 v.
        let v = [0.8, -0.4, 0.2, 1.0];
        let (h, _) = gru_step(&cell, &v, -2.0);
        for (hi, vi) in h.iter().zip(&v) {
            assert!((hi - 0.5 * vi).abs() < 1e-15);
        }
    }

    #[test]
    fn gru_step_matches_scalar_transcription() {
        // Independent re-evaluation of the four update equations.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..100 {
            let cell = random_cell(4, 100 + trial);
            let h_prev: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x: f64 = rng.random_range(-2.0..2.0);
            let (h, y) = gru_step(&cell, &h_prev, x);

            let sig = |t: f64| 1.0 / (1.0 + (-t).exp());
            let mut v = h_prev.clone();
            v.push(x);
            for i in 0..4 {
                let mut az = 0.0;
                for (j, vj) in v.iter().enumerate() {
                    az += cell.w_update.at(i, j) * vj;
                }
                let zi = sig(az);
                let mut ac = 0.0;
                for j in 0..4 {
                    let arj: f64 = (0..5).map(|k| cell.w_reset.at(j, k) * v[k]).sum();
                    ac += cell.w_candidate.at(i, j) * (sig(arj) * h_prev[j]);
                }
                ac += cell.w_candidate.at(i, 4) * x;
                let ci = ac.tanh();
                let hi = (1.0 - zi) * h_prev[i] + zi * ci;
                assert!((h[i] - hi).abs() < 1e-12, "trial {trial} unit {i}");
            }
            let y_expect: f64 =
                h.iter().zip(&cell.w_out).map(|(a, b)| a * b).sum::<f64>() + cell.b_out;
            assert!((y - y_expect).abs() < 1e-12);
        }
    }

    #[test]
    fn bptt_matches_central_finite_differences() {
        let cell = random_cell(3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let values: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (grads, _) = sequence_gradients(&cell, &values);

        let h = 1e-5;
        let mut analytic = Vec::new();
        let mut fd = Vec::new();
        let matrices: [(&Matrix, fn(&mut GruCell) -> &mut Matrix); 3] = [
            (&grads.w_update, |c| &mut c.w_update),
            (&grads.w_reset, |c| &mut c.w_reset),
            (&grads.w_candidate, |c| &mut c.w_candidate),
        ];
        for (grad, access) in matrices {
            for i in 0..grad.data.len() {
                analytic.push(grad.data[i]);
                let mut plus = cell.clone();
                access(&mut plus).data[i] += h;
                let mut minus = cell.clone();
                access(&mut minus).data[i] -= h;
                fd.push(
                    (sequence_loss(&plus, &values) - sequence_loss(&minus, &values)) / (2.0 * h),
                );
            }
        }
        for i in 0..grads.w_out.len() {
            analytic.push(grads.w_out[i]);
            let mut plus = cell.clone();
            plus.w_out[i] += h;
            let mut minus = cell.clone();
            minus.w_out[i] -= h;
            fd.push((sequence_loss(&plus, &values) - sequence_loss(&minus, &values)) / (2.0 * h));
        }
        analytic.push(grads.b_out);
        let mut plus = cell.clone();
        plus.b_out += h;
        let mut minus = cell.clone();
        minus.b_out -= h;
        fd.push((sequence_loss(&plus, &values) - sequence_loss(&minus, &values)) / (2.0 * h));

        let diff: f64 = analytic
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = analytic
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(1e-12);
        assert!(diff / scale < 1e-4, "relative error {}", diff / scale);
    }

    fn constant_set(value: f64, m: usize, n: usize) -> SampleSet {
        let mut set = SampleSet::new(ChannelKind::Vector, m);
        for _ in 0..n {
            let mut frame = DeltaFrame::ZERO;
            for v in frame.dvectors.iter_mut() {
                v.x = value;
                v.y = value;
                v.z = value;
            }
            frame.dangles = [value; crate::hand::ANGLE_COUNT];
            set.push(crate::datagen::Sample {
                label: Gesture::Hold,
                frames: vec![frame; m],
            })
            .unwrap();
        }
        set
    }

    #[test]
    fn constant_channel_is_learnable() {
        let set = constant_set(0.7, 8, 3);
        let config = PredictorConfig {
            lr: 0.1,
            epochs: 200,
            hidden: 6,
            rng_seed: 1,
        };
        let model = train_predictor(&set, &config).unwrap();
        let history = [0.7; 8];
        for ch in [0usize, 30, 60, 70] {
            let loss = sequence_loss(&model.cells[ch], &history);
            assert!(loss < 1e-4, "channel {ch} mse {loss}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let set = synth_sample_set(ChannelKind::Vector, 8, 1, None, 2);
        let config = PredictorConfig {
            lr: 0.05,
            epochs: 3,
            hidden: 4,
            rng_seed: 9,
        };
        let a = train_predictor(&set, &config).unwrap();
        let b = train_predictor(&set, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn influence_factors_sum_to_one() {
        let factors = InfluenceFactors::new();
        for ch in 0..CHANNEL_COUNT {
            let total: f64 = factors.sources(ch).iter().map(|(_, b)| b).sum();
            assert!((total - 1.0).abs() < 1e-12, "channel {ch} sums to {total}");
        }
        // A four-member class: 0.5 for the target, 0.5/3 for the rest.
        assert_eq!(influence_factor(4, 2, 2), 0.5);
        assert!((influence_factor(4, 2, 0) - 0.5 / 3.0).abs() < 1e-15);
        // Single-member class.
        assert_eq!(influence_factor(1, 0, 0), 1.0);
    }

    #[test]
    fn class_fuse_matches_weighted_form() {
        let model = PredictorModel {
            hidden: 2,
            cells: (0..CHANNEL_COUNT).map(|_| GruCell::zeros(2)).collect(),
            w_fuse: [1.0, 0.7, 1.0, 1.0, 1.0, 2.0],
        };
        // Single-member class F: fused = sigmoid(w * 1.0 * y).
        let y = 0.42;
        let fused = model
            .class_fuse(&[(KeypointId::ELBOW, y)], KeypointId::ELBOW)
            .unwrap();
        assert!((fused - sigmoid(2.0 * y)).abs() < 1e-15);

        // Four equal predictions collapse to the shared value (weights sum
        // to 1).
        let class_b: Vec<(KeypointId, f64)> = (0..4)
            .map(|i| (KeypointId::new(HandClass::B, i).unwrap(), 0.3))
            .collect();
        let target = KeypointId::new(HandClass::B, 1).unwrap();
        let fused = model.class_fuse(&class_b, target).unwrap();
        assert!((fused - sigmoid(0.7 * 0.3)).abs() < 1e-15);

        // A missing member is an error.
        let partial = &class_b[..3];
        assert_eq!(
            model.class_fuse(partial, target),
            Err(PredictorError::MissingSource(
                KeypointId::new(HandClass::B, 3).unwrap()
            ))
        );
    }

    fn hold_trained_model() -> PredictorModel {
        let jitter = NoiseSpec::new(0.02).unwrap();
        let mut set = SampleSet::new(ChannelKind::Vector, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let frames = crate::datagen::registry::synth_gesture(
                Gesture::Hold,
                12,
                rng.random(),
                Some(&jitter),
            )
            .unwrap();
            set.push(crate::datagen::Sample {
                label: Gesture::Hold,
                frames: crate::hand::delta_sequence(&frames),
            })
            .unwrap();
        }
        train_predictor(
            &set,
            &PredictorConfig {
                lr: 0.08,
                epochs: 80,
                hidden: 6,
                rng_seed: 4,
            },
        )
        .unwrap()
    }

    #[test]
    fn infill_passes_through_fully_observed_frames() {
        let model = hold_trained_model();
        let mut frames: Vec<ObservedDelta> = (0..6)
            .map(|_| ObservedDelta::fully_observed(&DeltaFrame::ZERO))
            .collect();
        let before = frames.clone();
        model.infill_sequence(&mut frames);
        assert_eq!(frames, before);
    }

    #[test]
    fn infill_recovers_static_dynamics_and_respects_confidence() {
        let model = hold_trained_model();
        let jitter = NoiseSpec::new(0.02).unwrap();
        let hand =
            crate::datagen::registry::synth_gesture(Gesture::Hold, 12, 77, Some(&jitter)).unwrap();
        let mut frames: Vec<ObservedDelta> = crate::hand::delta_sequence(&hand)
            .iter()
            .map(ObservedDelta::fully_observed)
            .collect();
        let target = KeypointId::new(HandClass::C, 1).unwrap();
        frames[6].occlude_keypoint(target);
        let observed_before = frames[6].clone();
        model.infill_sequence(&mut frames);
        for axis in 0..3 {
            let ch = vector_channel(target, axis).unwrap();
            // Static gesture: the infilled delta sits near zero.
            assert!(
                frames[6].channels[ch].abs() < 0.1,
                "axis {axis}: {}",
                frames[6].channels[ch]
            );
            assert_eq!(frames[6].conf[ch], 0.5);
        }
        // Channels that were observed are untouched.
        for ch in 0..CHANNEL_COUNT {
            if observed_before.conf[ch] > 0.0 {
                assert_eq!(frames[6].channels[ch], observed_before.channels[ch]);
                assert_eq!(frames[6].conf[ch], observed_before.conf[ch]);
            }
        }
        // The keypoint record still says "was occluded".
        assert_eq!(frames[6].kp_conf[target.ordinal()], 0.0);
    }

    #[test]
    fn incremental_infill_matches_from_scratch() {
        let model = hold_trained_model();
        let jitter = NoiseSpec::new(0.05).unwrap();
        let hand =
            crate::datagen::registry::synth_gesture(Gesture::Click, 12, 5, Some(&jitter)).unwrap();
        let build = || -> Vec<ObservedDelta> {
            let mut frames: Vec<ObservedDelta> = crate::hand::delta_sequence(&hand)
                .iter()
                .map(ObservedDelta::fully_observed)
                .collect();
            for kp in KeypointId::all() {
                frames[3].occlude_keypoint(kp);
                frames[7].occlude_keypoint(kp);
            }
            frames
        };
        let mut incremental = build();
        model.infill_sequence(&mut incremental);
        let mut stepwise = build();
        for t in 0..stepwise.len() {
            model.infill_frame(&mut stepwise, t);
        }
        for (a, b) in incremental.iter().zip(&stepwise) {
            for ch in 0..CHANNEL_COUNT {
                assert!(
                    (a.channels[ch] - b.channels[ch]).abs() < 1e-12,
                    "channel {ch}"
                );
                assert_eq!(a.conf[ch], b.conf[ch]);
            }
        }
    }

    #[test]
    fn infill_missing_returns_target_channels() {
        let model = hold_trained_model();
        let mut frames: Vec<ObservedDelta> = (0..5)
            .map(|_| ObservedDelta::fully_observed(&DeltaFrame::ZERO))
            .collect();
        let target = KeypointId::new(HandClass::D, 0).unwrap();
        frames[4].occlude_keypoint(target);
        let out = model.infill_missing(&frames, target, 4).unwrap();
        for v in out {
            assert!(v.abs() < 0.1);
        }
        // Observed keypoint: pass-through of the stored values.
        let other = KeypointId::new(HandClass::B, 0).unwrap();
        let out = model.infill_missing(&frames, other, 4).unwrap();
        for (axis, v) in out.iter().enumerate() {
            let ch = vector_channel(other, axis).unwrap();
            assert_eq!(*v, frames[4].channels[ch]);
        }
        assert_eq!(model.infill_missing(&frames, KeypointId::ELBOW, 4), None);
    }
}
