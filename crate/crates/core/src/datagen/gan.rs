//! Adversarial amplification of seed gesture sequences: a single-layer
//! recurrent generator fed with perturbed seed samples against a one-layer
//! logistic discriminator over the flattened sequence, trained with
//! alternating SGD on the standard minimax losses.

use super::{NoiseSpec, Sample, SampleSet};
use crate::channels::ChannelKind;
use crate::matrix::{axpy, dot, sigmoid, Matrix};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discriminator outputs are clamped into [EPSILON, 1 - EPSILON] so the log
/// losses stay finite.
pub const EPSILON: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum GanError {
    #[error("seed sample set is empty")]
    EmptySeeds,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },
}

/// One sequence in mode-channel space: frames x frame_dim.
pub type Seq = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub w_in: Matrix,
    pub w_hh: Matrix,
    pub w_out: Matrix,
    pub b_hidden: Vec<f64>,
    pub b_out: Vec<f64>,
}

/// Affine map over the flattened sequence (frame-major) plus a logistic
/// output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discriminator {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanModel {
    pub mode: ChannelKind,
    pub seq_len: usize,
    pub frame_dim: usize,
    pub hidden: usize,
    pub generator: Generator,
    pub discriminator: Discriminator,
}

#[derive(Debug, Clone)]
pub struct GanTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub hidden: usize,
    pub batch_size: usize,
    pub rng_seed: u64,
}

impl Default for GanTrainConfig {
    fn default() -> Self {
        GanTrainConfig {
            epochs: 50,
            lr: 1e-3,
            hidden: 32,
            batch_size: 8,
            rng_seed: 0,
        }
    }
}

impl GanModel {
    /// Runs the generator over an input sequence; one output frame per input
    /// frame, linear output head.
    pub fn generate(&self, inputs: &Seq) -> Seq {
        self.generator_forward(inputs).0
    }

    fn generator_forward(&self, inputs: &Seq) -> (Seq, Vec<Vec<f64>>) {
        let g = &self.generator;
        let mut h = vec![0.0; self.hidden];
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut hiddens = Vec::with_capacity(inputs.len());
        for x in inputs {
            let mut a = g.w_in.matvec(x);
            axpy(&mut a, 1.0, &g.w_hh.matvec(&h));
            axpy(&mut a, 1.0, &g.b_hidden);
            h = a.iter().map(|v| v.tanh()).collect();
            let mut o = g.w_out.matvec(&h);
            axpy(&mut o, 1.0, &g.b_out);
            outputs.push(o);
            hiddens.push(h.clone());
        }
        (outputs, hiddens)
    }

    /// Discriminator belief that a sequence is real, clamped into (0, 1).
    pub fn discriminate(&self, seq: &Seq) -> f64 {
        let d = &self.discriminator;
        let mut s = d.bias;
        for (t, frame) in seq.iter().enumerate() {
            s += dot(
                &d.weights[t * self.frame_dim..(t + 1) * self.frame_dim],
                frame,
            );
        }
        sigmoid(s).clamp(EPSILON, 1.0 - EPSILON)
    }
}

/// The discriminator objective: mean log D(real) plus mean log(1 - D(G(noise))).
/// The discriminator is trained to maximize this.
pub fn discriminator_loss(model: &GanModel, real: &[Seq], fake_inputs: &[Seq]) -> f64 {
    let real_term =
        real.iter().map(|x| model.discriminate(x).ln()).sum::<f64>() / real.len() as f64;
    let fake_term = fake_inputs
        .iter()
        .map(|z| (1.0 - model.discriminate(&model.generate(z))).ln())
        .sum::<f64>()
        / fake_inputs.len() as f64;
    real_term + fake_term
}

/// The generator objective, minimized during training:
/// mean log(1 - D(G(noise))).
pub fn generator_loss(model: &GanModel, fake_inputs: &[Seq]) -> f64 {
    fake_inputs
        .iter()
        .map(|z| (1.0 - model.discriminate(&model.generate(z))).ln())
        .sum::<f64>()
        / fake_inputs.len() as f64
}

fn flatten_seq(seq: &Seq) -> Vec<f64> {
    seq.iter().flatten().copied().collect()
}

/// d/ds of log(sigmoid(s)) under clamping: zero where the clamp is active.
fn dlog_d(sig: f64) -> f64 {
    if sig <= EPSILON || sig >= 1.0 - EPSILON {
        0.0
    } else {
        1.0 - sig
    }
}

/// d/ds of log(1 - sigmoid(s)) under clamping.
fn dlog_one_minus_d(sig: f64) -> f64 {
    if sig <= EPSILON || sig >= 1.0 - EPSILON {
        0.0
    } else {
        -sig
    }
}

/// Gradient of [`discriminator_loss`] in the discriminator parameters,
/// returned as (d_weights, d_bias, loss).
pub fn discriminator_gradients(
    model: &GanModel,
    real: &[Seq],
    fake_inputs: &[Seq],
) -> (Vec<f64>, f64, f64) {
    let mut dw = vec![0.0; model.discriminator.weights.len()];
    let mut db = 0.0;
    let mut loss = 0.0;
    let rn = real.len() as f64;
    for x in real {
        let sig = model.discriminate(x);
        loss += sig.ln() / rn;
        let g = dlog_d(sig) / rn;
        axpy(&mut dw, g, &flatten_seq(x));
        db += g;
    }
    let fn_ = fake_inputs.len() as f64;
    for z in fake_inputs {
        let gen = model.generate(z);
        let sig = model.discriminate(&gen);
        loss += (1.0 - sig).ln() / fn_;
        let g = dlog_one_minus_d(sig) / fn_;
        axpy(&mut dw, g, &flatten_seq(&gen));
        db += g;
    }
    (dw, db, loss)
}

#[derive(Debug, Clone)]
pub struct GeneratorGradients {
    pub w_in: Matrix,
    pub w_hh: Matrix,
    pub w_out: Matrix,
    pub b_hidden: Vec<f64>,
    pub b_out: Vec<f64>,
}

/// Gradient of [`generator_loss`] in the generator parameters (for descent),
/// with the loss value. Backpropagation through time over the recurrence.
pub fn generator_gradients(model: &GanModel, fake_inputs: &[Seq]) -> (GeneratorGradients, f64) {
    let (h_dim, d_dim) = (model.hidden, model.frame_dim);
    let mut grads = GeneratorGradients {
        w_in: Matrix::zeros(h_dim, d_dim),
        w_hh: Matrix::zeros(h_dim, h_dim),
        w_out: Matrix::zeros(d_dim, h_dim),
        b_hidden: vec![0.0; h_dim],
        b_out: vec![0.0; d_dim],
    };
    let mut loss = 0.0;
    let n = fake_inputs.len() as f64;
    for z in fake_inputs {
        let (outputs, hiddens) = model.generator_forward(z);
        let sig = model.discriminate(&outputs);
        loss += (1.0 - sig).ln() / n;
        let ds = dlog_one_minus_d(sig) / n;
        // dL/do_t comes straight through the affine discriminator.
        let mut dh_next = vec![0.0; h_dim];
        for t in (0..z.len()).rev() {
            let dout: Vec<f64> = model.discriminator.weights[t * d_dim..(t + 1) * d_dim]
                .iter()
                .map(|w| ds * w)
                .collect();
            grads.w_out.add_outer(&dout, &hiddens[t], 1.0);
            axpy(&mut grads.b_out, 1.0, &dout);
            let mut dh = model.generator.w_out.tr_matvec(&dout);
            axpy(&mut dh, 1.0, &dh_next);
            let da: Vec<f64> = dh
                .iter()
                .zip(&hiddens[t])
                .map(|(d, h)| d * (1.0 - h * h))
                .collect();
            grads.w_in.add_outer(&da, &z[t], 1.0);
            if t > 0 {
                grads.w_hh.add_outer(&da, &hiddens[t - 1], 1.0);
            }
            axpy(&mut grads.b_hidden, 1.0, &da);
            dh_next = model.generator.w_hh.tr_matvec(&da);
        }
    }
    (grads, loss)
}

fn perturb_rows<R: Rng>(rows: &[Vec<f64>], amplitude: f64, rng: &mut R) -> Seq {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|v| v + rng.random_range(-amplitude..=amplitude))
                .collect()
        })
        .collect()
}

fn init_model<R: Rng>(
    mode: ChannelKind,
    seq_len: usize,
    frame_dim: usize,
    hidden: usize,
    rng: &mut R,
) -> GanModel {
    let s_in = 0.5 / (frame_dim as f64).sqrt();
    let s_h = 0.5 / (hidden as f64).sqrt();
    let s_d = 0.5 / ((seq_len * frame_dim) as f64).sqrt();
    GanModel {
        mode,
        seq_len,
        frame_dim,
        hidden,
        generator: Generator {
            w_in: Matrix::random(hidden, frame_dim, s_in, rng),
            w_hh: Matrix::random(hidden, hidden, s_h, rng),
            w_out: Matrix::random(frame_dim, hidden, s_h, rng),
            b_hidden: vec![0.0; hidden],
            b_out: vec![0.0; frame_dim],
        },
        discriminator: Discriminator {
            weights: (0..seq_len * frame_dim)
                .map(|_| rng.random_range(-s_d..=s_d))
                .collect(),
            bias: 0.0,
        },
    }
}

/// Alternating minimax training: one discriminator ascent step and one
/// generator descent step per batch. Deterministic in the seed.
pub fn gan_train(
    seeds: &SampleSet,
    spec: &NoiseSpec,
    config: &GanTrainConfig,
) -> Result<GanModel, GanError> {
    if seeds.is_empty() {
        return Err(GanError::EmptySeeds);
    }
    if config.epochs == 0 {
        return Err(GanError::BadConfig("epochs must be >= 1".into()));
    }
    if config.lr <= 0.0 || config.lr.is_nan() {
        return Err(GanError::BadConfig("lr must be positive".into()));
    }
    if config.hidden == 0 || config.batch_size == 0 {
        return Err(GanError::BadConfig(
            "hidden and batch_size must be >= 1".into(),
        ));
    }

    let rows: Vec<Seq> = seeds.samples().iter().map(|s| seeds.mode_rows(s)).collect();
    let frame_dim = seeds.mode.channel_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut model = init_model(
        seeds.mode,
        seeds.seq_len(),
        frame_dim,
        config.hidden,
        &mut rng,
    );

    let mut order: Vec<usize> = (0..rows.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let real: Vec<Seq> = chunk.iter().map(|&i| rows[i].clone()).collect();
            let fake: Vec<Seq> = chunk
                .iter()
                .map(|&i| perturb_rows(&rows[i], spec.amplitude(), &mut rng))
                .collect();
            let (dw, db, d_loss) = discriminator_gradients(&model, &real, &fake);
            if !d_loss.is_finite() {
                return Err(GanError::Divergence { epoch });
            }
            axpy(&mut model.discriminator.weights, config.lr, &dw);
            model.discriminator.bias += config.lr * db;

            let fresh: Vec<Seq> = chunk
                .iter()
                .map(|&i| perturb_rows(&rows[i], spec.amplitude(), &mut rng))
                .collect();
            let (gg, g_loss) = generator_gradients(&model, &fresh);
            if !g_loss.is_finite() {
                return Err(GanError::Divergence { epoch });
            }
            let g = &mut model.generator;
            g.w_in.add_scaled(&gg.w_in, -config.lr);
            g.w_hh.add_scaled(&gg.w_hh, -config.lr);
            g.w_out.add_scaled(&gg.w_out, -config.lr);
            axpy(&mut g.b_hidden, -config.lr, &gg.b_hidden);
            axpy(&mut g.b_out, -config.lr, &gg.b_out);
            if !g.w_in.is_finite() || !g.w_hh.is_finite() || !g.w_out.is_finite() {
                return Err(GanError::Divergence { epoch });
            }
        }
    }
    Ok(model)
}

/// Draws `n` generated sequences: each perturbs a randomly chosen seed
/// sample, runs the generator on the mode channels and inherits the seed's
/// label and off-mode channels.
pub fn gan_sample(
    model: &GanModel,
    seeds: &SampleSet,
    spec: &NoiseSpec,
    n: usize,
    rng_seed: u64,
) -> Result<SampleSet, GanError> {
    if seeds.is_empty() {
        return Err(GanError::EmptySeeds);
    }
    if n == 0 {
        return Err(GanError::BadConfig("n must be >= 1".into()));
    }
    let rows: Vec<Seq> = seeds.samples().iter().map(|s| seeds.mode_rows(s)).collect();
    let range = model.mode.channel_range();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = SampleSet::new(model.mode, seeds.seq_len());
    for _ in 0..n {
        let idx = rng.random_range(0..rows.len());
        let noise = perturb_rows(&rows[idx], spec.amplitude(), &mut rng);
        let generated = model.generate(&noise);
        let seed_sample = &seeds.samples()[idx];
        let frames: Vec<crate::hand::DeltaFrame> = seed_sample
            .frames
            .iter()
            .zip(&generated)
            .map(|(frame, gen_row)| {
                let mut flat = crate::channels::flatten_delta(frame);
                flat[range.clone()].copy_from_slice(gen_row);
                crate::channels::unflatten_delta(&flat)
            })
            .collect();
        out.push(Sample {
            label: seed_sample.label,
            frames,
        })
        .map_err(|e| GanError::BadConfig(e.to_string()))?;
    }
    Ok(out)
}
