//! Dataset validation: one pass of nearest-center relabeling over the
//! flattened sequences, with incremental running-mean center updates.

use super::SampleSet;
use crate::gesture::{Gesture, ALL_GESTURES, GESTURE_COUNT};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ValidateError {
    #[error("gesture {0} has no samples at initialization")]
    EmptyClass(Gesture),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelabelChange {
    pub sample_index: usize,
    pub from: Gesture,
    pub to: Gesture,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelabelReport {
    pub changes: Vec<RelabelChange>,
}

impl RelabelReport {
    pub fn total(&self) -> usize {
        self.changes.len()
    }

    /// Relabels away from each gesture, in registry order.
    pub fn counts_from(&self) -> [usize; GESTURE_COUNT] {
        let mut out = [0; GESTURE_COUNT];
        for c in &self.changes {
            out[c.from.ordinal()] += 1;
        }
        out
    }

    pub fn counts_to(&self) -> [usize; GESTURE_COUNT] {
        let mut out = [0; GESTURE_COUNT];
        for c in &self.changes {
            out[c.to.ordinal()] += 1;
        }
        out
    }
}

fn flatten_mode(set: &SampleSet, sample: &super::Sample) -> Vec<f64> {
    set.mode_rows(sample).into_iter().flatten().collect()
}

fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One validation pass. Centers start as per-label means over the flattened
/// mode channels; each sample in stored order is relabeled to its nearest
/// center, with both affected centers updated as running means. Sequence
/// values are never touched, only labels.
pub fn validate_dataset(set: &SampleSet) -> Result<(SampleSet, RelabelReport), ValidateError> {
    let flat: Vec<Vec<f64>> = set.samples().iter().map(|s| flatten_mode(set, s)).collect();
    let dim = flat.first().map_or(0, |f| f.len());

    let mut centers = vec![vec![0.0; dim]; GESTURE_COUNT];
    let mut counts = [0usize; GESTURE_COUNT];
    for (sample, row) in set.samples().iter().zip(&flat) {
        let g = sample.label.ordinal();
        counts[g] += 1;
        for (c, v) in centers[g].iter_mut().zip(row) {
            *c += v;
        }
    }
    for (&gesture, (center, &count)) in ALL_GESTURES
        .iter()
        .zip(centers.iter_mut().zip(counts.iter()))
    {
        if count == 0 {
            return Err(ValidateError::EmptyClass(gesture));
        }
        for c in center.iter_mut() {
            *c /= count as f64;
        }
    }

    let mut out = SampleSet::new(set.mode, set.seq_len());
    let mut report = RelabelReport::default();
    for (index, (sample, row)) in set.samples().iter().zip(&flat).enumerate() {
        let current = sample.label.ordinal();
        let mut nearest = 0usize;
        let mut best = f64::INFINITY;
        for (g, center) in centers.iter().enumerate() {
            let d = distance_sq(row, center);
            if d < best {
                best = d;
                nearest = g;
            }
        }
        let mut relabeled = sample.clone();
        if nearest != current {
            relabeled.label = ALL_GESTURES[nearest];
            report.changes.push(RelabelChange {
                sample_index: index,
                from: sample.label,
                to: relabeled.label,
            });
            // Running-mean updates of the two affected centers.
            if counts[current] > 1 {
                let n = counts[current] as f64;
                for (c, v) in centers[current].iter_mut().zip(row) {
                    *c = (*c * n - v) / (n - 1.0);
                }
            }
            counts[current] -= 1;
            let n = counts[nearest] as f64;
            for (c, v) in centers[nearest].iter_mut().zip(row) {
                *c = (*c * n + v) / (n + 1.0);
            }
            counts[nearest] += 1;
        }
        out.push(relabeled).expect("lengths preserved");
    }
    Ok((out, report))
}
