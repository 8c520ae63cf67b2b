//! Objective normalization, augmented Tchebycheff scalarization and the
//! per-iteration weight schedule.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::domain::{ObjectiveVector, Outcome, ReplicatedObservation};
use crate::math::{mean, sample_variance};
use crate::seeds::{self, Stream};
use crate::{Error, Result};

pub const DEFAULT_RHO: f64 = 0.05;

/// Size of the evenly spaced two-objective weight grid `{(l/10, 1-l/10)}`.
pub const WEIGHT_GRID: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("weights must be non-negative and finite"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(alloc::format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-objective min and max of the observed sample means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl NormalizationBounds {
    pub fn from_means<'a>(means: impl IntoIterator<Item = &'a ObjectiveVector>) -> Option<Self> {
        let mut it = means.into_iter();
        let first = it.next()?.as_array();
        let mut b = Self { min: first, max: first };
        for m in it {
            for (j, v) in m.as_array().into_iter().enumerate() {
                b.min[j] = b.min[j].min(v);
                b.max[j] = b.max[j].max(v);
            }
        }
        Some(b)
    }

    pub fn from_observations(observations: &[ReplicatedObservation]) -> Option<Self> {
        Self::from_means(observations.iter().map(|o| &o.mean_objectives))
    }
}

/// `(v - min) / (max - min)` per objective; 0.5 on a degenerate range.
pub fn normalize(values: &ObjectiveVector, bounds: &NormalizationBounds) -> [f64; 2] {
    let v = values.as_array();
    core::array::from_fn(|j| {
        let span = bounds.max[j] - bounds.min[j];
        if span > 0.0 {
            (v[j] - bounds.min[j]) / span
        } else {
            0.5
        }
    })
}

/// `max_j λ_j f_j + ρ Σ_j λ_j f_j`.
pub fn tchebycheff(f: &[f64], weights: &WeightVector, rho: f64) -> Result<f64> {
    let lambda = weights.as_slice();
    if f.len() != lambda.len() {
        return Err(Error::domain(alloc::format!(
            "{} objective values for {} weights",
            f.len(),
            lambda.len()
        )));
    }
    if !(rho >= 0.0) {
        return Err(Error::domain("rho must be non-negative"));
    }
    let terms = f.iter().zip(lambda).map(|(v, l)| v * l);
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    Ok(max + rho * terms.sum::<f64>())
}

/// Weight vector for 1-based `iteration`: the 11-point grid is visited
/// without replacement, reshuffled (seeded) for every full cycle.
pub fn next_weights(iteration: usize, seed: u64) -> WeightVector {
    let iteration = iteration.max(1);
    let cycle = ((iteration - 1) / WEIGHT_GRID) as u64;
    let position = (iteration - 1) % WEIGHT_GRID;
    let mut order: Vec<usize> = (0..WEIGHT_GRID).collect();
    order.shuffle(&mut seeds::rng(seed, Stream::Weights, cycle));
    let l = order[position] as f64 / 10.0;
    WeightVector(alloc::vec![l, 1.0 - l])
}

/// Scalarizes a single replication.
pub fn scalarize_outcome(outcome: &Outcome, weights: &WeightVector, rho: f64, bounds: &NormalizationBounds) -> f64 {
    let f = normalize(&ObjectiveVector::from_outcome(outcome), bounds);
    // lengths always agree for the two-objective problem
    tchebycheff(&f, weights, rho).unwrap_or(f64::NAN)
}

/// Sample mean of the per-replication scalars and the variance of that
/// mean (sample variance / r, 0 when r = 1).
pub fn scalarize_observation(
    obs: &ReplicatedObservation,
    weights: &WeightVector,
    rho: f64,
    bounds: &NormalizationBounds,
) -> (f64, f64) {
    let values: Vec<f64> = obs
        .outcomes
        .iter()
        .map(|o| scalarize_outcome(o, weights, rho, bounds))
        .collect();
    (mean(&values), sample_variance(&values) / values.len() as f64)
}
