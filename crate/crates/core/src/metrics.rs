//! Front quality indicators, reference fronts and input distributions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::doe::halton;
use crate::domain::{pareto_filter, Configuration, DesignSpace, ObjectiveVector, ReplicatedObservation, VariableKind};
use crate::math::{floor, mean, sqrt};
use crate::simulator::{Simulator, SimulatorSettings};
use crate::{Error, Result};

/// Reference point `(cost, -strength)` for hypervolume.
pub const DEFAULT_REFERENCE_POINT: ObjectiveVector = ObjectiveVector { pc: 3.0, neg_ts: -4.0 };

pub const HISTOGRAM_BINS: usize = 20;

/// Exact 2-D hypervolume dominated by `front` and bounded by `reference`.
/// Points that do not strictly dominate the reference are ignored.
pub fn hypervolume(front: &[ObjectiveVector], reference: &ObjectiveVector) -> f64 {
    let mut pts: Vec<[f64; 2]> = front
        .iter()
        .filter(|p| p.pc < reference.pc && p.neg_ts < reference.neg_ts)
        .map(ObjectiveVector::as_array)
        .collect();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap_or(Ordering::Equal)
            .then(a[1].partial_cmp(&b[1]).unwrap_or(Ordering::Equal))
    });
    let mut level = reference.neg_ts;
    let mut volume = 0.0;
    for p in pts {
        if p[1] < level {
            volume += (reference.pc - p[0]) * (level - p[1]);
            level = p[1];
        }
    }
    volume
}

/// Dominance-aware distance from front point `a` to reference point `z`.
pub fn d_plus(a: &ObjectiveVector, z: &ObjectiveVector) -> f64 {
    let dx = (a.pc - z.pc).max(0.0);
    let dy = (a.neg_ts - z.neg_ts).max(0.0);
    sqrt(dx * dx + dy * dy)
}

/// Mean over the reference front of the smallest [`d_plus`] to `front`.
/// An empty `front` yields `+inf`.
pub fn igd_plus(front: &[ObjectiveVector], reference_front: &[ObjectiveVector]) -> Result<f64> {
    if reference_front.is_empty() {
        return Err(Error::domain("IGD+ needs a non-empty reference front"));
    }
    if front.is_empty() {
        return Ok(f64::INFINITY);
    }
    let total: f64 = reference_front
        .iter()
        .map(|z| front.iter().map(|a| d_plus(a, z)).fold(f64::INFINITY, f64::min))
        .sum();
    Ok(total / reference_front.len() as f64)
}

/// Linear-interpolation percentile (`q` in [0, 1]) of unsorted data.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = floor(h) as usize;
    let hi = (lo + 1).min(v.len() - 1);
    Some(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

/// 25th, 50th and 75th percentiles.
pub fn quartiles(values: &[f64]) -> Option<[f64; 3]> {
    Some([percentile(values, 0.25)?, percentile(values, 0.5)?, percentile(values, 0.75)?])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub config: Configuration,
    pub objectives: ObjectiveVector,
    pub pf: f64,
}

/// Non-dominated, majority-feasible observations with their indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub points: Vec<FrontPoint>,
    pub hv: f64,
    pub igd_plus: Option<f64>,
    /// Per-variable 25/50/75 percentiles of the front configurations;
    /// empty when the front is empty.
    pub input_percentiles: Vec<[f64; 3]>,
}

impl FrontReport {
    pub fn from_observations(
        observations: &[ReplicatedObservation],
        reference_point: &ObjectiveVector,
        reference_front: Option<&[ObjectiveVector]>,
    ) -> Self {
        let feasible: Vec<&ReplicatedObservation> = observations.iter().filter(|o| o.majority_feasible).collect();
        let means: Vec<ObjectiveVector> = feasible.iter().map(|o| o.mean_objectives).collect();
        let points: Vec<FrontPoint> = pareto_filter(&means)
            .into_iter()
            .map(|i| FrontPoint {
                config: feasible[i].config.clone(),
                objectives: feasible[i].mean_objectives,
                pf: feasible[i].pf,
            })
            .collect();
        Self::from_points(points, reference_point, reference_front)
    }

    /// Builds a report from points already known to be non-dominated.
    pub fn from_points(
        points: Vec<FrontPoint>,
        reference_point: &ObjectiveVector,
        reference_front: Option<&[ObjectiveVector]>,
    ) -> Self {
        let objectives = Self::objectives_of(&points);
        let hv = hypervolume(&objectives, reference_point);
        let igd_plus = reference_front
            .and_then(|r| igd_plus(&objectives, r).ok())
            .filter(|v| v.is_finite());
        let dim = points.first().map_or(0, |p| p.config.values().len());
        let input_percentiles = (0..dim)
            .filter_map(|k| quartiles(&points.iter().map(|p| p.config.values()[k]).collect::<Vec<_>>()))
            .collect();
        Self {
            points,
            hv,
            igd_plus,
            input_percentiles,
        }
    }

    fn objectives_of(points: &[FrontPoint]) -> Vec<ObjectiveVector> {
        points.iter().map(|p| p.objectives).collect()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        Self::objectives_of(&self.points)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// HV of the cumulative archive after each observation.
pub fn hv_history(observations: &[ReplicatedObservation], reference_point: &ObjectiveVector) -> Vec<f64> {
    (1..=observations.len())
        .map(|n| FrontReport::from_observations(&observations[..n], reference_point, None).hv)
        .collect()
}

/// Reference front from a Halton design evaluated without noise, `r`
/// replications per point, majority-feasible Pareto filter on the means.
pub fn reference_front(settings: &SimulatorSettings, n: usize, r: usize) -> Result<Vec<ObjectiveVector>> {
    if settings.gamma != 0.0 {
        return Err(Error::domain("reference fronts are computed without noise (gamma = 0)"));
    }
    let space = DesignSpace::bonding();
    let design = halton(n, &space, 0)?;
    let mut sim = Simulator::new(settings.clone())?;
    let mut means = Vec::new();
    for c in &design.points {
        let obs = ReplicatedObservation::new(c.clone(), sim.simulate(c, r)?)?;
        if obs.majority_feasible {
            means.push(obs.mean_objectives);
        }
    }
    Ok(pareto_filter(&means).into_iter().map(|i| means[i]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDistribution {
    pub id: String,
    pub percentiles: [f64; 3],
    /// Counts over equal-width bins spanning the variable range.
    pub histogram: Vec<usize>,
    /// Share of ones, for binary variables.
    pub binary_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InputDistribution {
    pub pooled: usize,
    pub variables: Vec<VariableDistribution>,
}

/// Pools the configurations of several fronts and summarizes each input.
pub fn input_distribution(space: &DesignSpace, fronts: &[FrontReport]) -> InputDistribution {
    let configs: Vec<&Configuration> = fronts.iter().flat_map(|f| f.points.iter().map(|p| &p.config)).collect();
    if configs.is_empty() {
        return InputDistribution::default();
    }
    let variables = space
        .variables()
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let values: Vec<f64> = configs.iter().map(|c| c.values()[k]).collect();
            let mut histogram = vec![0; HISTOGRAM_BINS];
            for v in &values {
                let u = (v - spec.lower) / spec.range();
                let bin = (floor(u * HISTOGRAM_BINS as f64).max(0.0) as usize).min(HISTOGRAM_BINS - 1);
                histogram[bin] += 1;
            }
            VariableDistribution {
                id: spec.id.clone(),
                percentiles: quartiles(&values).unwrap_or([f64::NAN; 3]),
                histogram,
                binary_fraction: (spec.kind == VariableKind::Binary).then(|| mean(&values)),
            }
        })
        .collect();
    InputDistribution {
        pooled: configs.len(),
        variables,
    }
}
