//! Global-best particle swarm maximizer on the unit hypercube.

use alloc::vec::Vec;

use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::seeds::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoSettings {
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub max_stall_iterations: usize,
    pub tolerance: f64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Maximum speed per dimension as a fraction of the (unit) range.
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for PsoSettings {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            max_iterations: 1800,
            max_stall_iterations: 10,
            tolerance: 1e-6,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            velocity_clamp: 0.2,
            seed: 0,
        }
    }
}

impl PsoSettings {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::domain("swarm size must be at least 2"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("swarm tolerance must be positive"));
        }
        if !(self.velocity_clamp > 0.0) {
            return Err(Error::domain("velocity clamp must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    pub iterations: usize,
    /// Objective values of the initial swarm, in particle order.
    pub initial_values: Vec<f64>,
}

fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximizes `objective` over `[0, 1]^dim`.
///
/// Stops after `max_iterations`, or once the global best has improved by
/// less than `tolerance` in `max_stall_iterations` consecutive iterations.
/// Non-finite objective values count as `-inf`. The global best is updated
/// in particle-index order, so the result depends only on the seed.
pub fn pso_maximize(mut objective: impl FnMut(&[f64]) -> f64, dim: usize, settings: &PsoSettings) -> Result<PsoResult> {
    settings.validate()?;
    if dim == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let mut rng = Rng::seed_from_u64(settings.seed);
    let vmax = settings.velocity_clamp;
    let n = settings.swarm_size;

    let mut positions: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let mut velocities: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| vmax * (2.0 * rng.random::<f64>() - 1.0)).collect())
        .collect();
    let initial_values: Vec<f64> = positions.iter().map(|p| sanitize(objective(p))).collect();
    let mut personal_best = positions.clone();
    let mut personal_value = initial_values.clone();

    let mut best_index = 0;
    for i in 1..n {
        if personal_value[i] > personal_value[best_index] {
            best_index = i;
        }
    }
    let mut global_best = personal_best[best_index].clone();
    let mut global_value = personal_value[best_index];

    let mut stall = 0;
    let mut iterations = 0;
    while iterations < settings.max_iterations && stall < settings.max_stall_iterations {
        iterations += 1;
        let previous = global_value;
        for i in 0..n {
            for k in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = settings.inertia * velocities[i][k]
                    + settings.cognitive * r1 * (personal_best[i][k] - positions[i][k])
                    + settings.social * r2 * (global_best[k] - positions[i][k]);
                let v = v.max(-vmax).min(vmax);
                let mut x = positions[i][k] + v;
                let mut v = v;
                if x < 0.0 {
                    x = 0.0;
                    v = 0.0;
                } else if x > 1.0 {
                    x = 1.0;
                    v = 0.0;
                }
                positions[i][k] = x;
                velocities[i][k] = v;
            }
            let value = sanitize(objective(&positions[i]));
            if value > personal_value[i] {
                personal_value[i] = value;
                personal_best[i].clone_from(&positions[i]);
                if value > global_value {
                    global_value = value;
                    global_best.clone_from(&positions[i]);
                }
            }
        }
        let improvement = global_value - previous;
        if improvement.is_nan() || improvement < settings.tolerance {
            stall += 1;
        } else {
            stall = 0;
        }
    }

    Ok(PsoResult {
        best_position: global_best,
        best_value: global_value,
        iterations,
        initial_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_one_dimensional_optimum() {
        let s = PsoSettings { seed: 3, ..Default::default() };
        let r = pso_maximize(|x| -(x[0] - 0.3) * (x[0] - 0.3), 1, &s).unwrap();
        assert!((r.best_position[0] - 0.3).abs() < 1e-3, "{:?}", r.best_position);
    }

    #[test]
    fn finds_center_in_six_dimensions() {
        for seed in 0..5 {
            let s = PsoSettings { seed, ..Default::default() };
            let r = pso_maximize(|x| -x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>(), 6, &s).unwrap();
            assert!(r.best_position.iter().all(|v| (v - 0.5).abs() < 1e-2), "{:?}", r.best_position);
        }
    }

    #[test]
    fn constant_objective_stalls() {
        let s = PsoSettings::default();
        let r = pso_maximize(|_| 1.0, 4, &s).unwrap();
        assert_eq!(r.iterations, s.max_stall_iterations);
        assert!(r.best_position.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn best_beats_initial_swarm_and_rejects_nan() {
        let s = PsoSettings { seed: 11, ..Default::default() };
        let r = pso_maximize(|x| if x[0] > 0.8 { f64::NAN } else { x[0] + x[1] }, 2, &s).unwrap();
        assert!(r.best_value.is_finite());
        assert!(r.best_position[0] <= 0.8);
        assert!(r.initial_values.iter().all(|v| r.best_value >= *v));
    }

    #[test]
    fn deterministic_given_seed() {
        let s = PsoSettings { seed: 5, ..Default::default() };
        let f = |x: &[f64]| -(x[0] - 0.7).abs() - (x[1] - 0.2).abs();
        assert_eq!(pso_maximize(f, 2, &s).unwrap(), pso_maximize(f, 2, &s).unwrap());
    }

    #[test]
    fn validates_settings() {
        let s = PsoSettings { swarm_size: 1, ..Default::default() };
        assert!(pso_maximize(|_| 0.0, 1, &s).is_err());
        let s = PsoSettings { tolerance: 0.0, ..Default::default() };
        assert!(pso_maximize(|_| 0.0, 1, &s).is_err());
    }
}
