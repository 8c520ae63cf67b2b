//! Logistic-regression feasibility classifier.
//!
//! Fitted by Newton–Raphson (IRLS) on the ridge-penalized Bernoulli log
//! likelihood with step halving, so the penalized likelihood never
//! decreases between iterations. The intercept is not penalized.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::{feasibility_fraction, Outcome};
use crate::linalg::{Cholesky, Matrix};
use crate::math::{exp, ln, sqrt};
use crate::{Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-3;
const MAX_ITERATIONS: usize = 200;
const GRADIENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl LrModel {
    pub fn linear_term(&self, x: &[f64]) -> f64 {
        self.beta0 + self.beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    /// Probability of the feasible class.
    pub fn predict_pf(&self, x: &[f64]) -> f64 {
        logistic(self.linear_term(x))
    }
}

#[inline]
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + exp(-t))
    } else {
        let e = exp(t);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + ln(1.0 + exp(-t))
    } else {
        ln(1.0 + exp(t))
    }
}

/// 1 when at least half of the replications are feasible.
pub fn majority_label(outcomes: &[Outcome]) -> Result<u8> {
    if outcomes.is_empty() {
        return Err(Error::domain("majority label of an empty outcome list"));
    }
    Ok(u8::from(feasibility_fraction(outcomes) >= 0.5))
}

/// Penalized log likelihood `Σ [y t - ln(1+eᵗ)] - reg ‖β‖²`.
pub fn penalized_log_likelihood(inputs: &[Vec<f64>], labels: &[u8], reg: f64, beta0: f64, beta: &[f64]) -> f64 {
    let model = LrModel {
        beta0,
        beta: beta.to_vec(),
        converged: false,
        iterations_used: 0,
    };
    let ll: f64 = inputs
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let t = model.linear_term(x);
            f64::from(y) * t - softplus(t)
        })
        .sum();
    ll - reg * beta.iter().map(|b| b * b).sum::<f64>()
}

pub fn fit_lr(inputs: &[Vec<f64>], labels: &[u8], reg: f64) -> Result<LrModel> {
    fit_lr_traced(inputs, labels, reg).map(|(m, _)| m)
}

/// Like [`fit_lr`], also returning the penalized log likelihood after every
/// accepted iteration (first entry is the starting point).
pub fn fit_lr_traced(inputs: &[Vec<f64>], labels: &[u8], reg: f64) -> Result<(LrModel, Vec<f64>)> {
    if inputs.is_empty() || inputs.len() != labels.len() {
        return Err(Error::domain("need at least one sample and one label per sample"));
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::domain("labels must be 0 or 1"));
    }
    if !(reg >= 0.0) || !reg.is_finite() {
        return Err(Error::domain("ridge weight must be finite and non-negative"));
    }
    let d = inputs[0].len();
    if d == 0 || inputs.iter().any(|x| x.len() != d || x.iter().any(|v| !v.is_finite())) {
        return Err(Error::domain("inputs must share a non-zero dimension and be finite"));
    }
    let p = d + 1;
    // coefficient vector w = [beta0, beta...]
    let mut w = vec![0.0; p];
    let objective = |w: &[f64]| penalized_log_likelihood(inputs, labels, reg, w[0], &w[1..]);
    let mut current = objective(&w);
    let mut trace = vec![current];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        let mut grad = vec![0.0; p];
        let mut hess = Matrix::zeros(p);
        for (x, &y) in inputs.iter().zip(labels) {
            let t = w[0] + w[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
            let mu = logistic(t);
            let weight = mu * (1.0 - mu);
            let resid = f64::from(y) - mu;
            let row = |k: usize| if k == 0 { 1.0 } else { x[k - 1] };
            for a in 0..p {
                grad[a] += resid * row(a);
                for b in a..p {
                    let v = hess.get(a, b) + weight * row(a) * row(b);
                    hess.set(a, b, v);
                }
            }
        }
        for a in 1..p {
            grad[a] -= 2.0 * reg * w[a];
            hess.set(a, a, hess.get(a, a) + 2.0 * reg);
        }
        for a in 0..p {
            for b in 0..a {
                hess.set(a, b, hess.get(b, a));
            }
        }
        let gnorm = sqrt(grad.iter().map(|g| g * g).sum());
        if gnorm < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;

        // Newton direction; fall back to a damped system when the Hessian
        // is singular (e.g. all samples in one class with reg = 0).
        let step = [0.0, 1e-10, 1e-6, 1e-3, 1.0]
            .iter()
            .find_map(|&damp| {
                let mut h = hess.clone();
                h.add_diagonal(core::iter::repeat_n(damp * (1.0 + gnorm), p));
                Cholesky::new(&h).map(|c| c.solve(&grad))
            })
            .unwrap_or_else(|| grad.clone());

        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a + scale * s).collect();
            let value = objective(&trial);
            if value.is_finite() && value >= current {
                w = trial;
                current = value;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        trace.push(current);
        if !improved {
            break;
        }
    }

    Ok((
        LrModel {
            beta0: w[0],
            beta: w[1..].to_vec(),
            converged,
            iterations_used: iterations,
        },
        trace,
    ))
}
