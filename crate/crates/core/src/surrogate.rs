//! Stochastic kriging surrogate.
//!
//! A Gaussian process with a squared-exponential kernel
//! `σ² exp(-Σ_k (θ_k |a_k - b_k|)²)`, a constant mean equal to the average
//! response, and a fixed heteroscedastic diagonal `Σ_ε` carrying the noise
//! of each sample mean (`Var/r`). Hyperparameters `(ln σ², ln θ_1..θ_d)`
//! are chosen by maximizing the log marginal likelihood with a multi-start
//! projected L-BFGS.
//!
//! The predictive mean uses `K + Σ_ε`; the reported standard deviation is
//! the ordinary-kriging one, computed from the noise-free `K`.
//!
//! Responses are standardized before fitting. All public accessors report
//! values in the original response units.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::domain::{Outcome, ReplicatedObservation};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::math::{exp, ln, mean, sample_variance, sqrt};
use crate::seeds::Rng;
use crate::{Error, Result};

/// Relative diagonal jitter ladder: `1e-8·σ²` escalating ×10 up to `1e-2·σ²`.
const JITTER_LADDER: [f64; 7] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub process_variance: f64,
    pub inverse_lengthscales: Vec<f64>,
}

impl KernelParams {
    pub fn new(process_variance: f64, inverse_lengthscales: Vec<f64>) -> Result<Self> {
        let p = Self {
            process_variance,
            inverse_lengthscales,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.process_variance > 0.0) || !self.process_variance.is_finite() {
            return Err(Error::domain("process variance must be positive and finite"));
        }
        if self
            .inverse_lengthscales
            .iter()
            .any(|t| !(*t >= 0.0) || !t.is_finite())
        {
            return Err(Error::domain("inverse lengthscales must be finite and non-negative"));
        }
        Ok(())
    }
}

#[inline]
fn correlation(a: &[f64], b: &[f64], theta: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((x, y), t) in a.iter().zip(b).zip(theta) {
        let d = t * (x - y);
        s += d * d;
    }
    exp(-s)
}

/// Squared-exponential covariance between two unit-cube points.
pub fn kernel_eval(a: &[f64], b: &[f64], params: &KernelParams) -> Result<f64> {
    if a.len() != b.len() || a.len() != params.inverse_lengthscales.len() {
        return Err(Error::domain(alloc::format!(
            "dimension mismatch: {} vs {} with {} lengthscales",
            a.len(),
            b.len(),
            params.inverse_lengthscales.len()
        )));
    }
    Ok(params.process_variance * correlation(a, b, &params.inverse_lengthscales))
}

/// Inputs (unit cube), scalar responses and the noise diagonal `Σ_ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub inputs: Vec<Vec<f64>>,
    pub responses: Vec<f64>,
    pub noise: Vec<f64>,
}

impl TrainingSet {
    pub fn new(inputs: Vec<Vec<f64>>, responses: Vec<f64>, noise: Vec<f64>) -> Result<Self> {
        let n = inputs.len();
        if n == 0 {
            return Err(Error::domain("training set is empty"));
        }
        if responses.len() != n || noise.len() != n {
            return Err(Error::domain("inputs, responses and noise must have equal length"));
        }
        let d = inputs[0].len();
        if d == 0 || inputs.iter().any(|x| x.len() != d) {
            return Err(Error::domain("all inputs need the same non-zero dimension"));
        }
        if inputs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("inputs must be finite"));
        }
        if responses.iter().any(|y| !y.is_finite()) {
            return Err(Error::domain("responses must be finite"));
        }
        if noise.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("noise entries must be finite and non-negative"));
        }
        Ok(Self {
            inputs,
            responses,
            noise,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }
}

/// Entry `i` is the sample variance of the per-replication scalarized values
/// of observation `i` divided by its replication count (0 when `r = 1`).
pub fn noise_diagonal(
    observations: &[ReplicatedObservation],
    scalarize: impl Fn(&Outcome) -> f64,
) -> Vec<f64> {
    observations
        .iter()
        .map(|obs| {
            let values: Vec<f64> = obs.outcomes.iter().map(&scalarize).collect();
            sample_variance(&values) / values.len() as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub log_variance_bounds: (f64, f64),
    pub log_theta_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iterations: 100,
            log_variance_bounds: (-6.0, 6.0),
            log_theta_bounds: (-4.0, 4.0),
        }
    }
}

/// Training data after standardization, with cached squared differences.
struct Standardized<'a> {
    inputs: &'a [Vec<f64>],
    y: Vec<f64>,
    noise: Vec<f64>,
    /// `sq_diff[(i * n + j) * d + k] = (x_ik - x_jk)²` for `i < j`.
    sq_diff: Vec<f64>,
}

impl<'a> Standardized<'a> {
    fn new(training: &'a TrainingSet, y_mean: f64, y_scale: f64) -> Self {
        let n = training.len();
        let d = training.dim();
        let mut sq_diff = vec![0.0; n * n * d];
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..d {
                    let diff = training.inputs[i][k] - training.inputs[j][k];
                    sq_diff[(i * n + j) * d + k] = diff * diff;
                }
            }
        }
        Self {
            inputs: &training.inputs,
            y: training.responses.iter().map(|y| (y - y_mean) / y_scale).collect(),
            noise: training.noise.iter().map(|v| v / (y_scale * y_scale)).collect(),
            sq_diff,
        }
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn d(&self) -> usize {
        self.inputs[0].len()
    }

    fn correlation_matrix(&self, theta: &[f64]) -> Matrix {
        let n = self.n();
        let d = self.d();
        let theta_sq: Vec<f64> = theta.iter().map(|t| t * t).collect();
        let mut r = Matrix::zeros(n);
        for i in 0..n {
            r.set(i, i, 1.0);
            for j in (i + 1)..n {
                let base = (i * n + j) * d;
                let s: f64 = (0..d).map(|k| theta_sq[k] * self.sq_diff[base + k]).sum();
                let v = exp(-s);
                r.set(i, j, v);
                r.set(j, i, v);
            }
        }
        r
    }

    /// Factorizes `σ²(R + jI) + Σ_ε`, climbing the jitter ladder on failure.
    fn factorize(&self, sigma2: f64, r: &Matrix) -> Option<(Cholesky, f64)> {
        let n = self.n();
        JITTER_LADDER.iter().find_map(|&rel| {
            let c = Matrix::from_fn(n, |i, j| {
                let mut v = sigma2 * r.get(i, j);
                if i == j {
                    v += sigma2 * rel + self.noise[i];
                }
                v
            });
            Cholesky::new(&c).map(|chol| (chol, rel))
        })
    }

    /// Log marginal likelihood and its gradient in `(ln σ², ln θ_k)`.
    fn log_likelihood(&self, log_params: &[f64], with_gradient: bool) -> Option<(f64, Vec<f64>)> {
        let n = self.n();
        let d = self.d();
        let sigma2 = exp(log_params[0]);
        let theta: Vec<f64> = log_params[1..].iter().map(|v| exp(*v)).collect();
        let r = self.correlation_matrix(&theta);
        let (chol, rel) = self.factorize(sigma2, &r)?;
        let alpha = chol.solve(&self.y);
        let ll = -0.5 * dot(&self.y, &alpha) - 0.5 * chol.log_det() - 0.5 * n as f64 * ln(2.0 * PI);
        if !ll.is_finite() {
            return None;
        }
        if !with_gradient {
            return Some((ll, Vec::new()));
        }
        // d ll / d p = ½ tr((ααᵀ - C⁻¹) ∂C/∂p)
        let inv = chol.inverse();
        let mut grad = vec![0.0; 1 + d];
        let theta_sq: Vec<f64> = theta.iter().map(|t| t * t).collect();
        for i in 0..n {
            let w_ii = alpha[i] * alpha[i] - inv.get(i, i);
            grad[0] += 0.5 * w_ii * sigma2 * (1.0 + rel);
            for j in (i + 1)..n {
                // symmetric pair counted twice
                let w = alpha[i] * alpha[j] - inv.get(i, j);
                let c = sigma2 * r.get(i, j);
                grad[0] += w * c;
                let base = (i * n + j) * d;
                for k in 0..d {
                    grad[1 + k] += w * c * (-2.0 * theta_sq[k] * self.sq_diff[base + k]);
                }
            }
        }
        Some((ll, grad))
    }
}

fn standardization(responses: &[f64]) -> (f64, f64) {
    let m = mean(responses);
    let sd = sqrt(sample_variance(responses));
    let scale = if sd > 1e-12 && sd.is_finite() { sd } else { 1.0 };
    (m, scale)
}

/// A fitted stochastic kriging model, immutable and shareable.
#[derive(Debug, Clone)]
pub struct FittedSurrogate {
    training: TrainingSet,
    y_mean: f64,
    y_scale: f64,
    sigma2: f64,
    theta: Vec<f64>,
    weights: Vec<f64>,
    rel_jitter_noisy: f64,
    chol_noise_free: Cholesky,
    rel_jitter_noise_free: f64,
    log_likelihood: f64,
    restart_best: Vec<f64>,
}

/// Predictive mean and ordinary-kriging standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub sd: f64,
}

/// Fits with default options.
pub fn fit(training: TrainingSet, seed: u64) -> Result<FittedSurrogate> {
    fit_with(training, seed, &FitOptions::default())
}

pub fn fit_with(training: TrainingSet, seed: u64, options: &FitOptions) -> Result<FittedSurrogate> {
    let (y_mean, y_scale) = standardization(&training.responses);
    let d = training.dim();
    if training.len() < 2 {
        // Not enough data for a likelihood fit: unit variance, unit θ.
        return FittedSurrogate::build(training, y_mean, y_scale, 1.0, vec![1.0; d], Vec::new());
    }
    let std = Standardized::new(&training, y_mean, y_scale);
    let mut lower = vec![options.log_theta_bounds.0; 1 + d];
    let mut upper = vec![options.log_theta_bounds.1; 1 + d];
    lower[0] = options.log_variance_bounds.0;
    upper[0] = options.log_variance_bounds.1;

    let mut rng = Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut restart_best = Vec::with_capacity(options.restarts.max(1));
    for restart in 0..options.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            vec![0.0; 1 + d]
        } else {
            lower
                .iter()
                .zip(&upper)
                .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect()
        };
        let result = minimize_box(
            |p| std.log_likelihood(p, true).map(|(ll, g)| (-ll, g.into_iter().map(|v| -v).collect())),
            start,
            &lower,
            &upper,
            options.max_iterations,
        );
        if let Some((x, neg_ll)) = result {
            let ll = -neg_ll;
            if best.as_ref().is_none_or(|(_, b)| ll > *b) {
                best = Some((x, ll));
            }
        }
        restart_best.push(best.as_ref().map_or(f64::NEG_INFINITY, |(_, b)| *b));
    }
    let (x, _) = best.ok_or_else(|| Error::Model("covariance matrix could not be factorized".into()))?;
    let sigma2 = exp(x[0]);
    let theta = x[1..].iter().map(|v| exp(*v)).collect();
    FittedSurrogate::build(training, y_mean, y_scale, sigma2, theta, restart_best)
}

impl FittedSurrogate {
    /// Builds the predictor at given hyperparameters (original units)
    /// without any likelihood search.
    pub fn with_params(training: TrainingSet, params: &KernelParams) -> Result<Self> {
        params.validate()?;
        if params.inverse_lengthscales.len() != training.dim() {
            return Err(Error::domain("lengthscale count does not match input dimension"));
        }
        let (y_mean, y_scale) = standardization(&training.responses);
        let sigma2 = params.process_variance / (y_scale * y_scale);
        Self::build(
            training,
            y_mean,
            y_scale,
            sigma2,
            params.inverse_lengthscales.clone(),
            Vec::new(),
        )
    }

    fn build(
        training: TrainingSet,
        y_mean: f64,
        y_scale: f64,
        sigma2: f64,
        theta: Vec<f64>,
        restart_best: Vec<f64>,
    ) -> Result<Self> {
        let std = Standardized::new(&training, y_mean, y_scale);
        let r = std.correlation_matrix(&theta);
        let (chol_noisy, rel_jitter_noisy) = std
            .factorize(sigma2, &r)
            .ok_or_else(|| Error::Model("K + Σ_ε not positive definite at maximum jitter".into()))?;
        let noise_free = Standardized {
            noise: vec![0.0; std.n()],
            ..std
        };
        let (chol_noise_free, rel_jitter_noise_free) = noise_free
            .factorize(sigma2, &r)
            .ok_or_else(|| Error::Model("K not positive definite at maximum jitter".into()))?;
        let weights = chol_noisy.solve(&noise_free.y);
        let log_likelihood = -0.5 * dot(&noise_free.y, &weights)
            - 0.5 * chol_noisy.log_det()
            - 0.5 * noise_free.n() as f64 * ln(2.0 * PI)
            - noise_free.n() as f64 * ln(y_scale);
        Ok(Self {
            training,
            y_mean,
            y_scale,
            sigma2,
            theta,
            weights,
            rel_jitter_noisy,
            chol_noise_free,
            rel_jitter_noise_free,
            log_likelihood,
            restart_best,
        })
    }

    pub fn training(&self) -> &TrainingSet {
        &self.training
    }

    /// Hyperparameters in original response units.
    pub fn params(&self) -> KernelParams {
        KernelParams {
            process_variance: self.sigma2 * self.y_scale * self.y_scale,
            inverse_lengthscales: self.theta.clone(),
        }
    }

    /// Fitted constant mean `μ̂`.
    pub fn mean_constant(&self) -> f64 {
        self.y_mean
    }

    /// Absolute diagonal jitter added to `K + Σ_ε` (original units).
    pub fn jitter_noisy(&self) -> f64 {
        self.rel_jitter_noisy * self.params().process_variance
    }

    /// Absolute diagonal jitter added to the noise-free `K` (original units).
    pub fn jitter_noise_free(&self) -> f64 {
        self.rel_jitter_noise_free * self.params().process_variance
    }

    /// `(K + Σ_ε + jitter)⁻¹ (Y - μ̂)` in original units.
    pub fn weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.y_scale).collect()
    }

    /// Log marginal likelihood of `Y - μ̂` in original units.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Best log likelihood seen after each restart (standardized units).
    pub fn restart_history(&self) -> &[f64] {
        &self.restart_best
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        let k_star: Vec<f64> = self
            .training
            .inputs
            .iter()
            .map(|xi| self.sigma2 * correlation(x, xi, &self.theta))
            .collect();
        let mean = self.y_mean + self.y_scale * dot(&k_star, &self.weights);
        let v = self.chol_noise_free.solve_lower(&k_star);
        let var = (self.sigma2 - dot(&v, &v)).max(0.0);
        Prediction {
            mean,
            sd: self.y_scale * sqrt(var),
        }
    }
}

/// Log marginal likelihood of `Y - mean(Y)` under `K + Σ_ε` (+ the same
/// jitter ladder the fit uses), in original units.
pub fn log_likelihood(training: &TrainingSet, params: &KernelParams) -> Result<f64> {
    FittedSurrogate::with_params(training.clone(), params).map(|m| m.log_likelihood())
}

/// Analytic gradient of the standardized log likelihood in
/// `(ln σ², ln θ_1..θ_d)`; exposed for gradient checks.
pub fn standardized_log_likelihood(training: &TrainingSet, log_params: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (m, s) = standardization(&training.responses);
    Standardized::new(training, m, s).log_likelihood(log_params, true)
}

/// Projected L-BFGS minimization inside a box. `f` returns `None` where it
/// cannot be evaluated; such points are treated as infinitely bad.
fn minimize_box(
    mut f: impl FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
    x0: Vec<f64>,
    lower: &[f64],
    upper: &[f64],
    max_iterations: usize,
) -> Option<(Vec<f64>, f64)> {
    const MEMORY: usize = 6;
    let project = |x: &mut [f64]| {
        for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
            *v = v.max(*lo).min(*hi);
        }
    };
    let mut x = x0;
    project(&mut x);
    let (mut fx, mut g) = f(&x)?;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();

    for _ in 0..max_iterations {
        // projected gradient norm for convergence
        let pg: f64 = x
            .iter()
            .zip(&g)
            .zip(lower.iter().zip(upper))
            .map(|((xi, gi), (lo, hi))| {
                let moved = (xi - gi).max(*lo).min(*hi);
                (moved - xi).abs()
            })
            .fold(0.0, f64::max);
        if pg < 1e-6 {
            break;
        }

        let mut dir = two_loop(&g, &s_hist, &y_hist);
        if dot(&dir, &g) >= 0.0 {
            s_hist.clear();
            y_hist.clear();
            dir = g.iter().map(|v| -v).collect();
        }
        if s_hist.is_empty() {
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if gmax > 1.0 {
                dir.iter_mut().for_each(|v| *v /= gmax);
            }
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            project(&mut trial);
            let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &moved);
            if decrease >= 0.0 {
                step *= 0.5;
                continue;
            }
            if let Some((ft, gt)) = f(&trial) {
                if ft <= fx + 1e-4 * decrease {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            if s_hist.is_empty() {
                break;
            }
            s_hist.clear();
            y_hist.clear();
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-10 {
            if s_hist.len() == MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        let converged = (fx - fnew).abs() <= 1e-10 * (1.0 + fx.abs());
        x = xn;
        fx = fnew;
        g = gn;
        if converged {
            break;
        }
    }
    Some((x, fx))
}

fn two_loop(g: &[f64], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let m = s_hist.len();
    let mut alphas = vec![0.0; m];
    for i in (0..m).rev() {
        let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
        alphas[i] = rho * dot(&s_hist[i], &q);
        for (qv, yv) in q.iter_mut().zip(&y_hist[i]) {
            *qv -= alphas[i] * yv;
        }
    }
    if m > 0 {
        let gamma = dot(&s_hist[m - 1], &y_hist[m - 1]) / dot(&y_hist[m - 1], &y_hist[m - 1]);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for i in 0..m {
        let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
        let beta = rho * dot(&y_hist[i], &q);
        for (qv, sv) in q.iter_mut().zip(&s_hist[i]) {
            *qv += (alphas[i] - beta) * sv;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Configuration, FailureMode};

    fn params(s2: f64, theta: &[f64]) -> KernelParams {
        KernelParams::new(s2, theta.to_vec()).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let p = params(2.5, &[1.0, 3.0]);
        assert_eq!(kernel_eval(&[0.2, 0.4], &[0.2, 0.4], &p).unwrap(), 2.5);
        let flat = params(1.7, &[0.0, 0.0]);
        assert_eq!(kernel_eval(&[0.0, 1.0], &[1.0, 0.0], &flat).unwrap(), 1.7);
        let one = params(1.0, &[1.0]);
        assert!((kernel_eval(&[0.0], &[1.0], &one).unwrap() - 0.367_879_441_171_442_33).abs() < 1e-15);
        assert!(kernel_eval(&[0.0], &[1.0, 0.0], &one).is_err());
    }

    #[test]
    fn noise_diagonal_examples() {
        let outcome = |s: f64| Outcome {
            strength: s,
            cost: 1.0,
            failure_mode: FailureMode::Cohesive,
            visual_damage: false,
        };
        let obs = |vals: &[f64]| {
            ReplicatedObservation::new(
                Configuration::from_values_unchecked(vec![0.0]),
                vals.iter().map(|v| outcome(*v)).collect(),
            )
            .unwrap()
        };
        let diag = noise_diagonal(&[obs(&[1.0; 5]), obs(&[0.0, 2.0]), obs(&[3.0])], |o| o.strength);
        assert_eq!(diag, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_data_predicts_constant() {
        let t = TrainingSet::new(
            vec![vec![0.1, 0.2], vec![0.7, 0.3], vec![0.4, 0.9]],
            vec![3.5; 3],
            vec![0.0; 3],
        )
        .unwrap();
        let m = fit(t, 1).unwrap();
        for x in [[0.0, 0.0], [0.5, 0.5], [0.1, 0.2], [1.0, 1.0]] {
            assert!((m.predict(&x).mean - 3.5).abs() < 1e-6);
        }
    }

    #[test]
    fn single_point_uses_defaults() {
        let t = TrainingSet::new(vec![vec![0.5]], vec![2.0], vec![0.0]).unwrap();
        let m = fit(t, 0).unwrap();
        assert_eq!(m.params().inverse_lengthscales, vec![1.0]);
        assert!((m.predict(&[0.5]).mean - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_is_deterministic() {
        let t = TrainingSet::new(
            (0..8).map(|i| vec![i as f64 / 7.0, (i * 3 % 8) as f64 / 7.0]).collect(),
            (0..8).map(|i| ((i as f64) * 0.9).sin()).collect(),
            vec![0.01; 8],
        )
        .unwrap();
        let a = fit(t.clone(), 99).unwrap();
        let b = fit(t, 99).unwrap();
        assert_eq!(a.params(), b.params());
        let h = a.restart_history();
        assert_eq!(h.len(), 10);
        assert!(h.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_bad_training_data() {
        assert!(TrainingSet::new(vec![vec![0.0]], vec![f64::NAN], vec![0.0]).is_err());
        assert!(TrainingSet::new(vec![vec![0.0]], vec![1.0], vec![f64::INFINITY]).is_err());
        assert!(TrainingSet::new(vec![vec![0.0]], vec![1.0], vec![-1.0]).is_err());
        assert!(TrainingSet::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let t = TrainingSet::new(
            (0..7).map(|i| vec![i as f64 / 6.0, ((i * 5) % 7) as f64 / 6.0, ((i * 2) % 7) as f64 / 6.0]).collect(),
            (0..7).map(|i| (i as f64 * 1.3).cos() + 0.2 * i as f64).collect(),
            (0..7).map(|i| 0.001 * i as f64).collect(),
        )
        .unwrap();
        for p in [[0.0, 0.0, 0.3, -0.5], [0.7, 1.0, -1.0, 0.4], [-0.3, 0.5, 0.5, 0.5]] {
            let (_, g) = standardized_log_likelihood(&t, &p).unwrap();
            for k in 0..p.len() {
                let h = 1e-5;
                let mut up = p;
                let mut dn = p;
                up[k] += h;
                dn[k] -= h;
                let fd = (standardized_log_likelihood(&t, &up).unwrap().0
                    - standardized_log_likelihood(&t, &dn).unwrap().0)
                    / (2.0 * h);
                let rel = (g[k] - fd).abs() / fd.abs().max(1e-3);
                assert!(rel < 1e-4, "k={k} analytic={} fd={fd}", g[k]);
            }
        }
    }
}
