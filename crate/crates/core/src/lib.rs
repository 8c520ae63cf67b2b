//! Constrained multi-objective Bayesian optimization for expensive, noisy
//! process-design problems.
//!
//! The engine scalarizes the objectives with an augmented Tchebycheff
//! function, models the scalarized sample means with a stochastic kriging
//! surrogate (a Gaussian process whose diagonal carries the replication
//! noise of each mean), predicts feasibility with a logistic classifier and
//! picks one infill point per iteration by maximizing the constrained
//! modified expected improvement with a particle swarm.
//!
//! Everything in this crate is `no_std` compatible (it needs `alloc`).
//! File formats, the benchmark harness, the CLI and the HTTP service live in
//! the `mogp` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod acquisition;
pub mod baselines;
pub mod campaign;
pub mod doe;
pub mod domain;
mod error;
pub mod feasibility;
pub mod linalg;
pub mod math;
pub mod metrics;
pub mod pso;
pub mod record;
pub mod scalarization;
pub mod seeds;
pub mod simulator;
pub mod surrogate;

pub use error::{Error, Result};

pub use campaign::{CampaignSettings, CampaignState, Evaluator};
pub use domain::{
    Configuration, DesignSpace, FailureMode, ObjectiveVector, Outcome, ReplicatedObservation,
    VariableKind, VariableSpec,
};
pub use metrics::FrontReport;
