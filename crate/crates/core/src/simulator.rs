//! Synthetic plasma-bonding process simulator.
//!
//! Maps the six process settings to lap shear strength, production cost,
//! failure mode and visual damage. The only stochastic input is the
//! contact angle, whose standard deviation is `gamma` times its mean.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::campaign::Evaluator;
use crate::domain::{Configuration, DesignSpace, FailureMode, Outcome};
use crate::math::{exp, sqrt};
use crate::seeds::{self, Rng, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorSettings {
    /// Relative contact-angle noise.
    pub gamma: f64,
    pub seed: u64,
    /// Dose above which the sample is visibly burnt.
    pub burn_threshold: f64,
    /// Activation below which the bond fails at the interface.
    pub adhesion_threshold: f64,
    /// Strength (MPa) at or above which the substrate fails first.
    pub substrate_threshold: f64,
    pub cost_base: f64,
    pub cost_preprocessing: f64,
    pub cost_per_pass: f64,
}

impl Default for SimulatorSettings {
    fn default() -> Self {
        Self {
            gamma: 0.30,
            seed: 0,
            burn_threshold: 0.88,
            adhesion_threshold: 0.60,
            substrate_threshold: 34.0,
            cost_base: 0.6,
            cost_preprocessing: 0.7,
            cost_per_pass: 0.004,
        }
    }
}

impl SimulatorSettings {
    pub fn with_gamma(gamma: f64) -> Self {
        Self { gamma, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::domain("gamma must be finite and non-negative"));
        }
        if !(self.burn_threshold > 0.0 && self.burn_threshold <= 1.0) {
            return Err(Error::domain("burn threshold must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.adhesion_threshold) {
            return Err(Error::domain("adhesion threshold must lie in [0, 1]"));
        }
        if !(0.0..=42.0).contains(&self.substrate_threshold) {
            return Err(Error::domain("substrate threshold must lie in [0, 42] MPa"));
        }
        if [self.cost_base, self.cost_preprocessing, self.cost_per_pass]
            .iter()
            .any(|c| !(*c >= 0.0) || !c.is_finite())
        {
            return Err(Error::domain("cost coefficients must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Noise-free intermediate quantities for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub dose: f64,
    pub activation: f64,
    pub mean_contact_angle: f64,
    pub cost: f64,
}

/// Evaluates the deterministic part of the model.
pub fn response(space: &DesignSpace, config: &Configuration, settings: &SimulatorSettings) -> Result<Response> {
    if space.dim() != 6 {
        return Err(Error::domain("the simulator needs the six bonding variables"));
    }
    let u = space.encode(config)?;
    let (pre, p, s, h, n, t) = (config.values()[0], u[1], u[2], u[3], u[4], u[5]);
    let dose = p * (1.0 - 0.6 * s) * (1.0 - 0.5 * h) * (0.4 + 0.6 * sqrt(n));
    let activation = (0.35 + 0.15 * pre + 0.65 * (1.0 - exp(-4.0 * dose)) * exp(-1.2 * t)).clamp(0.0, 1.0);
    let passes = config.values()[4];
    let speed = config.values()[2];
    let cost = settings.cost_base + settings.cost_preprocessing * pre + settings.cost_per_pass * passes * (100.0 / speed);
    Ok(Response {
        dose,
        activation,
        mean_contact_angle: 95.0 * (1.0 - activation) + 5.0,
        cost,
    })
}

/// Sampled contact angle in degrees for a standard-normal `noise_draw`.
pub fn contact_angle(mean_contact_angle: f64, gamma: f64, noise_draw: f64) -> f64 {
    (mean_contact_angle * (1.0 + gamma * noise_draw)).clamp(1.0, 120.0)
}

/// Lap shear strength (MPa) for a contact angle.
pub fn strength(contact_angle: f64) -> f64 {
    42.0 * (1.0 - contact_angle / 105.0).max(0.0)
}

/// One replication given a standard-normal draw.
pub fn simulate_once(config: &Configuration, settings: &SimulatorSettings, noise_draw: f64) -> Result<Outcome> {
    simulate_in(&DesignSpace::bonding(), config, settings, noise_draw)
}

fn simulate_in(space: &DesignSpace, config: &Configuration, settings: &SimulatorSettings, noise_draw: f64) -> Result<Outcome> {
    let r = response(space, config, settings)?;
    let ts = strength(contact_angle(r.mean_contact_angle, settings.gamma, noise_draw));
    let failure_mode = if r.activation < settings.adhesion_threshold {
        FailureMode::Adhesion
    } else if ts >= settings.substrate_threshold {
        FailureMode::Substrate
    } else {
        FailureMode::Cohesive
    };
    Ok(Outcome {
        strength: ts,
        cost: r.cost,
        failure_mode,
        visual_damage: r.dose > settings.burn_threshold,
    })
}

/// Seeded simulator with its own noise stream. Counts every replication
/// it produces.
#[derive(Debug, Clone)]
pub struct Simulator {
    settings: SimulatorSettings,
    space: DesignSpace,
    rng: Rng,
    calls: u64,
}

impl Simulator {
    pub fn new(settings: SimulatorSettings) -> Result<Self> {
        settings.validate()?;
        let rng = seeds::rng(settings.seed, Stream::Simulator, 0);
        Ok(Self {
            settings,
            space: DesignSpace::bonding(),
            rng,
            calls: 0,
        })
    }

    /// A simulator drawing from an explicitly seeded generator.
    pub fn with_rng_seed(settings: SimulatorSettings, seed: u64) -> Result<Self> {
        let mut sim = Self::new(settings)?;
        sim.rng = Rng::seed_from_u64(seed);
        Ok(sim)
    }

    pub fn settings(&self) -> &SimulatorSettings {
        &self.settings
    }

    /// Number of replications produced so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// `r` independent replications of `config`.
    pub fn simulate(&mut self, config: &Configuration, r: usize) -> Result<Vec<Outcome>> {
        if r == 0 {
            return Err(Error::domain("at least one replication is required"));
        }
        // validate before consuming any noise
        response(&self.space, config, &self.settings)?;
        (0..r)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                self.calls += 1;
                simulate_in(&self.space, config, &self.settings, z)
            })
            .collect()
    }
}

impl Evaluator for Simulator {
    fn evaluate(&mut self, config: &Configuration, replications: usize) -> Result<Vec<Outcome>> {
        self.simulate(config, replications)
    }
}
