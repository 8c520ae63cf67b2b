//! The ask–tell optimization loop.
//!
//! A campaign starts from a Latin hypercube design of `k` configurations.
//! Once all of them are told, every [`CampaignState::suggest`] call draws
//! the next weight vector, refits the kriging surrogate on the scalarized
//! sample means and the logistic classifier on the majority labels, and
//! maximizes CMEI with a particle swarm. Exactly `k + I` configurations
//! are evaluated, each with `r` replications.
//!
//! All randomness is derived from the root seed and the iteration number,
//! so a saved state reproduces the same suggestion after reloading.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::acquisition::{cmei, mei};
use crate::doe::latin_hypercube;
use crate::domain::{Configuration, DesignSpace, ObjectiveVector, Outcome, ReplicatedObservation};
use crate::feasibility::{fit_lr, majority_label, DEFAULT_RIDGE};
use crate::metrics::{FrontReport, DEFAULT_REFERENCE_POINT};
use crate::pso::{pso_maximize, PsoSettings};
use crate::scalarization::{next_weights, scalarize_observation, NormalizationBounds, DEFAULT_RHO};
use crate::seeds::{derive, Stream};
use crate::surrogate::{fit_with, FitOptions, TrainingSet};
use crate::{Error, Result};

/// Source of replicated outcomes for a configuration (a simulator or a
/// lab).
pub trait Evaluator {
    fn evaluate(&mut self, config: &Configuration, replications: usize) -> Result<Vec<Outcome>>;
}

impl<F> Evaluator for F
where
    F: FnMut(&Configuration, usize) -> Result<Vec<Outcome>>,
{
    fn evaluate(&mut self, config: &Configuration, replications: usize) -> Result<Vec<Outcome>> {
        self(config, replications)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSettings {
    pub space: DesignSpace,
    /// Initial design size `k`.
    pub init_size: usize,
    /// Infill iterations `I`.
    pub iterations: usize,
    /// Replications `r` per configuration.
    pub replications: usize,
    pub rho: f64,
    pub ridge: f64,
    /// Swarm settings; the seed is replaced by a per-iteration stream.
    pub pso: PsoSettings,
    pub seed: u64,
    pub reference_point: ObjectiveVector,
    pub fit: FitOptions,
}

impl Default for CampaignSettings {
    fn default() -> Self {
        Self {
            space: DesignSpace::bonding(),
            init_size: 20,
            iterations: 40,
            replications: 5,
            rho: DEFAULT_RHO,
            ridge: DEFAULT_RIDGE,
            pso: PsoSettings::default(),
            seed: 0,
            reference_point: DEFAULT_REFERENCE_POINT,
            fit: FitOptions::default(),
        }
    }
}

impl CampaignSettings {
    pub fn validate(&self) -> Result<()> {
        DesignSpace::new(self.space.variables().to_vec())?;
        if self.init_size < 2 {
            return Err(Error::domain("initial design size must be at least 2"));
        }
        if self.replications < 1 {
            return Err(Error::domain("replications must be at least 1"));
        }
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::domain("rho must be finite and non-negative"));
        }
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Error::domain("ridge weight must be finite and non-negative"));
        }
        if !self.reference_point.pc.is_finite() || !self.reference_point.neg_ts.is_finite() {
            return Err(Error::domain("reference point must be finite"));
        }
        if self.fit.restarts == 0 {
            return Err(Error::domain("at least one likelihood restart is required"));
        }
        self.pso.validate()
    }

    /// Total configurations `k + I`.
    pub fn budget(&self) -> usize {
        self.init_size + self.iterations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Design,
    Optimizing,
    Exhausted,
}

/// Models fitted for one infill iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub iteration: usize,
    pub weights: Vec<f64>,
    pub process_variance: f64,
    pub inverse_lengthscales: Vec<f64>,
    pub log_likelihood: f64,
    pub lr_beta0: f64,
    pub lr_beta: Vec<f64>,
    pub incumbent: Configuration,
    pub incumbent_prediction: f64,
    pub incumbent_feasible: bool,
    pub cmei: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingSuggestion {
    pub config: Configuration,
    /// 1-based infill iteration this suggestion belongs to.
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignState {
    pub settings: CampaignSettings,
    pub design: Vec<Configuration>,
    pub design_told: Vec<bool>,
    pub observations: Vec<ReplicatedObservation>,
    /// Completed infill iterations; also the weight-schedule cursor.
    pub iteration: usize,
    pub pending: Option<PendingSuggestion>,
    pub last_model: Option<ModelSummary>,
    /// Archive hypervolume after each told configuration.
    pub history: Vec<f64>,
}

/// Configurations told more than once are pooled into one training point.
struct Group {
    config: Configuration,
    unit: Vec<f64>,
    obs: ReplicatedObservation,
}

impl CampaignState {
    pub fn initialize(settings: CampaignSettings) -> Result<Self> {
        settings.validate()?;
        let design = latin_hypercube(settings.init_size, &settings.space, derive(settings.seed, Stream::Design, 0))?;
        let k = design.points.len();
        Ok(Self {
            settings,
            design: design.points,
            design_told: alloc::vec![false; k],
            observations: Vec::new(),
            iteration: 0,
            pending: None,
            last_model: None,
            history: Vec::new(),
        })
    }

    pub fn phase(&self) -> Phase {
        if self.design_remaining() > 0 {
            Phase::Design
        } else if self.iteration >= self.settings.iterations {
            Phase::Exhausted
        } else {
            Phase::Optimizing
        }
    }

    pub fn design_remaining(&self) -> usize {
        self.design_told.iter().filter(|t| !**t).count()
    }

    /// First design point not yet told.
    pub fn next_design_point(&self) -> Option<&Configuration> {
        self.design.iter().zip(&self.design_told).find(|(_, t)| !**t).map(|(c, _)| c)
    }

    pub fn untold_design_points(&self) -> impl Iterator<Item = &Configuration> {
        self.design.iter().zip(&self.design_told).filter(|(_, t)| !**t).map(|(c, _)| c)
    }

    /// Configurations evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.observations.len()
    }

    /// The next infill point. Repeated calls return the cached suggestion
    /// until it is told.
    pub fn suggest(&mut self) -> Result<Configuration> {
        let remaining = self.design_remaining();
        if remaining > 0 {
            return Err(Error::DesignIncomplete { remaining });
        }
        if self.iteration >= self.settings.iterations {
            return Err(Error::BudgetExhausted);
        }
        if let Some(p) = &self.pending {
            return Ok(p.config.clone());
        }
        let t = self.iteration + 1;
        let (config, summary) = self.compute_suggestion(t)?;
        self.pending = Some(PendingSuggestion {
            config: config.clone(),
            iteration: t,
        });
        self.last_model = Some(summary);
        Ok(config)
    }

    fn groups(&self) -> Result<Vec<Group>> {
        let space = &self.settings.space;
        let mut groups: Vec<(Configuration, Vec<Outcome>)> = Vec::new();
        for o in &self.observations {
            match groups.iter_mut().find(|(c, _)| c.approx_eq(&o.config, space)) {
                Some((_, outcomes)) => outcomes.extend_from_slice(&o.outcomes),
                None => groups.push((o.config.clone(), o.outcomes.clone())),
            }
        }
        groups
            .into_iter()
            .map(|(config, outcomes)| {
                Ok(Group {
                    unit: space.encode(&config)?,
                    obs: ReplicatedObservation::new(config.clone(), outcomes)?,
                    config,
                })
            })
            .collect()
    }

    fn compute_suggestion(&self, t: usize) -> Result<(Configuration, ModelSummary)> {
        let s = &self.settings;
        let seed = s.seed;
        let weights = next_weights(t, seed);
        let bounds = NormalizationBounds::from_observations(&self.observations)
            .ok_or_else(|| Error::Model("no observations to normalize".into()))?;
        let groups = self.groups()?;

        let scalarized: Vec<(f64, f64)> = groups
            .iter()
            .map(|g| scalarize_observation(&g.obs, &weights, s.rho, &bounds))
            .collect();
        let inputs: Vec<Vec<f64>> = groups.iter().map(|g| g.unit.clone()).collect();
        let training = TrainingSet::new(
            inputs.clone(),
            scalarized.iter().map(|v| v.0).collect(),
            scalarized.iter().map(|v| v.1).collect(),
        )?;
        let gp = fit_with(training, derive(seed, Stream::Surrogate, t as u64), &s.fit)?;

        let labels = groups
            .iter()
            .map(|g| majority_label(&g.obs.outcomes))
            .collect::<Result<Vec<u8>>>()?;
        let lr = fit_lr(&inputs, &labels, s.ridge)?;

        // Incumbent: lowest scalarized mean among majority-feasible points,
        // otherwise the highest observed pf (ties: lower scalarized mean).
        let by_mean = |a: &usize, b: &usize| scalarized[*a].0.partial_cmp(&scalarized[*b].0).unwrap_or(Ordering::Equal);
        let feasible: Vec<usize> = (0..groups.len()).filter(|&i| labels[i] == 1).collect();
        let incumbent = if let Some(i) = feasible.iter().copied().min_by(by_mean) {
            i
        } else {
            (0..groups.len())
                .min_by(|a, b| {
                    groups[*b].obs.pf
                        .partial_cmp(&groups[*a].obs.pf)
                        .unwrap_or(Ordering::Equal)
                        .then_with(|| by_mean(a, b))
                })
                .unwrap_or(0)
        };
        let z_min = gp.predict(&groups[incumbent].unit).mean;

        let space = &s.space;
        let pso = PsoSettings {
            seed: derive(seed, Stream::Swarm, t as u64),
            ..s.pso.clone()
        };
        let best = pso_maximize(
            |u| {
                let x = space.snap_unit(u);
                let p = gp.predict(&x);
                cmei(mei(z_min, p.mean, p.sd), lr.predict_pf(&x))
            },
            space.dim(),
            &pso,
        )?;
        let config = space.decode(&best.best_position);
        let params = gp.params();
        Ok((
            config,
            ModelSummary {
                iteration: t,
                weights: weights.as_slice().to_vec(),
                process_variance: params.process_variance,
                inverse_lengthscales: params.inverse_lengthscales,
                log_likelihood: gp.log_likelihood(),
                lr_beta0: lr.beta0,
                lr_beta: lr.beta,
                incumbent: groups[incumbent].config.clone(),
                incumbent_prediction: z_min,
                incumbent_feasible: labels[incumbent] == 1,
                cmei: best.best_value,
            },
        ))
    }

    /// Records the outcomes of the pending suggestion or of an untold
    /// design point.
    pub fn tell(&mut self, config: &Configuration, outcomes: Vec<Outcome>) -> Result<&ReplicatedObservation> {
        let r = self.settings.replications;
        if outcomes.len() != r {
            return Err(Error::ReplicationCount {
                expected: r,
                got: outcomes.len(),
            });
        }
        let space = &self.settings.space;
        space.encode(config)?;
        let canonical = if let Some(p) = self.pending.as_ref().filter(|p| p.config.approx_eq(config, space)) {
            p.config.clone()
        } else if let Some(i) = (0..self.design.len()).find(|&i| !self.design_told[i] && self.design[i].approx_eq(config, space)) {
            self.design[i].clone()
        } else {
            return Err(Error::UnknownConfiguration(format!("{config}")));
        };
        let obs = ReplicatedObservation::new(canonical, outcomes)?;

        if self.pending.as_ref().is_some_and(|p| p.config == obs.config) {
            self.pending = None;
            self.iteration += 1;
        } else if let Some(i) = (0..self.design.len()).find(|&i| !self.design_told[i] && self.design[i] == obs.config) {
            self.design_told[i] = true;
        }
        self.observations.push(obs);
        let hv = self.current_front().hv;
        self.history.push(hv);
        Ok(self.observations.last().expect("just pushed"))
    }

    /// Majority-feasible Pareto front of the sample means.
    pub fn current_front(&self) -> FrontReport {
        FrontReport::from_observations(&self.observations, &self.settings.reference_point, None)
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }
}

/// Drives a campaign to completion against `evaluator`; returns the final
/// state and the archive HV after every configuration.
pub fn run(settings: CampaignSettings, evaluator: &mut impl Evaluator) -> Result<(CampaignState, Vec<f64>)> {
    let mut state = CampaignState::initialize(settings)?;
    let r = state.settings.replications;
    while let Some(c) = state.next_design_point().cloned() {
        let outcomes = evaluator.evaluate(&c, r)?;
        state.tell(&c, outcomes)?;
    }
    while state.phase() == Phase::Optimizing {
        let c = state.suggest()?;
        let outcomes = evaluator.evaluate(&c, r)?;
        state.tell(&c, outcomes)?;
    }
    let history = state.history.clone();
    Ok((state, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FailureMode;
    use crate::simulator::{Simulator, SimulatorSettings};
    use alloc::vec;

    fn quick(k: usize, iterations: usize, r: usize) -> CampaignSettings {
        CampaignSettings {
            init_size: k,
            iterations,
            replications: r,
            seed: 17,
            fit: FitOptions {
                restarts: 2,
                max_iterations: 30,
                ..FitOptions::default()
            },
            pso: PsoSettings {
                swarm_size: 20,
                ..PsoSettings::default()
            },
            ..CampaignSettings::default()
        }
    }

    fn told_design(settings: CampaignSettings, sim: &mut Simulator) -> CampaignState {
        let mut s = CampaignState::initialize(settings).unwrap();
        let r = s.settings.replications;
        while let Some(c) = s.next_design_point().cloned() {
            let out = sim.simulate(&c, r).unwrap();
            s.tell(&c, out).unwrap();
        }
        s
    }

    #[test]
    fn initialize_examples() {
        let s = CampaignState::initialize(CampaignSettings::default()).unwrap();
        assert_eq!(s.design.len(), 20);
        assert_eq!(s.iteration, 0);
        assert_eq!(s.phase(), Phase::Design);
        assert_eq!(s, CampaignState::initialize(CampaignSettings::default()).unwrap());
        assert!(CampaignState::initialize(quick(2, 1, 1)).is_ok());
        assert!(CampaignState::initialize(quick(1, 1, 1)).is_err());
        assert!(CampaignState::initialize(quick(5, 1, 0)).is_err());
    }

    #[test]
    fn suggest_requires_complete_design() {
        let mut s = CampaignState::initialize(quick(4, 2, 2)).unwrap();
        assert_eq!(s.suggest(), Err(Error::DesignIncomplete { remaining: 4 }));
    }

    #[test]
    fn tell_validation() {
        let mut s = CampaignState::initialize(quick(4, 2, 3)).unwrap();
        let c = s.design[2].clone();
        let o = Outcome { strength: 20.0, cost: 1.0, failure_mode: FailureMode::Cohesive, visual_damage: false };
        assert_eq!(s.tell(&c, vec![o; 2]).unwrap_err(), Error::ReplicationCount { expected: 3, got: 2 });
        let bad = o;
        let mut outcomes = vec![o; 3];
        outcomes[1] = Outcome { failure_mode: FailureMode::Adhesion, ..bad };
        let obs = s.tell(&c, outcomes.clone()).unwrap();
        assert!((obs.pf - 2.0 / 3.0).abs() < 1e-15);
        // already told
        assert!(matches!(s.tell(&c, outcomes.clone()), Err(Error::UnknownConfiguration(_))));
        let stranger = DesignSpace::bonding().decode(&[0.5; 6]);
        assert!(matches!(s.tell(&stranger, outcomes), Err(Error::UnknownConfiguration(_))));
        assert_eq!(s.history.len(), 1);
    }

    #[test]
    fn pf_three_of_five() {
        let mut s = CampaignState::initialize(quick(3, 1, 5)).unwrap();
        let c = s.design[0].clone();
        let ok = Outcome { strength: 20.0, cost: 1.0, failure_mode: FailureMode::Cohesive, visual_damage: false };
        let bad = Outcome { visual_damage: true, ..ok };
        assert_eq!(s.tell(&c, vec![ok, bad, ok, bad, ok]).unwrap().pf, 0.6);
    }

    #[test]
    fn suggest_is_idempotent_and_in_bounds() {
        let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
        let mut s = told_design(quick(8, 3, 2), &mut sim);
        assert_eq!(s.phase(), Phase::Optimizing);
        let a = s.suggest().unwrap();
        let b = s.suggest().unwrap();
        assert_eq!(a, b);
        let space = DesignSpace::bonding();
        assert!(space.configuration(a.values().to_vec()).is_ok());
        let mut copy = s.clone();
        copy.pending = None;
        assert_eq!(copy.suggest().unwrap(), a);
    }

    #[test]
    fn infeasible_archive_still_suggests() {
        let mut s = CampaignState::initialize(quick(5, 2, 2)).unwrap();
        let bad = Outcome { strength: 5.0, cost: 1.0, failure_mode: FailureMode::Adhesion, visual_damage: false };
        for (i, c) in s.design.clone().iter().enumerate() {
            let mut o = vec![bad; 2];
            if i == 3 {
                o[0].failure_mode = FailureMode::Cohesive;
                o[1].failure_mode = FailureMode::Adhesion;
                o[1].visual_damage = true;
            }
            s.tell(c, o).unwrap();
        }
        // pf 0.5 is majority-feasible, so force all-infeasible instead
        let mut s2 = CampaignState::initialize(quick(5, 2, 2)).unwrap();
        for c in s2.design.clone() {
            s2.tell(&c, vec![bad; 2]).unwrap();
        }
        let c = s2.suggest().unwrap();
        assert!(DesignSpace::bonding().configuration(c.values().to_vec()).is_ok());
        assert!(!s2.last_model.as_ref().unwrap().incumbent_feasible);
        assert!(s.suggest().is_ok());
        assert!(s.last_model.as_ref().unwrap().incumbent_feasible);
        assert_eq!(s.last_model.as_ref().unwrap().incumbent, s.design[3]);
    }

    #[test]
    fn run_respects_budget() {
        let mut sim = Simulator::new(SimulatorSettings { seed: 3, ..Default::default() }).unwrap();
        let (state, history) = run(quick(6, 4, 3), &mut sim).unwrap();
        assert_eq!(state.observations.len(), 10);
        assert_eq!(sim.calls(), 30);
        assert_eq!(history.len(), 10);
        assert!(history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(state.phase(), Phase::Exhausted);
        let mut done = state.clone();
        assert_eq!(done.suggest(), Err(Error::BudgetExhausted));
    }

    #[test]
    fn run_without_iterations_is_design_only() {
        let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
        let (state, _) = run(quick(5, 0, 2), &mut sim).unwrap();
        assert_eq!(state.observations.len(), 5);
        assert!(state.last_model.is_none());
    }

    #[test]
    fn run_is_reproducible() {
        let go = || {
            let mut sim = Simulator::new(SimulatorSettings { seed: 4, ..Default::default() }).unwrap();
            run(quick(5, 3, 2), &mut sim).unwrap().0.observations
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn weights_follow_schedule() {
        let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
        let mut s = told_design(quick(4, 3, 1), &mut sim);
        for t in 1..=3 {
            let c = s.suggest().unwrap();
            assert_eq!(s.last_model.as_ref().unwrap().weights, next_weights(t, 17).as_slice());
            let out = sim.simulate(&c, 1).unwrap();
            s.tell(&c, out).unwrap();
        }
    }
}
