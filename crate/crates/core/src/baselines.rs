//! Budget-matched comparison optimizers: uniform random search and a
//! constrained NSGA-II.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::campaign::Evaluator;
use crate::doe::latin_hypercube;
use crate::domain::{dominates, Configuration, DesignSpace, ObjectiveVector, ReplicatedObservation};
use crate::metrics::{hv_history, FrontReport};
use crate::seeds::{self, derive, Rng, Stream};
use crate::{Error, Result};

/// Everything a baseline evaluated, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub observations: Vec<ReplicatedObservation>,
    /// Archive hypervolume after each configuration.
    pub history: Vec<f64>,
    pub front: FrontReport,
}

impl BaselineRun {
    fn from_observations(observations: Vec<ReplicatedObservation>, reference_point: &ObjectiveVector) -> Self {
        Self {
            history: hv_history(&observations, reference_point),
            front: FrontReport::from_observations(&observations, reference_point, None),
            observations,
        }
    }
}

fn evaluate(
    evaluator: &mut impl Evaluator,
    config: Configuration,
    r: usize,
) -> Result<ReplicatedObservation> {
    let outcomes = evaluator.evaluate(&config, r)?;
    if outcomes.len() != r {
        return Err(Error::ReplicationCount {
            expected: r,
            got: outcomes.len(),
        });
    }
    ReplicatedObservation::new(config, outcomes)
}

/// Evaluates `budget` configurations: the points of `initial_design` first
/// (when given), then uniform random points.
pub fn random_search(
    budget: usize,
    r: usize,
    space: &DesignSpace,
    evaluator: &mut impl Evaluator,
    seed: u64,
    initial_design: Option<&[Configuration]>,
    reference_point: &ObjectiveVector,
) -> Result<BaselineRun> {
    if budget == 0 || r == 0 {
        return Err(Error::domain("budget and replications must be at least 1"));
    }
    let mut rng = seeds::rng(seed, Stream::Baseline, 0);
    let mut observations = Vec::with_capacity(budget);
    for c in initial_design.unwrap_or(&[]).iter().take(budget) {
        observations.push(evaluate(evaluator, c.clone(), r)?);
    }
    while observations.len() < budget {
        let u: Vec<f64> = (0..space.dim()).map(|_| rng.random::<f64>()).collect();
        observations.push(evaluate(evaluator, space.decode(&u), r)?);
    }
    Ok(BaselineRun::from_observations(observations, reference_point))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaSettings {
    pub population: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    /// Blend-crossover extension factor.
    pub blend_alpha: f64,
    pub seed: u64,
}

impl Default for EaSettings {
    fn default() -> Self {
        Self {
            population: 20,
            generations: 2,
            crossover_probability: 0.9,
            mutation_probability: 0.5,
            blend_alpha: 0.5,
            seed: 0,
        }
    }
}

impl EaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::domain("population must be at least 2"));
        }
        for p in [self.crossover_probability, self.mutation_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain("probabilities must lie in [0, 1]"));
            }
        }
        if !(self.blend_alpha >= 0.0) || !self.blend_alpha.is_finite() {
            return Err(Error::domain("blend alpha must be finite and non-negative"));
        }
        Ok(())
    }

    /// Configurations evaluated: `P (1 + G)`.
    pub fn budget(&self) -> usize {
        self.population * (1 + self.generations)
    }
}

/// Constrained domination: feasible beats infeasible, two infeasible
/// points compare by pf, two feasible points by Pareto dominance of their
/// sample means.
pub fn constrained_dominates(a: &ReplicatedObservation, b: &ReplicatedObservation) -> bool {
    match (a.majority_feasible, b.majority_feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.pf > b.pf,
        (true, true) => dominates(&a.mean_objectives, &b.mean_objectives),
    }
}

/// Fast non-dominated sort; returns fronts of indices, best first.
pub fn nondominated_sort(pop: &[ReplicatedObservation]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && constrained_dominates(&pop[i], &pop[j]) {
                dominates_list[i].push(j);
            } else if i != j && constrained_dominates(&pop[j], &pop[i]) {
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front` (same order); boundary
/// points get `+inf`.
pub fn crowding_distance(pop: &[ReplicatedObservation], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    for obj in 0..2 {
        let value = |k: usize| pop[front[k]].mean_objectives.as_array()[obj];
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let span = value(order[m - 1]) - value(order[0]);
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        if span > 0.0 {
            for w in 1..m - 1 {
                dist[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / span;
            }
        }
    }
    dist
}

/// Rank and crowding distance for every member of `pop`.
fn rank_and_crowd(pop: &[ReplicatedObservation]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (r, front) in nondominated_sort(pop).iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(pop, front)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

/// Survivor selection: whole fronts first, the last one by crowding.
fn select_survivors(pop: &[ReplicatedObservation], size: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(size);
    for front in nondominated_sort(pop) {
        if chosen.len() + front.len() <= size {
            chosen.extend_from_slice(&front);
        } else {
            let d = crowding_distance(pop, &front);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
            chosen.extend(order.into_iter().take(size - chosen.len()).map(|k| front[k]));
        }
        if chosen.len() == size {
            break;
        }
    }
    chosen
}

fn tournament(rng: &mut Rng, rank: &[usize], crowd: &[f64]) -> usize {
    let a = rng.random_range(0..rank.len());
    let b = rng.random_range(0..rank.len());
    match rank[a].cmp(&rank[b]) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if crowd[b] > crowd[a] {
                b
            } else {
                a
            }
        }
    }
}

fn blend(rng: &mut Rng, a: &[f64], b: &[f64], alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let (lo, hi) = (x.min(y), x.max(y));
        let ext = alpha * (hi - lo);
        for child in [&mut c1, &mut c2] {
            let v = lo - ext + rng.random::<f64>() * (hi - lo + 2.0 * ext);
            child.push(v.clamp(0.0, 1.0));
        }
    }
    (c1, c2)
}

/// Resets each gene with probability `1/d`, at least one gene.
fn mutate(rng: &mut Rng, genes: &mut [f64]) {
    let d = genes.len();
    let mut any = false;
    for g in genes.iter_mut() {
        if rng.random::<f64>() < 1.0 / d as f64 {
            *g = rng.random();
            any = true;
        }
    }
    if !any {
        let k = rng.random_range(0..d);
        genes[k] = rng.random();
    }
}

/// Constrained NSGA-II evaluating exactly `P (1 + G)` configurations.
/// The initial population is `initial_population` when given (its first
/// `P` points), otherwise a Latin hypercube.
pub fn nsga2_constrained(
    settings: &EaSettings,
    r: usize,
    space: &DesignSpace,
    evaluator: &mut impl Evaluator,
    initial_population: Option<&[Configuration]>,
    reference_point: &ObjectiveVector,
) -> Result<BaselineRun> {
    settings.validate()?;
    if r == 0 {
        return Err(Error::domain("replications must be at least 1"));
    }
    let p = settings.population;
    let initial: Vec<Configuration> = match initial_population {
        Some(pts) if pts.len() >= p => pts[..p].to_vec(),
        Some(_) => return Err(Error::domain("initial population smaller than the population size")),
        None => latin_hypercube(p, space, derive(settings.seed, Stream::Design, 0))?.points,
    };
    let mut rng = seeds::rng(settings.seed, Stream::Baseline, 0);
    let mut archive = Vec::with_capacity(settings.budget());
    let mut population = Vec::with_capacity(p);
    for c in initial {
        let obs = evaluate(evaluator, c, r)?;
        archive.push(obs.clone());
        population.push(obs);
    }

    for _ in 0..settings.generations {
        let (rank, crowd) = rank_and_crowd(&population);
        let genes: Vec<Vec<f64>> = population
            .iter()
            .map(|o| space.encode(&o.config))
            .collect::<Result<_>>()?;
        let mut children: Vec<Vec<f64>> = Vec::with_capacity(p);
        while children.len() < p {
            let a = tournament(&mut rng, &rank, &crowd);
            let b = tournament(&mut rng, &rank, &crowd);
            let (mut c1, mut c2) = if rng.random::<f64>() < settings.crossover_probability {
                blend(&mut rng, &genes[a], &genes[b], settings.blend_alpha)
            } else {
                (genes[a].clone(), genes[b].clone())
            };
            for c in [&mut c1, &mut c2] {
                if rng.random::<f64>() < settings.mutation_probability {
                    mutate(&mut rng, c);
                }
            }
            children.push(c1);
            if children.len() < p {
                children.push(c2);
            }
        }
        let mut combined = population;
        for u in children {
            let obs = evaluate(evaluator, space.decode(&u), r)?;
            archive.push(obs.clone());
            combined.push(obs);
        }
        let keep = select_survivors(&combined, p);
        population = keep.into_iter().map(|i| combined[i].clone()).collect();
    }

    Ok(BaselineRun::from_observations(archive, reference_point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{pareto_filter, FailureMode, Outcome};
    use crate::metrics::DEFAULT_REFERENCE_POINT;
    use crate::simulator::{Simulator, SimulatorSettings};

    fn obs(pc: f64, ts: f64, pf_feasible: usize, r: usize) -> ReplicatedObservation {
        let outcomes = (0..r)
            .map(|i| Outcome {
                strength: ts,
                cost: pc,
                failure_mode: if i < pf_feasible { FailureMode::Cohesive } else { FailureMode::Adhesion },
                visual_damage: false,
            })
            .collect();
        ReplicatedObservation::new(Configuration::from_values_unchecked(vec![pc, ts]), outcomes).unwrap()
    }

    #[test]
    fn random_search_examples() {
        let space = DesignSpace::bonding();
        let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
        let one = random_search(1, 5, &space, &mut sim, 3, None, &DEFAULT_REFERENCE_POINT).unwrap();
        assert!(one.front.points.len() <= 1);
        assert_eq!(sim.calls(), 5);

        let go = || {
            let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
            random_search(30, 2, &space, &mut sim, 8, None, &DEFAULT_REFERENCE_POINT).unwrap()
        };
        let a = go();
        assert_eq!(a, go());
        let feasible: Vec<&ReplicatedObservation> = a.observations.iter().filter(|o| o.majority_feasible).collect();
        let brute: Vec<ObjectiveVector> = feasible
            .iter()
            .filter(|o| !feasible.iter().any(|p| dominates(&p.mean_objectives, &o.mean_objectives)))
            .map(|o| o.mean_objectives)
            .collect();
        assert_eq!(a.front.objectives().len(), brute.len());
        assert!(a.front.objectives().iter().all(|p| brute.contains(p)));
        assert!(a.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn random_search_uses_initial_design() {
        let space = DesignSpace::bonding();
        let design = latin_hypercube(4, &space, 1).unwrap().points;
        let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
        let run = random_search(6, 1, &space, &mut sim, 0, Some(&design), &DEFAULT_REFERENCE_POINT).unwrap();
        let told: Vec<&Configuration> = run.observations.iter().map(|o| &o.config).collect();
        assert_eq!(told[..4], design.iter().collect::<Vec<_>>()[..]);
    }

    #[test]
    fn nsga2_budget() {
        let space = DesignSpace::bonding();
        for (g, expected) in [(2, 60), (0, 20)] {
            let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
            let s = EaSettings { generations: g, seed: 4, ..Default::default() };
            let run = nsga2_constrained(&s, 5, &space, &mut sim, None, &DEFAULT_REFERENCE_POINT).unwrap();
            assert_eq!(run.observations.len(), expected);
            assert_eq!(sim.calls() as usize, expected * 5);
            assert!(run.observations.iter().all(|o| space.configuration(o.config.values().to_vec()).is_ok()));
        }
    }

    #[test]
    fn nsga2_initial_population_only_when_no_generations() {
        let space = DesignSpace::bonding();
        let design = latin_hypercube(6, &space, 2).unwrap().points;
        let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();
        let s = EaSettings { population: 6, generations: 0, ..Default::default() };
        let run = nsga2_constrained(&s, 2, &space, &mut sim, Some(&design), &DEFAULT_REFERENCE_POINT).unwrap();
        let told: Vec<Configuration> = run.observations.iter().map(|o| o.config.clone()).collect();
        assert_eq!(told, design);
    }

    #[test]
    fn infeasible_ranked_by_pf() {
        let pop = vec![obs(1.0, 10.0, 0, 5), obs(1.0, 10.0, 2, 5), obs(1.0, 10.0, 1, 5)];
        assert_eq!(nondominated_sort(&pop), vec![vec![1], vec![2], vec![0]]);
        assert_eq!(select_survivors(&pop, 2), vec![1, 2]);
    }

    #[test]
    fn feasible_beats_infeasible() {
        let feasible = obs(3.0, 1.0, 3, 5);
        let infeasible = obs(0.1, 40.0, 2, 5);
        assert!(constrained_dominates(&feasible, &infeasible));
        assert!(!constrained_dominates(&infeasible, &feasible));
    }

    #[test]
    fn crowding_boundaries_infinite() {
        let pop = vec![obs(1.0, 30.0, 5, 5), obs(2.0, 35.0, 5, 5), obs(3.0, 40.0, 5, 5), obs(1.5, 32.0, 5, 5)];
        let front = vec![0, 1, 2, 3];
        let d = crowding_distance(&pop, &front);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!(d[1].is_finite() && d[3].is_finite());
    }

    #[test]
    fn elitism_keeps_first_front() {
        use rand::SeedableRng;
        let mut rng = Rng::seed_from_u64(5);
        for _ in 0..20 {
            let pop: Vec<ReplicatedObservation> = (0..16)
                .map(|_| obs(rng.random_range(0.5..3.0), rng.random_range(1.0..40.0), rng.random_range(0..=5), 5))
                .collect();
            let keep = select_survivors(&pop, 8);
            let feasible: Vec<usize> = (0..pop.len()).filter(|&i| pop[i].majority_feasible).collect();
            let means: Vec<ObjectiveVector> = feasible.iter().map(|&i| pop[i].mean_objectives).collect();
            let best: Vec<usize> = pareto_filter(&means).into_iter().map(|k| feasible[k]).collect();
            if best.len() <= 8 {
                assert!(best.iter().all(|i| keep.contains(i)));
            }
        }
    }

    #[test]
    fn settings_validation() {
        assert!(EaSettings { population: 1, ..Default::default() }.validate().is_err());
        assert!(EaSettings { mutation_probability: 1.5, ..Default::default() }.validate().is_err());
        assert_eq!(EaSettings::default().budget(), 60);
    }
}
