//! Macro-replicated comparison of MO-GP against the baselines.
//!
//! Every macro-replication derives one seed from the plan seed. All
//! algorithms in that replication start from the same Latin hypercube
//! design and draw simulator noise from the same stream, so their HV curves
//! coincide until the design is exhausted.

use std::fmt;
use std::str::FromStr;

use mogp_core::baselines::{nsga2_constrained, random_search, EaSettings};
use mogp_core::campaign::run;
use mogp_core::doe::latin_hypercube;
use mogp_core::domain::ObjectiveVector;
use mogp_core::metrics::reference_front;
use mogp_core::seeds::{derive, Stream};
use mogp_core::simulator::{Simulator, SimulatorSettings};
use mogp_core::{CampaignSettings, FrontReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "mo-gp")]
    MoGp,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "nsga2")]
    Nsga2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::MoGp, Algorithm::Random, Algorithm::Nsga2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::MoGp => "mo-gp",
            Algorithm::Random => "random",
            Algorithm::Nsga2 => "nsga2",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| Error::Usage(format!("unknown algorithm {s:?}; valid names: mo-gp, random, nsga2")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub algorithms: Vec<Algorithm>,
    pub macro_reps: usize,
    pub gammas: Vec<f64>,
    pub seed: u64,
    /// MO-GP settings; also fixes the design size, budget and replications
    /// used by random search. The seed is replaced per macro-replication.
    pub campaign: CampaignSettings,
    /// NSGA-II settings; the seed is replaced per macro-replication.
    pub ea: EaSettings,
    /// Halton points for the noise-free reference front; 0 skips IGD+.
    pub reference_front_size: usize,
    pub reference_front_replications: usize,
}

impl Default for BenchmarkPlan {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            macro_reps: 50,
            gammas: vec![0.0, 0.30],
            seed: 0,
            campaign: CampaignSettings::default(),
            ea: EaSettings::default(),
            reference_front_size: 20_000,
            reference_front_replications: 5,
        }
    }
}

impl BenchmarkPlan {
    pub fn validate(&self) -> Result<()> {
        if self.macro_reps == 0 {
            return Err(Error::Usage("macro_reps must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Usage("at least one algorithm is required".into()));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| *g < 0.0 || !g.is_finite()) {
            return Err(Error::Usage("gamma values must be finite and non-negative".into()));
        }
        self.campaign.validate()?;
        if self.algorithms.contains(&Algorithm::Nsga2) {
            self.ea.validate()?;
        }
        Ok(())
    }

    pub fn rep_seed(&self, macro_rep: usize) -> u64 {
        derive(self.seed, Stream::MacroRep, macro_rep as u64)
    }
}

/// One algorithm × gamma × macro-replication run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub macro_rep: usize,
    /// Archive HV after each evaluated configuration.
    pub history: Vec<f64>,
    pub front: Option<FrontReport>,
    pub simulator_calls: u64,
    pub error: Option<String>,
}

impl CellResult {
    pub fn final_hv(&self) -> Option<f64> {
        self.front.as_ref().map(|f| f.hv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResults {
    pub cells: Vec<CellResult>,
    pub reference_front: Vec<ObjectiveVector>,
}

pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchmarkResults> {
    plan.validate()?;
    let reference = if plan.reference_front_size > 0 {
        reference_front(
            &SimulatorSettings::with_gamma(0.0),
            plan.reference_front_size,
            plan.reference_front_replications,
        )?
    } else {
        Vec::new()
    };
    let keys: Vec<(Algorithm, f64, usize)> = plan
        .algorithms
        .iter()
        .flat_map(|&a| plan.gammas.iter().flat_map(move |&g| (0..plan.macro_reps).map(move |r| (a, g, r))))
        .collect();
    let cells = keys
        .into_par_iter()
        .map(|(a, g, r)| run_cell(plan, a, g, r, &reference))
        .collect();
    Ok(BenchmarkResults {
        cells,
        reference_front: reference,
    })
}

/// Runs a single cell; failures are recorded in the result.
pub fn run_cell(plan: &BenchmarkPlan, algorithm: Algorithm, gamma: f64, macro_rep: usize, reference: &[ObjectiveVector]) -> CellResult {
    let mut cell = CellResult {
        algorithm,
        gamma,
        macro_rep,
        history: Vec::new(),
        front: None,
        simulator_calls: 0,
        error: None,
    };
    match run_cell_inner(plan, algorithm, gamma, macro_rep) {
        Ok((history, front, calls)) => {
            let reference = (!reference.is_empty()).then_some(reference);
            cell.front = Some(FrontReport::from_points(front.points, &plan.campaign.reference_point, reference));
            cell.history = history;
            cell.simulator_calls = calls;
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

fn run_cell_inner(
    plan: &BenchmarkPlan,
    algorithm: Algorithm,
    gamma: f64,
    macro_rep: usize,
) -> Result<(Vec<f64>, FrontReport, u64)> {
    let seed = plan.rep_seed(macro_rep);
    let settings = CampaignSettings {
        seed,
        ..plan.campaign.clone()
    };
    let space = &settings.space;
    let design_seed = derive(seed, Stream::Design, 0);
    let mut sim = Simulator::new(SimulatorSettings { gamma, seed, ..SimulatorSettings::default() })?;
    let r = settings.replications;
    let reference_point = settings.reference_point;
    let (history, front) = match algorithm {
        Algorithm::MoGp => {
            let (state, history) = run(settings, &mut sim)?;
            (history, state.current_front())
        }
        Algorithm::Random => {
            let design = latin_hypercube(settings.init_size, space, design_seed)?.points;
            let out = random_search(settings.budget(), r, space, &mut sim, seed, Some(&design), &reference_point)?;
            (out.history, out.front)
        }
        Algorithm::Nsga2 => {
            let ea = EaSettings { seed, ..plan.ea.clone() };
            let design = latin_hypercube(ea.population, space, design_seed)?.points;
            let out = nsga2_constrained(&ea, r, space, &mut sim, Some(&design), &reference_point)?;
            (out.history, out.front)
        }
    };
    Ok((history, front, sim.calls()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub reps: usize,
    pub hv_mean: f64,
    /// Mean over replications with a non-empty front; `None` when no
    /// reference front was computed or every front was empty.
    pub igd_plus_mean: Option<f64>,
    pub best_hv: bool,
    pub best_igd_plus: bool,
}

/// Mean final HV and IGD+ per algorithm and gamma, best values flagged
/// within each gamma.
pub fn summarize(results: &BenchmarkResults) -> Vec<SummaryRow> {
    let mut keys: Vec<(Algorithm, f64)> = Vec::new();
    for c in &results.cells {
        if !keys.iter().any(|k| k.0 == c.algorithm && k.1 == c.gamma) {
            keys.push((c.algorithm, c.gamma));
        }
    }
    let mut rows: Vec<SummaryRow> = keys
        .into_iter()
        .map(|(a, g)| {
            let cells: Vec<&CellResult> = results
                .cells
                .iter()
                .filter(|c| c.algorithm == a && c.gamma == g && c.error.is_none())
                .collect();
            let hvs: Vec<f64> = cells.iter().filter_map(|c| c.final_hv()).collect();
            let igds: Vec<f64> = cells.iter().filter_map(|c| c.front.as_ref().and_then(|f| f.igd_plus)).collect();
            SummaryRow {
                algorithm: a,
                gamma: g,
                reps: hvs.len(),
                hv_mean: mogp_core::math::mean(&hvs),
                igd_plus_mean: (!igds.is_empty()).then(|| mogp_core::math::mean(&igds)),
                best_hv: false,
                best_igd_plus: false,
            }
        })
        .collect();
    for i in 0..rows.len() {
        let g = rows[i].gamma;
        let peers: Vec<&SummaryRow> = rows.iter().filter(|r| r.gamma == g).collect();
        let best_hv = peers.iter().map(|r| r.hv_mean).fold(f64::NEG_INFINITY, f64::max);
        let best_igd = peers.iter().filter_map(|r| r.igd_plus_mean).fold(f64::INFINITY, f64::min);
        let (hv, igd) = (rows[i].hv_mean, rows[i].igd_plus_mean);
        rows[i].best_hv = hv == best_hv;
        rows[i].best_igd_plus = igd == Some(best_igd);
    }
    rows
}

/// Per-budget mean of the HV curves of one algorithm and gamma.
pub fn mean_curve(results: &BenchmarkResults, algorithm: Algorithm, gamma: f64) -> Vec<f64> {
    let curves: Vec<&Vec<f64>> = results
        .cells
        .iter()
        .filter(|c| c.algorithm == algorithm && c.gamma == gamma && c.error.is_none())
        .map(|c| &c.history)
        .collect();
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    (0..len)
        .map(|b| curves.iter().map(|c| c[b]).sum::<f64>() / curves.len() as f64)
        .collect()
}

/// Macro-replications with the best, median and worst final HV.
pub fn representative_reps(results: &BenchmarkResults, algorithm: Algorithm, gamma: f64) -> Option<[usize; 3]> {
    let mut ranked: Vec<(f64, usize)> = results
        .cells
        .iter()
        .filter(|c| c.algorithm == algorithm && c.gamma == gamma)
        .filter_map(|c| c.final_hv().map(|hv| (hv, c.macro_rep)))
        .collect();
    if ranked.is_empty() {
        return None;
    }
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    Some([ranked[0].1, ranked[(ranked.len() - 1) / 2].1, ranked[ranked.len() - 1].1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use mogp_core::pso::PsoSettings;
    use mogp_core::surrogate::FitOptions;

    fn small_plan(algorithms: Vec<Algorithm>) -> BenchmarkPlan {
        BenchmarkPlan {
            algorithms,
            macro_reps: 2,
            gammas: vec![0.3],
            seed: 5,
            campaign: CampaignSettings {
                init_size: 6,
                iterations: 3,
                replications: 2,
                fit: FitOptions { restarts: 2, ..FitOptions::default() },
                pso: PsoSettings { swarm_size: 20, ..PsoSettings::default() },
                ..CampaignSettings::default()
            },
            ea: EaSettings { population: 6, generations: 1, ..EaSettings::default() },
            reference_front_size: 200,
            reference_front_replications: 1,
        }
    }

    #[test]
    fn algorithm_names() {
        assert_eq!("nsga2".parse::<Algorithm>().unwrap(), Algorithm::Nsga2);
        let e = "cmopso".parse::<Algorithm>().unwrap_err().to_string();
        assert!(e.contains("mo-gp, random, nsga2"));
    }

    #[test]
    fn random_only_plan() {
        let plan = BenchmarkPlan {
            campaign: CampaignSettings { iterations: 40, ..small_plan(vec![]).campaign },
            ..small_plan(vec![Algorithm::Random])
        };
        let res = run_benchmark(&plan).unwrap();
        assert_eq!(res.cells.len(), 2);
        assert!(res.cells.iter().all(|c| c.history.len() == 46 && c.error.is_none()));
        let rows = summarize(&res);
        assert_eq!(rows.len(), 1);
        let hand = res.cells.iter().map(|c| c.final_hv().unwrap()).sum::<f64>() / 2.0;
        assert!((rows[0].hv_mean - hand).abs() < 1e-12);
        let curve = mean_curve(&res, Algorithm::Random, 0.3);
        assert_eq!(curve[10], (res.cells[0].history[10] + res.cells[1].history[10]) / 2.0);
    }

    #[test]
    fn shared_design_gives_equal_early_curves() {
        let plan = small_plan(vec![Algorithm::MoGp, Algorithm::Nsga2, Algorithm::Random]);
        let res = run_benchmark(&plan).unwrap();
        for rep in 0..2 {
            let hv_at = |a: Algorithm| res.cells.iter().find(|c| c.algorithm == a && c.macro_rep == rep).unwrap().history[5];
            assert_eq!(hv_at(Algorithm::MoGp), hv_at(Algorithm::Nsga2));
            assert_eq!(hv_at(Algorithm::MoGp), hv_at(Algorithm::Random));
        }
        let mo = res.cells.iter().find(|c| c.algorithm == Algorithm::MoGp).unwrap();
        assert_eq!(mo.simulator_calls, 18);
        assert_eq!(res, run_benchmark(&plan).unwrap());
        assert!(representative_reps(&res, Algorithm::MoGp, 0.3).is_some());
        assert!(res.cells.iter().all(|c| c.history.windows(2).all(|w| w[1] >= w[0])));
    }
}
