//! `mogp` command-line interface.
//!
//! Exit codes: 0 success, 2 usage error, 3 campaign state error (for
//! example a suggestion after the budget is spent), 4 I/O or format error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mogp_core::baselines::EaSettings;
use mogp_core::campaign::{run, Phase};
use mogp_core::metrics::{input_distribution, reference_front, FrontPoint, DEFAULT_REFERENCE_POINT};
use mogp_core::pso::PsoSettings;
use mogp_core::record::{format_configuration, parse_configuration};
use mogp_core::simulator::{Simulator, SimulatorSettings};
use mogp_core::surrogate::FitOptions;
use mogp_core::{CampaignSettings, CampaignState, DesignSpace, FrontReport};

use crate::benchmark::{run_benchmark, summarize, Algorithm, BenchmarkPlan};
use crate::{export, persist, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mogp", version, about = "Constrained multi-objective Bayesian optimization for noisy process design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a full campaign against the built-in simulator.
    Run(RunArgs),
    /// Create a campaign state file and print its initial design.
    Init(InitArgs),
    /// Print the next configuration to evaluate.
    Suggest(StateArg),
    /// Record the replication outcomes of a configuration.
    Tell(TellArgs),
    /// Export the current Pareto front as CSV.
    Front(FrontArgs),
    /// Compare algorithms over macro-replications.
    Benchmark(BenchmarkArgs),
    /// Compute a noise-free reference front from a Halton design.
    ReferenceFront(ReferenceArgs),
    /// Pool front CSVs and summarize the input distributions.
    AnalyzeInputs(AnalyzeArgs),
    /// Serve campaigns over HTTP.
    #[cfg(feature = "service")]
    Serve(ServeArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CampaignArgs {
    /// Total configurations evaluated (initial design plus infill points).
    #[arg(long, default_value_t = 60)]
    pub budget: usize,
    /// Initial Latin hypercube size.
    #[arg(long = "init", default_value_t = 20)]
    pub init: usize,
    /// Replications per configuration.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Likelihood restarts per surrogate fit.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Particle swarm size for the acquisition search.
    #[arg(long, default_value_t = 50)]
    pub swarm_size: usize,
}

impl CampaignArgs {
    pub fn settings(&self) -> Result<CampaignSettings> {
        if self.budget < self.init {
            return Err(Error::Usage(format!(
                "--budget ({}) must be at least --init ({})",
                self.budget, self.init
            )));
        }
        let settings = CampaignSettings {
            init_size: self.init,
            iterations: self.budget - self.init,
            replications: self.reps,
            seed: self.seed,
            fit: FitOptions { restarts: self.restarts, ..FitOptions::default() },
            pso: PsoSettings { swarm_size: self.swarm_size, ..PsoSettings::default() },
            ..CampaignSettings::default()
        };
        settings.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(settings)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub campaign: CampaignArgs,
    /// Relative contact-angle noise of the simulator.
    #[arg(long, default_value_t = 0.30)]
    pub gamma: f64,
    /// Where to write the final campaign state.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Where to write the front CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InitArgs {
    #[command(flatten)]
    pub campaign: CampaignArgs,
    #[arg(long)]
    pub state: PathBuf,
    /// Replace an existing state file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct StateArg {
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(Debug, Args)]
pub struct TellArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Configuration record, e.g. `v1=0,v2=400,v3=127.5,v4=1.1,v5=13,v6=1`.
    #[arg(long)]
    pub config: String,
    /// CSV with header `strength,cost,failure_mode,visual_damage`; `-` reads stdin.
    #[arg(long)]
    pub outcomes: PathBuf,
}

#[derive(Debug, Args)]
pub struct FrontArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Reference front CSV (`cost,strength`) for IGD+.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Comma-separated subset of mo-gp, random, nsga2.
    #[arg(long, default_value = "mo-gp,random,nsga2", value_delimiter = ',')]
    pub algos: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub macro_reps: usize,
    /// Comma-separated noise levels.
    #[arg(long, default_value = "0,0.30", value_delimiter = ',')]
    pub gamma: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub budget: usize,
    #[arg(long = "init", default_value_t = 20)]
    pub init: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Halton points for the reference front (0 disables IGD+).
    #[arg(long, default_value_t = 20_000)]
    pub reference_size: usize,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory for curves.csv, summary.csv, final_fronts.csv and reference_front.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Front CSV files (`front` or `final_fronts.csv` layout).
    #[arg(long, num_args = 1.., required = true)]
    pub fronts: Vec<PathBuf>,
    /// Only rows of this algorithm (final_fronts.csv input).
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "MOGP_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: String,
    #[arg(long, env = "MOGP_STATE_DIR", default_value = "campaigns")]
    pub state_dir: PathBuf,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Normal output goes to `out`, errors to stderr.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn front_csv(space: &DesignSpace, report: &FrontReport) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    export::write_front(&mut buf, space, report)?;
    Ok(buf)
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run(a) => cmd_run(a, out),
        Command::Init(a) => cmd_init(a, out),
        Command::Suggest(a) => cmd_suggest(a, out),
        Command::Tell(a) => cmd_tell(a, out),
        Command::Front(a) => cmd_front(a, out),
        Command::Benchmark(a) => cmd_benchmark(a, out),
        Command::ReferenceFront(a) => cmd_reference(a, out),
        Command::AnalyzeInputs(a) => cmd_analyze(a, out),
        #[cfg(feature = "service")]
        Command::Serve(a) => crate::service::serve_blocking(&a.addr, &a.state_dir),
    }
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<()> {
    let settings = a.campaign.settings()?;
    let sim_settings = SimulatorSettings { gamma: a.gamma, seed: settings.seed, ..SimulatorSettings::default() };
    sim_settings.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let mut sim = Simulator::new(sim_settings)?;
    let (state, _) = run(settings, &mut sim)?;
    let report = state.current_front();
    if let Some(path) = &a.state {
        persist::save(&state, path)?;
    }
    let csv = front_csv(&state.settings.space, &report)?;
    match &a.out {
        Some(path) => write_file(path, &csv)?,
        None => emit(out, &String::from_utf8_lossy(&csv))?,
    }
    emit(
        out,
        &format!(
            "configurations={} simulator_calls={} front_points={} final_hv={}\n",
            state.observations.len(),
            sim.calls(),
            report.points.len(),
            report.hv
        ),
    )
}

fn cmd_init(a: InitArgs, out: &mut dyn Write) -> Result<()> {
    if a.state.exists() && !a.force {
        return Err(Error::Usage(format!(
            "{} already exists (use --force to replace it)",
            a.state.display()
        )));
    }
    let state = CampaignState::initialize(a.campaign.settings()?)?;
    persist::save(&state, &a.state)?;
    let space = &state.settings.space;
    let text: String = state.design.iter().map(|c| format_configuration(space, c) + "\n").collect();
    emit(out, &text)
}

fn cmd_suggest(a: StateArg, out: &mut dyn Write) -> Result<()> {
    let mut state = persist::load(&a.state)?;
    let space = state.settings.space.clone();
    let config = match state.phase() {
        Phase::Design => state.next_design_point().cloned().expect("design phase has an untold point"),
        _ => {
            let had_pending = state.pending.is_some();
            let c = state.suggest()?;
            if !had_pending {
                persist::save(&state, &a.state)?;
            }
            c
        }
    };
    emit(out, &(format_configuration(&space, &config) + "\n"))
}

fn cmd_tell(a: TellArgs, out: &mut dyn Write) -> Result<()> {
    let mut state = persist::load(&a.state)?;
    let space = state.settings.space.clone();
    let config = parse_configuration(&space, &a.config)?;
    let outcomes = if a.outcomes.as_os_str() == "-" {
        export::read_outcomes(std::io::stdin().lock())?
    } else {
        let f = fs::File::open(&a.outcomes).map_err(|e| Error::io(&a.outcomes, e))?;
        export::read_outcomes(f)?
    };
    let obs = state.tell(&config, outcomes)?.clone();
    persist::save(&state, &a.state)?;
    emit(
        out,
        &format!(
            "pf={} strength_mean={} cost_mean={} evaluated={}/{}\n",
            obs.pf,
            obs.mean_objectives.strength(),
            obs.mean_objectives.pc,
            state.observations.len(),
            state.settings.budget()
        ),
    )
}

fn cmd_front(a: FrontArgs, out: &mut dyn Write) -> Result<()> {
    let state = persist::load(&a.state)?;
    let mut report = state.current_front();
    if let Some(path) = &a.reference {
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reference = export::read_reference_front(f)?;
        report = FrontReport::from_points(report.points, &state.settings.reference_point, Some(&reference));
    }
    let csv = front_csv(&state.settings.space, &report)?;
    match &a.out {
        Some(path) => write_file(path, &csv),
        None => emit(out, &String::from_utf8_lossy(&csv)),
    }
}

fn cmd_benchmark(a: BenchmarkArgs, out: &mut dyn Write) -> Result<()> {
    let algorithms = a.algos.iter().map(|s| s.parse()).collect::<Result<Vec<Algorithm>>>()?;
    let campaign = CampaignArgs {
        budget: a.budget,
        init: a.init,
        reps: a.reps,
        seed: a.seed,
        restarts: 10,
        swarm_size: 50,
    }
    .settings()?;
    if campaign.budget() % campaign.init_size != 0 && algorithms.contains(&Algorithm::Nsga2) {
        return Err(Error::Usage(format!(
            "nsga2 evaluates P(1+G) configurations; --budget {} is not a multiple of --init {}",
            a.budget, a.init
        )));
    }
    let plan = BenchmarkPlan {
        algorithms,
        macro_reps: a.macro_reps,
        gammas: a.gamma.clone(),
        seed: a.seed,
        ea: EaSettings {
            population: campaign.init_size,
            generations: campaign.budget() / campaign.init_size - 1,
            ..EaSettings::default()
        },
        campaign,
        reference_front_size: a.reference_size,
        reference_front_replications: 5,
    };
    plan.validate()?;
    let results = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Usage(e.to_string()))?
            .install(|| run_benchmark(&plan))?,
        None => run_benchmark(&plan)?,
    };
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let space = &plan.campaign.space;
    let rows = summarize(&results);
    let mut buf = Vec::new();
    export::write_curves(&mut buf, &results)?;
    write_file(&a.out.join("curves.csv"), &buf)?;
    buf.clear();
    export::write_summary(&mut buf, &rows)?;
    write_file(&a.out.join("summary.csv"), &buf)?;
    buf.clear();
    export::write_final_fronts(&mut buf, space, &results)?;
    write_file(&a.out.join("final_fronts.csv"), &buf)?;
    if !results.reference_front.is_empty() {
        buf.clear();
        export::write_reference_front(&mut buf, &results.reference_front)?;
        write_file(&a.out.join("reference_front.csv"), &buf)?;
    }
    let mut text = String::from("algorithm  gamma  hv_mean  igd_plus_mean\n");
    for r in &rows {
        text += &format!(
            "{:<9}  {:<5}  {:.4}{}  {}{}\n",
            r.algorithm,
            r.gamma,
            r.hv_mean,
            if r.best_hv { "*" } else { " " },
            r.igd_plus_mean.map_or("-".to_string(), |v| format!("{v:.4}")),
            if r.best_igd_plus { "*" } else { "" }
        );
    }
    for c in results.cells.iter().filter(|c| c.error.is_some()) {
        text += &format!(
            "failed: {} gamma={} rep={}: {}\n",
            c.algorithm,
            c.gamma,
            c.macro_rep,
            c.error.as_deref().unwrap_or_default()
        );
    }
    emit(out, &text)
}

fn cmd_reference(a: ReferenceArgs, out: &mut dyn Write) -> Result<()> {
    if a.n == 0 || a.reps == 0 {
        return Err(Error::Usage("--n and --reps must be at least 1".into()));
    }
    let front = reference_front(&SimulatorSettings::with_gamma(0.0), a.n, a.reps)?;
    let mut buf = Vec::new();
    export::write_reference_front(&mut buf, &front)?;
    match &a.out {
        Some(path) => write_file(path, &buf),
        None => emit(out, &String::from_utf8_lossy(&buf)),
    }
}

fn cmd_analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let space = DesignSpace::bonding();
    let mut fronts = Vec::new();
    for path in &a.fronts {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let text = match &a.algorithm {
            Some(alg) => filter_algorithm(&text, alg)?,
            None => text,
        };
        let points: Vec<FrontPoint> = export::read_front_points(text.as_bytes(), &space)?;
        fronts.push(FrontReport::from_points(points, &DEFAULT_REFERENCE_POINT, None));
    }
    let dist = input_distribution(&space, &fronts);
    let mut buf = Vec::new();
    export::write_input_distribution(&mut buf, &dist)?;
    match &a.out {
        Some(path) => write_file(path, &buf),
        None => emit(out, &String::from_utf8_lossy(&buf)),
    }
}

/// Keeps the header and the rows whose `algorithm` column equals `alg`.
fn filter_algorithm(text: &str, alg: &str) -> Result<String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h == "algorithm")
        .ok_or_else(|| Error::Format("--algorithm needs an `algorithm` column".into()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&headers)?;
    for rec in r.records() {
        let rec = rec?;
        if rec.get(col) == Some(alg) {
            w.write_record(&rec)?;
        }
    }
    w.into_inner().map(|b| String::from_utf8_lossy(&b).into_owned()).map_err(|e| Error::Format(e.to_string()))
}
