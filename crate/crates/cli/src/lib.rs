//! The `tcoal` command-line tool.

pub mod error;
pub mod runner;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use tcoal_core::cannings::{parse_model, simulate_genealogy, Allocation, CanningsModel, ModelSpec, SimOptions, Stop};
use tcoal_core::harness::{
    self, clock_exponent, coalescence_scale, ComparisonReport, ExperimentSpec, FirstMergerMode,
};
use tcoal_core::limit::{drop_mutations, LimitSimulator};
use tcoal_core::measures::{parse_measure, LambdaMeasure, LiteralError};
use tcoal_core::profiles::{GenerationSchedule, ScheduleMode, SizeProfile, TimeChange};
use tcoal_core::scenario::{check_scenario, parse_scenario_bytes, render_scenario, ScenarioDocument};
use tcoal_core::seed::{replicate_rng, StreamTag};

pub use error::{CliError, Status};
use runner::PoolRunner;
use tcoal_core::harness::Runner;

#[derive(Debug, Parser)]
#[command(name = "tcoal", version, about = "Multiple-merger coalescents under fluctuating population size")]
pub struct Cli {
    /// Worker threads for replicate loops.
    #[arg(long, global = true, env = "TCOAL_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Merger rates, total rates and first-jump laws of a Λ-coalescent.
    Rates {
        #[arg(long)]
        measure: String,
        /// Largest number of blocks.
        #[arg(long = "n")]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Scenario file utilities.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Per-generation population sizes of a model under a scenario.
    Schedule(ScheduleArgs),
    /// Simulate genealogies.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Run a convergence experiment and report the distance to its reference.
    Compare {
        #[arg(value_enum)]
        experiment: Experiment,
        #[command(flatten)]
        args: CompareArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Validate a scenario and summarise it on `[0, horizon]`.
    Check {
        file: PathBuf,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Print the canonical form of a scenario.
    Render { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Ramped,
}

impl From<Mode> for ScheduleMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => ScheduleMode::Exact,
            Mode::Ramped => ScheduleMode::Ramped,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum AllocArg {
    ToMultiplying,
    ToNonrep,
    Proportional,
}

impl From<AllocArg> for Allocation {
    fn from(a: AllocArg) -> Self {
        match a {
            AllocArg::ToMultiplying => Allocation::ToMultiplying,
            AllocArg::ToNonrep => Allocation::ToNonReproducing,
            AllocArg::Proportional => Allocation::Proportional,
        }
    }
}

/// Options shared by everything that builds a generation schedule.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// `moran:<measure>`, `moran-thinned:<measure>,gamma=<g>` or `schweinsberg:alpha=<a>,C=<c>`.
    #[arg(long)]
    pub model: Option<String>,
    /// Reference population size.
    #[arg(long = "N")]
    pub size: Option<u64>,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long = "alloc", value_enum, default_value_t = AllocArg::ToNonrep)]
    pub allocation: AllocArg,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Coalescent-time horizon of the schedule.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Clock exponent; checked against the model.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Monte Carlo trials for calibrating c_N when it has no closed form.
    #[arg(long, default_value_t = 2000)]
    pub calibration_trials: u64,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Needed only when c_N is calibrated by simulation.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// The time-changed Λ-coalescent.
    Limit(LimitArgs),
    /// A Cannings model along a generation schedule.
    Cannings(CanningsArgs),
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long)]
    pub measure: String,
    #[arg(long = "n")]
    pub n: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mutation rate; mutations are dropped on branches at rate θ/2.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Event log (TSV); standard output when absent.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// One Newick tree per replicate.
    #[arg(long)]
    pub newick: Option<PathBuf>,
    /// Summary JSON; standard error when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CanningsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "n")]
    pub n: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    /// Step every generation instead of skipping over constant runs.
    #[arg(long)]
    pub no_skip: bool,
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Experiment {
    PairTime,
    FirstMerger,
    BlockCount,
    EmpiricalClock,
    NegativeControl,
    Shortfall,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Reference {
    Oracle,
    Limit,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "n")]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    /// Second scenario for a two-sample pair-time comparison.
    #[arg(long)]
    pub against: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// First-merger reference: one-generation oracle or the limit's first jump.
    #[arg(long, value_enum, default_value_t = Reference::Limit)]
    pub reference: Reference,
    /// Block-count times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
    /// Expansion factor for the negative control.
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Generations per replicate block for the shortfall experiment.
    #[arg(long, default_value_t = 1000)]
    pub generations: u64,
    #[arg(long)]
    pub no_skip: bool,
    /// Report JSON; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of the raw statistic values.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Record wall-clock runtime in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::config("--threads must be at least 1"));
    }
    let runner = PoolRunner::new(cli.threads).map_err(CliError::runtime)?;
    match cli.command {
        Command::Rates { measure, n_max, format } => cmd_rates(&measure, n_max, format),
        Command::Scenario(ScenarioCommand::Check { file, horizon }) => cmd_scenario_check(&file, horizon),
        Command::Scenario(ScenarioCommand::Render { file }) => {
            let doc = load_scenario(Some(&file))?;
            emit(None, &(render_scenario(&doc) + "\n"))
        }
        Command::Schedule(args) => cmd_schedule(&args),
        Command::Simulate(SimulateCommand::Limit(args)) => cmd_simulate_limit(&runner, &args),
        Command::Simulate(SimulateCommand::Cannings(args)) => cmd_simulate_cannings(&runner, &args),
        Command::Compare { experiment, args } => cmd_compare(&runner, experiment, &args),
    }
}

fn literal_error(what: &str, text: &str, e: LiteralError) -> CliError {
    let width = e.end.saturating_sub(e.start).max(1);
    CliError::config(format!(
        "invalid {what} `{text}`: {}\n  {text}\n  {}{}",
        e,
        " ".repeat(e.start),
        "^".repeat(width)
    ))
}

fn measure_literal(text: &str) -> Result<LambdaMeasure, CliError> {
    parse_measure(text).map_err(|e| literal_error("measure", text, e))
}

fn model_literal(text: &str) -> Result<ModelSpec, CliError> {
    parse_model(text).map_err(|e| literal_error("model", text, e))
}

/// Reads a scenario file, or the constant profile `ν ≡ 1` when none is given.
pub fn load_scenario(path: Option<&Path>) -> Result<ScenarioDocument, CliError> {
    let Some(path) = path else {
        return Ok(ScenarioDocument::from_profile(SizeProfile::constant(1.0).expect("constant profile")));
    };
    let bytes = fs::read(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario_bytes(&bytes).map_err(|e| {
        let mut msg = format!("{}:{}: {}", path.display(), e.span, e.message);
        if let Some(r) = e.related {
            let _ = write!(msg, " (see {}:{})", path.display(), r);
        }
        CliError::config(msg)
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_summary(path: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json") + "\n";
    match path {
        Some(_) => emit(path, &text),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn cmd_rates(measure: &str, n_max: u64, format: Format) -> Result<(), CliError> {
    if n_max > 10_000 {
        return Err(CliError::config("dense rate tables are limited to n <= 10000"));
    }
    let m = measure_literal(measure)?;
    let table = m.rate_table(n_max).map_err(CliError::config)?;
    let text = match format {
        Format::Json => {
            let rows: Vec<Value> = (2..=n_max)
                .map(|b| {
                    let i = (b - 2) as usize;
                    json!({
                        "b": b,
                        "lambda_b": table.totals[i],
                        "lambda_bk": table.rates[i],
                        "first_jump": table.first_jump[i].probs(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "measure": m.to_string(), "n": n_max, "rates": rows }))
                .expect("json")
                + "\n"
        }
        Format::Tsv => {
            let mut s = String::from("b\tk\tlambda_bk\tlambda_b\tfirst_jump\n");
            for b in 2..=n_max {
                let i = (b - 2) as usize;
                for k in 2..=b {
                    let _ = writeln!(
                        s,
                        "{b}\t{k}\t{}\t{}\t{}",
                        table.rate(b, k),
                        table.totals[i],
                        table.first_jump[i].prob(k)
                    );
                }
            }
            s
        }
    };
    emit(None, &text)
}

fn cmd_scenario_check(file: &Path, horizon: Option<f64>) -> Result<(), CliError> {
    let doc = load_scenario(Some(file))?;
    let horizon = horizon.or(doc.defaults.horizon).unwrap_or(10.0);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::config(format!("horizon must be positive and finite, got {horizon}")));
    }
    let report = check_scenario(&doc, horizon);
    let jumps: Vec<Value> = report
        .discontinuities
        .iter()
        .map(|d| json!({ "time": d.time, "before": d.before, "after": d.after, "line": d.line }))
        .collect();
    let value = json!({
        "epochs": doc.epochs().len(),
        "labels": doc.labels,
        "horizon": report.horizon,
        "min": report.min,
        "max": report.max,
        "normalized": report.normalized,
        "discontinuities": jumps,
        "diagnostics": report.diagnostics,
    });
    emit(None, &(serde_json::to_string_pretty(&value).expect("json") + "\n"))
}

/// Model, scenario and clock settings resolved from the command line.
struct Resolved {
    model: ModelSpec,
    doc: ScenarioDocument,
    size: u64,
    gamma: Option<f64>,
    horizon: Option<f64>,
}

fn resolve(args: &ModelArgs, default_model: Option<&str>) -> Result<Resolved, CliError> {
    let text = args
        .model
        .as_deref()
        .or(default_model)
        .ok_or_else(|| CliError::config("--model is required"))?;
    let model = model_literal(text)?;
    let size = args.size.ok_or_else(|| CliError::config("--N is required"))?;
    let doc = load_scenario(args.scenario.as_deref())?;
    Ok(Resolved {
        model,
        size,
        gamma: args.gamma.or(doc.defaults.gamma),
        horizon: args.horizon.or(doc.defaults.horizon),
        doc,
    })
}

fn experiment_spec(r: &Resolved, args: &ModelArgs, n: u64, reps: u64, seed: u64) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(r.model.clone(), r.size, r.doc.profile().clone(), reps, seed);
    spec.allocation = args.allocation.into();
    spec.n = n;
    spec.gamma = r.gamma;
    spec.horizon = r.horizon;
    spec.mode = args.mode.into();
    spec.calibration_trials = args.calibration_trials;
    spec
}

/// Horizon: explicit, from the scenario, or where the clock reaches `tau`.
fn schedule_horizon(spec: &ExperimentSpec, tau: f64) -> Result<f64, CliError> {
    if let Some(h) = spec.horizon {
        return Ok(h);
    }
    let gamma = clock_exponent(&spec.model)?;
    let tc = TimeChange::new(spec.profile.clone(), gamma).map_err(CliError::config)?;
    tc.invert(tau)
        .map_err(|_| CliError::runtime(format!("the clock G never reaches {tau}; pass --horizon")))
}

fn cmd_schedule(args: &ScheduleArgs) -> Result<(), CliError> {
    let r = resolve(&args.model, None)?;
    if matches!(r.model, ModelSpec::Schweinsberg { .. }) && args.seed.is_none() {
        return Err(CliError::config("--seed is required to calibrate c_N for this model"));
    }
    let spec = experiment_spec(&r, &args.model, 2, 100, args.seed.unwrap_or(0));
    let cal = coalescence_scale(&spec)?;
    let horizon = schedule_horizon(&spec, 20.0)?;
    let caps = spec.model.growth_caps(spec.allocation, spec.size, cal.estimate)?;
    let schedule = GenerationSchedule::build(&spec.profile, spec.size, cal.estimate, horizon, caps, spec.mode)?;
    let mut text = String::from("generation\tsize\n");
    for &(g, size) in schedule.runs() {
        let _ = writeln!(text, "{g}\t{size}");
    }
    emit(None, &text)?;
    eprintln!(
        "c_N = {} ({}), last generation {}, distortion {}, {} warning(s)",
        cal.estimate,
        if cal.exact { "exact" } else { "calibrated" },
        schedule.last_generation(),
        schedule.distortion(),
        schedule.warnings().len()
    );
    Ok(())
}

fn tsv_float(x: f64) -> String {
    format!("{x}")
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut count) = (0.0, 0u64);
    for v in values {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

fn cmd_simulate_limit(runner: &PoolRunner, args: &LimitArgs) -> Result<(), CliError> {
    let measure = measure_literal(&args.measure)?;
    let doc = load_scenario(args.scenario.as_deref())?;
    let gamma = match args.gamma.or(doc.defaults.gamma) {
        Some(g) => g,
        None if doc.profile().is_constant() && doc.profile().eval(0.0) == 1.0 => 0.0,
        None => return Err(CliError::config("--gamma is required for a non-trivial scenario")),
    };
    let tc = TimeChange::new(doc.profile().clone(), gamma).map_err(CliError::config)?;
    let sim = LimitSimulator::new(&measure, args.n, tc)?;
    if let Some(theta) = args.theta {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(CliError::config(format!("theta must be finite and non-negative, got {theta}")));
        }
    }
    let trees = runner.map(args.reps, |i| {
        let mut rng = replicate_rng(args.seed, StreamTag::LIMIT, i);
        let mut g = sim.simulate(&mut rng);
        if let Some(theta) = args.theta {
            let mut mrng = replicate_rng(args.seed, StreamTag::MUTATIONS, i);
            drop_mutations(&mut g, theta, &mut mrng);
        }
        g
    });
    let mut events = String::from("replicate\ttime\tblocks_before\tmerger_size\tblocks_after\n");
    for (i, g) in trees.iter().enumerate() {
        for e in g.events() {
            let _ = writeln!(
                events,
                "{i}\t{}\t{}\t{}\t{}",
                tsv_float(e.time),
                e.blocks_before,
                e.merger_size,
                e.blocks_after
            );
        }
    }
    emit(args.events.as_deref(), &events)?;
    if let Some(path) = &args.newick {
        let mut text = String::new();
        for g in &trees {
            text.push_str(&g.to_newick()?);
            text.push('\n');
        }
        emit(Some(path), &text)?;
    }
    let incomplete = trees.iter().filter(|g| !g.is_complete()).count();
    let mut summary = Map::new();
    summary.insert("kind".into(), json!("limit"));
    summary.insert("measure".into(), json!(measure.to_string()));
    summary.insert("n".into(), json!(args.n));
    summary.insert("replicates".into(), json!(args.reps));
    summary.insert("seed".into(), json!(args.seed));
    summary.insert("gamma".into(), json!(gamma));
    summary.insert("incomplete".into(), json!(incomplete));
    summary.insert("mean_first_merger_time".into(), json!(mean(trees.iter().filter_map(|g| g.first_event_time()))));
    summary.insert("mean_tmrca".into(), json!(mean(trees.iter().filter_map(|g| g.tmrca()))));
    summary.insert(
        "mean_total_branch_length".into(),
        json!(mean(trees.iter().filter(|g| g.is_complete()).map(|g| g.total_branch_length()))),
    );
    if args.theta.is_some() {
        let total: u64 = trees.iter().map(|g| g.total_mutations()).sum();
        summary.insert("total_mutations".into(), json!(total));
        summary.insert("mean_mutations".into(), json!(total as f64 / args.reps.max(1) as f64));
    }
    emit_summary(args.summary.as_deref(), &Value::Object(summary))
}

fn cmd_simulate_cannings(runner: &PoolRunner, args: &CanningsArgs) -> Result<(), CliError> {
    let r = resolve(&args.model, None)?;
    let spec = experiment_spec(&r, &args.model, args.n, args.reps.max(100), args.seed);
    if let Some(g) = spec.gamma {
        let need = clock_exponent(&spec.model)?;
        if (g - need).abs() > 1e-12 {
            return Err(CliError::config(format!("clock exponent {g} does not match the model, which needs {need}")));
        }
    }
    let cal = coalescence_scale(&spec)?;
    let tau = if args.n > 2 { 40.0 } else { 20.0 };
    let horizon = schedule_horizon(&spec, tau)?;
    let prepared = harness::prepare(&spec, &spec.profile, cal, horizon)?;
    for note in spec.model.diagnostics(spec.allocation, spec.size)? {
        eprintln!("note: {note}");
    }
    let options = SimOptions {
        stop: Stop::Mrca,
        skip_ahead: !args.no_skip,
    };
    let model: &CanningsModel = &prepared.model;
    let runs = runner
        .map(args.reps, |i| {
            let mut rng = replicate_rng(args.seed, StreamTag::CANNINGS, i);
            simulate_genealogy(model, args.n, &prepared.schedule, options, &mut rng)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut events = String::from("replicate\tgeneration\tblocks_before\tmerger_size\tblocks_after\n");
    for (i, g) in runs.iter().enumerate() {
        for e in &g.events {
            let _ = writeln!(events, "{i}\t{}\t{}\t{}\t{}", e.generation, e.blocks_before, e.merger_size, e.blocks_after);
        }
    }
    emit(args.events.as_deref(), &events)?;
    let c = cal.estimate;
    let mut summary = Map::new();
    summary.insert("kind".into(), json!("cannings"));
    summary.insert("model".into(), json!(spec.model.to_string()));
    summary.insert("allocation".into(), json!(spec.allocation.name()));
    summary.insert("N".into(), json!(spec.size));
    summary.insert("n".into(), json!(args.n));
    summary.insert("replicates".into(), json!(args.reps));
    summary.insert("seed".into(), json!(args.seed));
    summary.insert("c_N".into(), json!(c));
    summary.insert("c_N_exact".into(), json!(cal.exact));
    if let Some(a) = cal.asymptotic {
        summary.insert("c_N_asymptotic".into(), json!(a));
    }
    summary.insert("horizon".into(), json!(horizon));
    summary.insert("generations".into(), json!(prepared.schedule.last_generation()));
    summary.insert("incomplete".into(), json!(runs.iter().filter(|g| !g.complete).count()));
    summary.insert("shortfalls".into(), json!(runs.iter().map(|g| g.shortfalls).sum::<u64>()));
    summary.insert(
        "mean_first_merger_time".into(),
        json!(mean(runs.iter().filter_map(|g| g.first_merger_generation()).map(|r| r as f64 * c))),
    );
    summary.insert(
        "mean_tmrca".into(),
        json!(mean(runs.iter().filter(|g| g.complete).map(|g| g.generations as f64 * c))),
    );
    emit_summary(args.summary.as_deref(), &Value::Object(summary))
}

fn report_json(report: &ComparisonReport, runtime: Option<f64>) -> Value {
    let spec: Map<String, Value> = report.spec.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let details: Map<String, Value> = report.details.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    json!({
        "experiment": report.experiment,
        "spec": spec,
        "statistic": report.statistic,
        "reference": report.reference,
        "distance": report.distance,
        "comparison": report.criterion.symbol(),
        "tolerance": report.tolerance,
        "critical_value": report.critical_value,
        "pass": report.pass,
        "n_reps": report.replicates,
        "runtime_s": runtime,
        "seed": report.seed,
        "details": details,
        "notes": report.notes,
    })
}

fn dump_csv(report: &ComparisonReport) -> String {
    let mut s = String::from("series,index,value\n");
    for series in &report.samples {
        for (i, v) in series.values.iter().enumerate() {
            let _ = writeln!(s, "{},{i},{v}", series.name);
        }
    }
    s
}

/// Runs one experiment and returns its report.
pub fn compare_report(
    runner: &PoolRunner,
    experiment: Experiment,
    args: &CompareArgs,
) -> Result<ComparisonReport, CliError> {
    let default_model = matches!(experiment, Experiment::NegativeControl).then_some("moran:kingman");
    let r = resolve(&args.model, default_model)?;
    let n_default = match experiment {
        Experiment::FirstMerger => 5,
        Experiment::BlockCount => 8,
        _ => 2,
    };
    let mut spec = experiment_spec(&r, &args.model, args.n.unwrap_or(n_default), args.reps, args.seed);
    spec.tolerance = args.tolerance;
    spec.skip_ahead = !args.no_skip;
    if let Some(path) = &args.against {
        spec.against = Some(load_scenario(Some(path))?.into_profile());
    }
    let report = match experiment {
        Experiment::PairTime => harness::pair_time_experiment(runner, &spec)?,
        Experiment::FirstMerger => {
            let mode = match args.reference {
                Reference::Oracle => FirstMergerMode::Oracle,
                Reference::Limit => FirstMergerMode::Limit,
            };
            harness::first_merger_experiment(runner, &spec, mode)?
        }
        Experiment::BlockCount => {
            if args.times.is_empty() {
                return Err(CliError::config("--times is required for block-count"));
            }
            harness::block_count_experiment(runner, &spec, &args.times)?
        }
        Experiment::EmpiricalClock => harness::empirical_clock_experiment(&spec)?,
        Experiment::NegativeControl => harness::negative_control_experiment(&spec, args.m)?,
        Experiment::Shortfall => harness::shortfall_experiment(runner, &spec, args.generations)?,
    };
    Ok(report)
}

fn cmd_compare(runner: &PoolRunner, experiment: Experiment, args: &CompareArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let report = compare_report(runner, experiment, args)?;
    let runtime = args.timing.then(|| start.elapsed().as_secs_f64());
    let value = report_json(&report, runtime);
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&value).expect("json") + "\n"))?;
    if let Some(path) = &args.dump {
        emit(Some(path), &dump_csv(&report))?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError {
            status: Status::ComparisonFailed,
            message: format!(
                "{}: distance {} violates {} {}",
                report.experiment,
                report.distance,
                report.criterion.symbol(),
                report.tolerance
            ),
        })
    }
}
