// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every subcommand is a pure function of the config file bytes and the
//! flags: the same inputs produce byte-identical CSV files for any
//! `--workers` value.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use meanfield_core::estimation::{
    convergence_study, estimate_semigroup_limit, girsanov_estimate, limit_moment_check, moment_check, Query,
    RateOutcome, StudyParams,
};
use meanfield_core::finite::{simulate_finite, uniform_grid, FiniteParams};
use meanfield_core::generators::Generators;
use meanfield_core::limit::{default_dt, simulate_auxiliary, simulate_limit, LimitParams};
use meanfield_core::model::{Model, ModelSpec, ValidationReport};
use meanfield_core::rng::derive_seed;
use meanfield_core::testfn::TestFunction;
use thiserror::Error;

use crate::config::{self, ConfigError};
use crate::parallel::Parallel;
use crate::svg::{layer_two_plot, Series};
use crate::{csv, svg};

#[derive(Debug, Parser)]
#[command(name = "meanfield", version, about = "Two-layer mean-field neuron model: simulation and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model config; exits 1 when a check fails.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Simulate one trajectory of the finite system, the limit process or
    /// the auxiliary process.
    Simulate(SimulateArgs),
    /// Layer-2 trajectories for N = 100 and N = 1000 on [0, 10], as CSV and SVG.
    #[command(name = "reproduce-fig1")]
    ReproduceFig1(Fig1Args),
    /// Empirical convergence rate of the finite-N semigroup; exits 3 when
    /// the errors are noise-dominated.
    RateStudy(RateArgs),
    /// Both generators, their gap and the gap bound on a square grid.
    GeneratorCheck(GeneratorArgs),
    /// Direct and likelihood-reweighted estimates of the limit semigroup.
    GirsanovCheck(GirsanovArgs),
    /// Second-moment bound of the finite system and limit moments over time.
    MomentCheck(MomentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model config file; `ModelSpec::figure1` when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory, created if needed.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Finite,
    Limit,
    Auxiliary,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = SystemArg::Finite)]
    pub system: SystemArg,
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    #[arg(long, default_value_t = 10.0)]
    pub t: f64,
    /// Euler step; defaults to min(1e-3, t/1000).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y0: f64,
    /// Intervals of the uniform sampling grid.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// Also write an SVG plot of y.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "100,1000")]
    pub n_list: Vec<u64>,
    /// Single N; replaces --n-list.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 10.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "tanh_y")]
    pub g: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256,512,1024")]
    pub n_list: Vec<u64>,
    /// Replicas per finite-N estimate.
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    /// Replicas of the limit estimate; defaults to 4 × reps.
    #[arg(long)]
    pub reps_limit: Option<u64>,
    /// Euler step of the limit estimate; defaults to (and is capped at) 1e-4 · t.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value = "tanh_y")]
    pub g: String,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub n_list: Vec<u64>,
    /// Single N; replaces --n-list.
    #[arg(long)]
    pub n: Option<u64>,
    /// Points per axis.
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    /// Half-width of the square grid centred at the origin.
    #[arg(long, default_value_t = 3.0)]
    pub range: f64,
}

#[derive(Debug, Args)]
pub struct GirsanovArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "tanh_y")]
    pub g: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    pub n_list: Vec<u64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    /// Euler step of the limit moments.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Sampling times of the limit moments: t·k/steps for k = 1..=steps.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("invalid model: {0}")]
    Model(ValidationReport),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Simulation(meanfield_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("inconclusive: noise-dominated ({points_used} usable points)")]
    Inconclusive { points_used: usize },
}

impl From<meanfield_core::Error> for CliError {
    fn from(e: meanfield_core::Error) -> Self {
        match e {
            meanfield_core::Error::InvalidModel(r) => CliError::Model(r),
            meanfield_core::Error::InvalidParameter { name, reason } => {
                CliError::Usage(format!("invalid parameter `{name}`: {reason}"))
            }
            other => CliError::Simulation(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Model(_) | CliError::Usage(_) => 1,
            CliError::Simulation(_) | CliError::Io { .. } | CliError::CheckFailed(_) => 2,
            CliError::Inconclusive { .. } => 3,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn load_spec(path: Option<&Path>) -> CliResult<ModelSpec> {
    match path {
        Some(p) => Ok(config::load(p)?),
        None => Ok(ModelSpec::figure1()),
    }
}

fn load_model(path: Option<&Path>) -> CliResult<Model> {
    Ok(Model::new(load_spec(path)?)?)
}

fn runner(workers: usize) -> CliResult<Parallel> {
    Parallel::new(workers).map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

fn test_function(name: &str) -> CliResult<TestFunction> {
    TestFunction::by_name(name).ok_or_else(|| {
        let known: Vec<String> = TestFunction::catalog().iter().map(|g| g.name().to_string()).collect();
        CliError::Usage(format!("unknown test function `{name}` (known: {})", known.join(", ")))
    })
}

fn n_values(list: &[u64], single: Option<u64>) -> Vec<u64> {
    single.map_or_else(|| list.to_vec(), |n| vec![n])
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be a positive number, got {v}")))
    }
}

fn out_file(dir: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    Ok(dir.join(name))
}

fn write_file<F>(dir: &Path, name: &str, fill: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = out_file(dir, name)?;
    let io = |source| CliError::Io { path: path.display().to_string(), source };
    let mut w = BufWriter::new(File::create(&path).map_err(io)?);
    fill(&mut w).and_then(|_| w.flush()).map_err(io)?;
    Ok(path)
}

/// Runs a parsed command line. Progress and results go to stdout.
pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { config } => cmd_validate(config.as_deref()),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::ReproduceFig1(a) => cmd_reproduce_fig1(&a),
        Command::RateStudy(a) => cmd_rate_study(&a),
        Command::GeneratorCheck(a) => cmd_generator_check(&a),
        Command::GirsanovCheck(a) => cmd_girsanov_check(&a),
        Command::MomentCheck(a) => cmd_moment_check(&a),
    }
}

pub fn cmd_validate(path: Option<&Path>) -> CliResult {
    let spec = load_spec(path)?;
    let report = spec.validate();
    for c in &report.checks {
        let status = if c.passed { "ok" } else { "FAIL" };
        println!("{status:4} {:16} {}", c.name, c.detail);
    }
    if report.passed() {
        println!("{report}");
        Ok(())
    } else {
        Err(CliError::Model(report))
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult {
    let model = load_model(a.common.config.as_deref())?;
    let grid = uniform_grid(a.t, a.grid);
    let dt = positive("dt", a.dt.unwrap_or_else(|| default_dt(a.t)))?;
    let lp = LimitParams::new(a.x0, a.y0, a.t, dt);
    let (path, title) = match a.system {
        SystemArg::Finite => {
            let fp = FiniteParams::new(a.n, a.x0, a.y0, a.t);
            (simulate_finite(&model, &fp, &grid, a.common.seed)?, format!("finite system, N = {}", a.n))
        }
        SystemArg::Limit => (simulate_limit(&model, &lp, &grid, a.common.seed)?, "limit process".to_string()),
        SystemArg::Auxiliary => {
            let aux = simulate_auxiliary(&model, &lp, &grid, a.common.seed)?;
            let file = write_file(&a.common.out, "aux_path.csv", |w| csv::write_aux_path(w, &aux))?;
            println!("wrote {} (log weight {})", file.display(), aux.log_weight);
            let traj = meanfield_core::path::Trajectory { records: aux.records.iter().map(|r| r.record).collect() };
            (traj, "auxiliary process".to_string())
        }
    };
    if a.system != SystemArg::Auxiliary {
        let file = write_file(&a.common.out, "trajectory.csv", |w| csv::write_trajectory(w, &path))?;
        println!("wrote {} ({} records)", file.display(), path.len());
    }
    if a.svg {
        let plot = layer_two_plot(&title, &[Series { label: title.clone(), path: &path }]);
        let file = write_file(&a.common.out, "trajectory.svg", |w| w.write_all(plot.as_bytes()))?;
        println!("wrote {}", file.display());
    }
    Ok(())
}

pub fn cmd_reproduce_fig1(a: &Fig1Args) -> CliResult {
    let model = load_model(a.common.config.as_deref())?;
    let grid = uniform_grid(a.t, a.grid);
    let mut paths = Vec::new();
    for n in n_values(&a.n_list, a.n) {
        let fp = FiniteParams::new(n, 0.0, 0.0, a.t);
        let path = simulate_finite(&model, &fp, &grid, derive_seed(a.common.seed, n))?;
        let file = write_file(&a.common.out, &format!("fig1_N{n}.csv"), |w| csv::write_trajectory(w, &path))?;
        println!("wrote {} ({} resets)", file.display(), path.count("reset2"));
        paths.push((n, path));
    }
    let series: Vec<Series<'_>> = paths.iter().map(|(n, p)| Series { label: format!("N = {n}"), path: p }).collect();
    let plot = svg::layer_two_plot("Layer-2 potential Y^N with resets", &series);
    let file = write_file(&a.common.out, "fig1.svg", |w| w.write_all(plot.as_bytes()))?;
    println!("wrote {}", file.display());
    Ok(())
}

pub fn cmd_rate_study(a: &RateArgs) -> CliResult {
    let model = load_model(a.common.config.as_deref())?;
    let g = test_function(&a.g)?;
    let t = positive("t", a.t)?;
    let mut p = StudyParams::new(a.x0, a.y0, t, a.n_list.clone(), a.reps, a.common.seed);
    if let Some(r) = a.reps_limit {
        p.reps_limit = r;
    }
    if let Some(dt) = a.dt {
        p.dt = positive("dt", dt)?;
    }
    let report = convergence_study(&model, &g, &p, &runner(a.common.workers)?)?;
    let file = write_file(&a.common.out, "rate_study.csv", |w| csv::write_rate_study(w, &report))?;
    println!("wrote {}", file.display());
    let file = write_file(&a.common.out, "rate_summary.csv", |w| csv::write_rate_summary(w, &report))?;
    println!("wrote {}", file.display());
    match report.outcome {
        RateOutcome::Fitted { slope, ci_lo, ci_hi, points_used } => {
            println!("slope {slope} (95% CI [{ci_lo}, {ci_hi}]) over {points_used} points");
            Ok(())
        }
        RateOutcome::Inconclusive { points_used } => Err(CliError::Inconclusive { points_used }),
    }
}

pub fn cmd_generator_check(a: &GeneratorArgs) -> CliResult {
    let model = load_model(a.config.as_deref())?;
    let g = test_function(&a.g)?;
    if a.grid < 2 {
        return Err(CliError::Usage("--grid needs at least 2 points per axis".into()));
    }
    let gens = Generators::new(&model);
    let axis: Vec<f64> = (0..a.grid).map(|i| -a.range + 2.0 * a.range * i as f64 / (a.grid - 1) as f64).collect();
    let mut rows = Vec::new();
    for n in n_values(&a.n_list, a.n) {
        if n == 0 {
            return Err(CliError::Usage("N must be at least 1".into()));
        }
        for &x in &axis {
            for &y in &axis {
                rows.push(gens.report(n, &g, x, y)?);
            }
        }
    }
    let file = write_file(&a.out, "generator_check.csv", |w| csv::write_generator_check(w, &rows))?;
    let bad = rows.iter().filter(|r| !r.bound_satisfied).count();
    println!("wrote {} ({} rows, {bad} above the bound)", file.display(), rows.len());
    if bad == 0 {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("{bad} grid points exceed the gap bound")))
    }
}

pub fn cmd_girsanov_check(a: &GirsanovArgs) -> CliResult {
    let model = load_model(a.common.config.as_deref())?;
    let g = test_function(&a.g)?;
    let t = positive("t", a.t)?;
    let dt = positive("dt", a.dt.unwrap_or_else(|| default_dt(t)))?;
    let runner = runner(a.common.workers)?;
    let query = |tag| Query { x0: a.x0, y0: a.y0, t, reps: a.reps, seed: derive_seed(a.common.seed, tag) };
    let direct = estimate_semigroup_limit(&model, &g, &query(1), dt, &runner)?;
    let weighted = girsanov_estimate(&model, &g, &query(2), dt, &runner)?;
    let file = write_file(&a.common.out, "girsanov_check.csv", |w| csv::write_girsanov_check(w, &direct, &weighted))?;
    println!("wrote {}", file.display());
    let diff = (direct.mean - weighted.mean).abs();
    let se = direct.combined_stderr(&weighted);
    println!("limit {} ± {}, girsanov {} ± {}", direct.mean, direct.stderr, weighted.mean, weighted.stderr);
    if diff <= 3.0 * se {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("|difference| = {diff} exceeds 3 × {se}")))
    }
}

pub fn cmd_moment_check(a: &MomentArgs) -> CliResult {
    let model = load_model(a.common.config.as_deref())?;
    let runner = runner(a.common.workers)?;
    if !(a.t >= 0.0 && a.t.is_finite()) {
        return Err(CliError::Usage(format!("--t must be finite and >= 0, got {}", a.t)));
    }
    let mut rows = Vec::new();
    for n in n_values(&a.n_list, a.n) {
        rows.push(moment_check(&model, n, a.x0, a.t, a.reps, derive_seed(a.common.seed, n), &runner)?);
    }
    let file = write_file(&a.common.out, "moment_check.csv", |w| csv::write_moment_check(w, &rows))?;
    println!("wrote {}", file.display());

    let mut failed = Vec::new();
    for r in &rows {
        println!("N = {}: E[X²] = {} ± {}, bound {}", r.n, r.estimate.mean, r.estimate.stderr, r.bound);
        if !r.passed {
            failed.push(format!("N = {}", r.n));
        }
    }
    if a.t > 0.0 && a.steps > 0 {
        let times: Vec<f64> = (1..=a.steps).map(|k| a.t * k as f64 / a.steps as f64).collect();
        let dt = positive("dt", a.dt.unwrap_or_else(|| default_dt(a.t)))?;
        let seed = derive_seed(a.common.seed, u64::MAX);
        let lm = limit_moment_check(&model, a.x0, 0.0, &times, a.reps, dt, seed, &runner)?;
        let file = write_file(&a.common.out, "limit_moments.csv", |w| csv::write_limit_moments(w, &lm))?;
        println!("wrote {}", file.display());
        if !lm.finite {
            failed.push("limit moments".into());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}
