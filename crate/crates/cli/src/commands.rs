//! Subcommand implementations. Each returns the process exit code on success.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gravimean::analytic;
use gravimean::grid::{expected_extent, init_gaussian};
use gravimean::monte_carlo::{derive_trial_seed, sample_fdiv};
use gravimean::units::classicality_report_with_ratio;
use gravimean::{
    run_ensemble, two_detector_table, CoherentTwoBranchState, Engine, FDivLaw, Forces, GridSpec, GridState,
    SplitStepSolver, TrialSetup,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{load_config, ConfigError, EngineName, ResolvedConfig};
use crate::manifest::RunManifest;
use crate::output::{emit_trajectory, TrajectoryRow};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CRITERIA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Environment variable capping the Monte Carlo worker count.
pub const THREADS_ENV: &str = "GRAVIMEAN_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Sim(#[from] gravimean::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Sim(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(name = "gravimean", version, about = "Gravitational mean-field measurement model simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the size bound, displacement and timing criteria.
    Criteria {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evolve the two-branch state and write a trajectory CSV.
    Evolve(EvolveArgs),
    /// Run the grid solver and the analytic propagator side by side.
    Compare(CompareArgs),
    /// Monte Carlo ensemble over the diverting force.
    BornMc(BornMcArgs),
    /// Two-detector probability tables.
    TwoDetector {
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Grid,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "grid-n")]
    pub grid_n: Option<usize>,
    #[arg(long = "grid-l")]
    pub grid_l: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Grid steps between recorded samples.
    #[arg(long = "sample-every", default_value_t = 100)]
    pub sample_every: usize,
}

impl GridArgs {
    fn resolve(&self, base: GridSpec) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(
            self.grid_l.unwrap_or(base.half_length),
            self.grid_n.unwrap_or(base.points),
            self.dt.unwrap_or(base.dt),
        )?)
    }
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub config: PathBuf,
    /// Final dimensionless time.
    #[arg(long = "t-max")]
    pub t_max: f64,
    /// Sampling interval of the analytic mode.
    #[arg(long = "dt-sample", default_value_t = 0.1)]
    pub dt_sample: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Seed for drawing the diverting force when the config gives it as uniform.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "t-max")]
    pub t_max: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BornMcArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to the config's `engine` key.
    #[arg(long, value_enum)]
    pub engine: Option<Mode>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli, command_line: Vec<String>) -> Result<u8, CliError> {
    match cli.command {
        Command::Criteria { config } => criteria(&config),
        Command::Evolve(args) => evolve(&args, command_line),
        Command::Compare(args) => compare(&args, command_line),
        Command::BornMc(args) => born_mc(&args, command_line),
        Command::TwoDetector { p } => {
            let table = two_detector_table(p)?;
            print_json(&table);
            Ok(EXIT_OK)
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    // a closed pipe (e.g. `| head`) is not an error for the run itself
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn criteria(path: &Path) -> Result<u8, CliError> {
    let cfg = load_config(path)?;
    let report = classicality_report_with_ratio(&cfg.apparatus, &cfg.measurement, cfg.sizebound_ratio);
    print_json(&report);
    Ok(if report.all_ok() { EXIT_OK } else { EXIT_CRITERIA })
}

/// Diverting force of a single deterministic run, dimensionless.
fn single_run_fdiv(cfg: &ResolvedConfig, seed: u64) -> f64 {
    match cfg.dimensionless.f_div {
        FDivLaw::Fixed { value } => value,
        FDivLaw::Uniform => sample_fdiv(derive_trial_seed(seed, 0), cfg.dimensionless.f_meas),
    }
}

fn positive_time(t_max: f64) -> Result<(), CliError> {
    if t_max > 0.0 && t_max.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--t-max must be positive, got {t_max}")))
    }
}

fn grid_initial_state(
    cfg: &ResolvedConfig,
    grid: &GridSpec,
    forces: Forces,
    t_max: f64,
) -> Result<(GridState, CoherentTwoBranchState), CliError> {
    let d = cfg.dimensionless;
    let coherent = cfg.initial.coherent_state(d.p, d.f_meas)?;
    let (wp, wm) = cfg.initial.widths();
    grid.check_extent(expected_extent(&coherent, forces, t_max), wp.max(wm))?;
    let state = GridState::new(
        init_gaussian(grid, coherent.plus.center, coherent.plus.velocity, wp)?,
        init_gaussian(grid, coherent.minus.center, coherent.minus.velocity, wm)?,
        d.p,
    )?;
    Ok((state, coherent))
}

fn evolve(args: &EvolveArgs, command_line: Vec<String>) -> Result<u8, CliError> {
    let cfg = load_config(&args.config)?;
    positive_time(args.t_max)?;
    let forces = Forces::new(cfg.dimensionless.f_meas, single_run_fdiv(&cfg, args.seed));
    let rows = match args.mode {
        Mode::Analytic => {
            if !cfg.initial.is_coherent() {
                return Err(CliError::Usage("analytic mode needs unit-width (coherent) branches".into()));
            }
            if !(args.dt_sample.is_finite() && args.dt_sample > 0.0) {
                return Err(CliError::Usage("--dt-sample must be positive".into()));
            }
            let s0 = cfg.initial.coherent_state(cfg.dimensionless.p, cfg.dimensionless.f_meas)?;
            let n = (args.t_max / args.dt_sample + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| {
                    let t = i as f64 * args.dt_sample;
                    analytic::evolve(&s0, forces, t, cfg.gamma).map(|s| TrajectoryRow::from_analytic(t, &s))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        Mode::Grid => {
            if cfg.gamma != 0.0 {
                return Err(CliError::Usage("damping (gamma) is only available in analytic mode".into()));
            }
            let grid = args.grid.resolve(cfg.grid)?;
            let (state, _) = grid_initial_state(&cfg, &grid, forces, args.t_max)?;
            let mut solver = SplitStepSolver::new(grid);
            let run = solver.evolve(state, forces, args.t_max, args.grid.sample_every)?;
            run.samples.iter().map(TrajectoryRow::from_grid).collect()
        }
    };
    emit_trajectory(&rows, &args.out).map_err(io_err(&args.out))?;
    RunManifest::new(&cfg, command_line, Some(args.seed)).write_for(&args.out).map_err(io_err(&args.out))?;
    Ok(EXIT_OK)
}

/// Largest deviations between grid and analytic trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub t_max: f64,
    pub samples: usize,
    pub grid: GridSpec,
    pub f_div: f64,
    pub max_abs_diff_x_plus: f64,
    pub max_abs_diff_x_minus: f64,
    pub max_abs_diff_xbar: f64,
    pub max_abs_diff_d: f64,
    pub max_width_deviation: f64,
    pub max_abs_diff: f64,
}

pub fn compare_trajectories(cfg: &ResolvedConfig, grid: GridSpec, t_max: f64, sample_every: usize, f_div: f64) -> Result<CompareReport, CliError> {
    if !cfg.initial.is_coherent() {
        return Err(CliError::Usage("compare needs unit-width (coherent) branches".into()));
    }
    let forces = Forces::new(cfg.dimensionless.f_meas, f_div);
    let (state, s0) = grid_initial_state(cfg, &grid, forces, t_max)?;
    let mut solver = SplitStepSolver::new(grid);
    let run = solver.evolve(state, forces, t_max, sample_every)?;
    let mut r = CompareReport {
        t_max,
        samples: run.samples.len(),
        grid,
        f_div,
        max_abs_diff_x_plus: 0.0,
        max_abs_diff_x_minus: 0.0,
        max_abs_diff_xbar: 0.0,
        max_abs_diff_d: 0.0,
        max_width_deviation: 0.0,
        max_abs_diff: 0.0,
    };
    for s in &run.samples {
        let a = analytic::evolve(&s0, forces, s.t, 0.0)?;
        r.max_abs_diff_x_plus = r.max_abs_diff_x_plus.max((s.x_plus - a.plus.center).abs());
        r.max_abs_diff_x_minus = r.max_abs_diff_x_minus.max((s.x_minus - a.minus.center).abs());
        r.max_abs_diff_xbar = r.max_abs_diff_xbar.max((s.moments.xbar - a.com()).abs());
        r.max_abs_diff_d = r.max_abs_diff_d.max((s.splitting() - a.splitting()).abs());
        r.max_width_deviation = r.max_width_deviation.max((s.width_plus - 1.0).abs()).max((s.width_minus - 1.0).abs());
    }
    r.max_abs_diff = r.max_abs_diff_x_plus.max(r.max_abs_diff_x_minus).max(r.max_abs_diff_xbar);
    Ok(r)
}

fn compare(args: &CompareArgs, command_line: Vec<String>) -> Result<u8, CliError> {
    let cfg = load_config(&args.config)?;
    positive_time(args.t_max)?;
    let grid = args.grid.resolve(cfg.grid)?;
    let report = compare_trajectories(&cfg, grid, args.t_max, args.grid.sample_every, single_run_fdiv(&cfg, args.seed))?;
    match &args.out {
        None => print_json(&report),
        Some(out) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            std::fs::write(out, text).map_err(io_err(out))?;
            RunManifest::new(&cfg, command_line, Some(args.seed)).write_for(out).map_err(io_err(out))?;
        }
    }
    Ok(EXIT_OK)
}

/// Worker count after applying the `GRAVIMEAN_THREADS` cap.
pub fn effective_workers(requested: Option<usize>, cap: Option<&str>) -> Result<usize, CliError> {
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut workers = requested.unwrap_or(default).max(1);
    if let Some(cap) = cap {
        let cap: usize = cap
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {cap:?}")))?;
        if cap == 0 {
            return Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer")));
        }
        workers = workers.min(cap);
    }
    Ok(workers)
}

fn born_mc(args: &BornMcArgs, command_line: Vec<String>) -> Result<u8, CliError> {
    let cfg = load_config(&args.config)?;
    let mode = args.engine.unwrap_or(match cfg.engine {
        EngineName::Analytic => Mode::Analytic,
        EngineName::Grid => Mode::Grid,
    });
    let engine = match mode {
        Mode::Analytic => Engine::Analytic,
        Mode::Grid => Engine::Grid { grid: cfg.grid },
    };
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let cap = std::env::var(THREADS_ENV).ok();
    let workers = effective_workers(args.workers, cap.as_deref())?;
    let d = cfg.dimensionless;
    let setup = TrialSetup::new(d.p, d.f_meas, d.f_div, d.tau, engine)?;
    let summary = run_ensemble(&setup, args.trials, args.seed, workers)?;
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    std::fs::write(&args.out, text).map_err(io_err(&args.out))?;
    RunManifest::new(&cfg, command_line, Some(args.seed)).write_for(&args.out).map_err(io_err(&args.out))?;
    Ok(EXIT_OK)
}
