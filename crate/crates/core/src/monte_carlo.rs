//! Ensembles over the frozen diverting force and the two-detector table.
//!
//! # Seeding
//!
//! Trial `i` of an ensemble with master seed `S` uses
//!
//! ```text
//! z = S + (i + 1) * 0x9E3779B97F4A7C15            (wrapping u64 arithmetic)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! trial_seed = z ^ (z >> 31)
//! ```
//!
//! and draws its diverting force from `ChaCha8Rng::seed_from_u64(trial_seed)`:
//! the first `next_u64()` output `w` gives `u = (w >> 11) * 2^-53` and
//! `f_div = f_meas (2u - 1)`. Results therefore depend only on the master seed
//! and the trial index, never on the number of workers.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{smooth_initial_condition, total_force, Forces};
use crate::error::{Error, Result};
use crate::grid::{branch_stats, expected_extent, GridSpec, GridState, SplitStepSolver};
use crate::units::{check_weight, FDiv, MeasurementConfig, QuantityKind, Scales};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

pub fn derive_trial_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform variate in `[0, 1)` keyed by `trial_seed`.
fn unit_uniform(trial_seed: u64) -> f64 {
    let w = ChaCha8Rng::seed_from_u64(trial_seed).next_u64();
    (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Diverting force drawn uniformly from `[-f_meas, f_meas]`.
pub fn sample_fdiv(trial_seed: u64, f_meas: f64) -> f64 {
    f_meas * (2.0 * unit_uniform(trial_seed) - 1.0)
}

/// Diverting-force law in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FDivLaw {
    /// Uniform on `[-f_meas, f_meas]`.
    Uniform,
    Fixed { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Grid { grid: GridSpec },
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Grid { .. } => "grid",
        }
    }
}

/// Everything a trial needs, in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSetup {
    pub p: f64,
    pub f_meas: f64,
    pub f_div: FDivLaw,
    /// Measurement duration in units of `1 / omega_grav`.
    pub tau: f64,
    pub engine: Engine,
}

impl TrialSetup {
    pub fn new(p: f64, f_meas: f64, f_div: FDivLaw, tau: f64, engine: Engine) -> Result<Self> {
        check_weight(p)?;
        if !(f_meas >= 0.0 && f_meas.is_finite()) {
            return Err(Error::domain(format!("f_meas must be >= 0, got {f_meas}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        let setup = Self { p, f_meas, f_div, tau, engine };
        if let Engine::Grid { grid } = engine {
            // worst case over the diverting-force support
            let f_div_max = match f_div {
                FDivLaw::Uniform => f_meas,
                FDivLaw::Fixed { value } => value.abs(),
            };
            let s0 = smooth_initial_condition(p, f_meas, 0.0, 0.0)?;
            let reach = expected_extent(&s0, Forces::new(f_meas, f_div_max), tau)
                .max(expected_extent(&s0, Forces::new(f_meas, -f_div_max), tau));
            grid.check_extent(reach, 1.0)?;
        }
        Ok(setup)
    }

    pub fn from_config(cfg: &MeasurementConfig, scales: &Scales, engine: Engine) -> Result<Self> {
        let f_div = match cfg.f_div {
            FDiv::Uniform => FDivLaw::Uniform,
            FDiv::Fixed { value } => FDivLaw::Fixed { value: scales.to_dimensionless(value, QuantityKind::Force) },
        };
        Self::new(
            cfg.p,
            scales.to_dimensionless(cfg.f_meas, QuantityKind::Force),
            f_div,
            scales.to_dimensionless(cfg.tau_meas, QuantityKind::Time),
            engine,
        )
    }

    pub fn draw_fdiv(&self, trial_seed: u64) -> f64 {
        match self.f_div {
            FDivLaw::Uniform => sample_fdiv(trial_seed, self.f_meas),
            FDivLaw::Fixed { value } => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Right,
    Left,
    Undecided,
}

impl Outcome {
    pub fn from_sign(value: f64) -> Self {
        if value > 0.0 {
            Outcome::Right
        } else if value < 0.0 {
            Outcome::Left
        } else {
            Outcome::Undecided
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McTrialResult {
    pub index: u64,
    pub f_div_sample: f64,
    pub f_total: f64,
    pub outcome: Outcome,
    /// Displacement of the centre of mass over the measurement, beyond the initial drift.
    pub final_displacement: f64,
}

/// Runs one trial. The analytic engine classifies by the sign of the total
/// force; the grid engine evolves the smooth initial condition from rest for
/// `tau` and classifies by the sign of the measured mean displacement.
pub fn run_trial(setup: &TrialSetup, index: u64, trial_seed: u64) -> Result<McTrialResult> {
    match setup.engine {
        Engine::Analytic => Ok(analytic_trial(setup, index, trial_seed)),
        Engine::Grid { grid } => {
            let mut solver = SplitStepSolver::new(grid);
            grid_trial(setup, &mut solver, index, trial_seed)
        }
    }
}

fn analytic_trial(setup: &TrialSetup, index: u64, trial_seed: u64) -> McTrialResult {
    let f_div = setup.draw_fdiv(trial_seed);
    let f_total = total_force(setup.p, setup.f_meas, f_div);
    McTrialResult {
        index,
        f_div_sample: f_div,
        f_total,
        outcome: Outcome::from_sign(f_total),
        final_displacement: 0.5 * f_total * setup.tau * setup.tau,
    }
}

fn grid_trial(setup: &TrialSetup, solver: &mut SplitStepSolver, index: u64, trial_seed: u64) -> Result<McTrialResult> {
    let f_div = setup.draw_fdiv(trial_seed);
    let f_total = total_force(setup.p, setup.f_meas, f_div);
    let grid = *solver.grid();
    let mut run = || -> Result<f64> {
        let s0 = smooth_initial_condition(setup.p, setup.f_meas, 0.0, 0.0)?;
        let state0 = GridState::from_coherent(&grid, &s0)?;
        let xbar0 = weighted_mean(&state0, &grid);
        let end = solver.advance(state0, Forces::new(setup.f_meas, f_div), setup.tau)?;
        Ok(weighted_mean(&end, &grid) - xbar0)
    };
    let displacement = run().map_err(|e| Error::Trial { index, source: Box::new(e) })?;
    Ok(McTrialResult {
        index,
        f_div_sample: f_div,
        f_total,
        outcome: Outcome::from_sign(displacement),
        final_displacement: displacement,
    })
}

fn weighted_mean(state: &GridState, grid: &GridSpec) -> f64 {
    let plus = branch_stats(&state.psi_plus, grid);
    let minus = branch_stats(&state.psi_minus, grid);
    state.p * plus.mean + (1.0 - state.p) * minus.mean
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OutcomeCounts {
    pub right: u64,
    pub left: u64,
    pub undecided: u64,
}

impl OutcomeCounts {
    fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Right => self.right += 1,
            Outcome::Left => self.left += 1,
            Outcome::Undecided => self.undecided += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.right + self.left + self.undecided
    }
}

/// Wilson score interval at 95% confidence for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Some(((center - half).max(0.0), (center + half).min(1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub n_trials: u64,
    pub counts: OutcomeCounts,
    /// `right / (n_trials - undecided)`; absent when every trial was undecided.
    pub freq_right: Option<f64>,
    pub wilson_95: Option<(f64, f64)>,
    pub p: f64,
    pub master_seed: u64,
    pub engine: &'static str,
}

/// Runs `n_trials` independent trials on `workers` threads. Counts are
/// identical for every worker count. The first failing trial (lowest index)
/// aborts the ensemble.
pub fn run_ensemble(setup: &TrialSetup, n_trials: u64, master_seed: u64, workers: usize) -> Result<McSummary> {
    if n_trials == 0 {
        return Err(Error::domain("an ensemble needs at least one trial"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Setup(format!("cannot start worker pool: {e}")))?;

    let outcomes: Vec<Result<Outcome>> = pool.install(|| match setup.engine {
        Engine::Analytic => (0..n_trials)
            .into_par_iter()
            .map(|i| Ok(analytic_trial(setup, i, derive_trial_seed(master_seed, i)).outcome))
            .collect(),
        Engine::Grid { grid } => (0..n_trials)
            .into_par_iter()
            .map_init(
                || SplitStepSolver::new(grid),
                |solver, i| grid_trial(setup, solver, i, derive_trial_seed(master_seed, i)).map(|r| r.outcome),
            )
            .collect(),
    });

    let mut counts = OutcomeCounts::default();
    for outcome in outcomes {
        counts.record(outcome?);
    }
    let decided = counts.right + counts.left;
    Ok(McSummary {
        n_trials,
        counts,
        freq_right: (decided > 0).then(|| counts.right as f64 / decided as f64),
        wilson_95: wilson_interval(counts.right, decided),
        p: setup.p,
        master_seed,
        engine: setup.engine.name(),
    })
}

/// Joint firing probabilities of two detectors, ordered `(++, +-, -+, --)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoDetectorTable {
    pub p: f64,
    /// What the mean-field model yields: independent detectors.
    pub model_probs: [f64; 4],
    /// Perfectly anti-correlated reference.
    pub born_probs: [f64; 4],
}

impl TwoDetectorTable {
    pub fn tables_coincide(&self) -> bool {
        self.model_probs == self.born_probs
    }
}

pub fn two_detector_table(p: f64) -> Result<TwoDetectorTable> {
    check_weight(p)?;
    let q = 1.0 - p;
    Ok(TwoDetectorTable {
        p,
        model_probs: [p * q, p * p, q * q, q * p],
        born_probs: [0.0, p, q, 0.0],
    })
}
