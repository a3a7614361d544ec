//! Simulator for a two-branch measurement model in which an apparatus wave
//! packet is held together by its own mean-field gravity.
//!
//! * [`units`]: apparatus parameters, unit system and classicality criteria.
//! * [`analytic`]: closed-form coherent-state propagator.
//! * [`grid`]: split-step Fourier solver for arbitrary branch wave functions.
//! * [`monte_carlo`]: ensembles over the frozen diverting force.

pub mod analytic;
pub mod error;
pub mod grid;
pub mod monte_carlo;
pub mod units;

pub use analytic::{
    equilibrium_splitting, mean_trajectory, smooth_initial_condition, total_force, CoherentBranch,
    CoherentTwoBranchState, Forces, SmoothCoefficients,
};
pub use error::{Error, Result};
pub use grid::{init_gaussian, moments, GridRun, GridSample, GridSpec, GridState, Moments, SplitStepSolver};
pub use monte_carlo::{
    derive_trial_seed, run_ensemble, run_trial, sample_fdiv, two_detector_table, Engine, FDivLaw, McSummary,
    McTrialResult, Outcome, TrialSetup, TwoDetectorTable,
};
pub use units::{
    classicality_report, omega_grav, ApparatusParams, CriteriaReport, FDiv, MeasurementConfig, QuantityKind,
    Scales,
};
