//! Fixtures shared by the benchmarks.

use gravimean::{smooth_initial_condition, Engine, FDivLaw, GridSpec, GridState, Result, TrialSetup};

/// Smooth two-branch state on the default grid, `p = 0.5`, unit measurement force.
pub fn smooth_grid_state(grid: &GridSpec) -> Result<GridState> {
    let s0 = smooth_initial_condition(0.5, 1.0, 0.0, 0.0)?;
    GridState::from_coherent(grid, &s0)
}

pub fn analytic_setup(p: f64) -> Result<TrialSetup> {
    TrialSetup::new(p, 1.0, FDivLaw::Uniform, 1.0, Engine::Analytic)
}

pub fn grid_setup(p: f64, grid: GridSpec) -> Result<TrialSetup> {
    TrialSetup::new(p, 1.0, FDivLaw::Uniform, 1.0, Engine::Grid { grid })
}
