//! Split-step Fourier integration of the two-branch mean-field Schrödinger system.
//!
//! Each branch sees the dimensionless potential
//!
//! ```text
//! V±(x) = x²/2 - xbar x ∓ f_meas x - f_div x + x2bar/2
//! ```
//!
//! where `xbar` and `x2bar` are the first two moments of the weighted density
//! `p |ψ+|² + (1 - p) |ψ-|²`. A step is half kinetic, full potential with the
//! moments taken from the half-kicked densities, half kinetic. The domain is
//! periodic; an edge-density guard catches packets that drift into the wrap.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::analytic::{equilibrium_splitting, CoherentTwoBranchState, Forces, SmoothCoefficients};
use crate::error::{Error, Result};
use crate::units::check_weight;

/// Branch norms may not move by more than this in a single step.
pub const STEP_NORM_TOLERANCE: f64 = 1e-8;
/// Moments are only meaningful for branches normalized to this tolerance.
pub const MOMENT_NORM_TOLERANCE: f64 = 1e-6;
/// Largest probability allowed in the outer 5% of the half-length on either side.
pub const EDGE_DENSITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// The grid covers `[-half_length, half_length)`.
    pub half_length: f64,
    /// Number of points, a power of two.
    pub points: usize,
    pub dt: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_length: 32.0, points: 1024, dt: 1e-3 }
    }
}

impl GridSpec {
    pub fn new(half_length: f64, points: usize, dt: f64) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Setup(format!("half length must be positive, got {half_length}")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::Setup(format!("grid points must be a power of two, got {points}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Setup(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { half_length, points, dt })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.points).map(|i| -self.half_length + i as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as isize;
        let dk = std::f64::consts::PI / self.half_length;
        (0..n).map(|i| if i < n / 2 { i } else { i - n } as f64 * dk).collect()
    }

    /// Rejects grids too short for packets reaching `max_abs_x` with widths up to `max_width`.
    pub fn check_extent(&self, max_abs_x: f64, max_width: f64) -> Result<()> {
        let needed = 8.0 + max_abs_x + 3.0 * max_width;
        if self.half_length < needed {
            return Err(Error::Setup(format!(
                "half length {} too small: packets reach |x| = {max_abs_x:.3} with width {max_width}, need >= {needed:.3}",
                self.half_length
            )));
        }
        Ok(())
    }
}

/// Upper bound on `|x±(t)|` over `[0, t_max]` for coherent branches, from the
/// closed-form undamped dynamics.
pub fn expected_extent(state: &CoherentTwoBranchState, forces: Forces, t_max: f64) -> f64 {
    let mean = SmoothCoefficients::from_state(state, forces);
    let mut com_max = mean.a.abs().max(mean.eval(t_max).abs());
    if mean.c != 0.0 {
        let vertex = -mean.b / (2.0 * mean.c);
        if vertex > 0.0 && vertex < t_max {
            com_max = com_max.max(mean.eval(vertex).abs());
        }
    }
    let (eq_plus, eq_minus, _) = equilibrium_splitting(state.p, forces.f_meas);
    let (d_plus, d_minus) = state.offsets();
    let v = state.com_velocity();
    let swing = |eq: f64, d: f64, w: f64| eq.abs() + (d - eq).abs() + w.abs();
    com_max
        + swing(eq_plus, d_plus, state.plus.velocity - v)
            .max(swing(eq_minus, d_minus, state.minus.velocity - v))
}

/// Normalized Gaussian with `<x> = center`, `<p> = velocity` and
/// `<x²> - <x>² = width² / 2`, so that width 1 is the oscillator ground state.
pub fn init_gaussian(grid: &GridSpec, center: f64, velocity: f64, width: f64) -> Result<Vec<Complex64>> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Setup(format!("packet width must be positive, got {width}")));
    }
    let margin = 5.0 * width;
    if !(center > -grid.half_length + margin && center < grid.half_length - margin) {
        return Err(Error::Setup(format!(
            "packet at {center} with width {width} is too close to the boundary of [-{L}, {L})",
            L = grid.half_length
        )));
    }
    let mut psi: Vec<Complex64> = grid
        .coordinates()
        .into_iter()
        .map(|x| {
            let u = (x - center) / width;
            Complex64::from_polar((-0.5 * u * u).exp(), velocity * x)
        })
        .collect();
    let norm = branch_stats(&psi, grid).norm;
    let scale = norm.sqrt().recip();
    psi.iter_mut().for_each(|z| *z *= scale);
    Ok(psi)
}

/// Zeroth, first and second moments of one branch density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchStats {
    pub norm: f64,
    /// `<x>` of the normalized density.
    pub mean: f64,
    /// `<x²>` of the normalized density.
    pub second: f64,
}

impl BranchStats {
    /// Width in the convention of [`init_gaussian`]: `sqrt(2 var)`.
    pub fn width(&self) -> f64 {
        (2.0 * (self.second - self.mean * self.mean)).max(0.0).sqrt()
    }
}

pub fn branch_stats(psi: &[Complex64], grid: &GridSpec) -> BranchStats {
    let dx = grid.dx();
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (i, z) in psi.iter().enumerate() {
        let x = -grid.half_length + i as f64 * dx;
        let rho = z.norm_sqr();
        s0 += rho;
        s1 += rho * x;
        s2 += rho * x * x;
    }
    BranchStats { norm: s0 * dx, mean: s1 / s0, second: s2 / s0 }
}

/// Probability in `|x| >= 0.95 L`.
pub fn edge_density(psi: &[Complex64], grid: &GridSpec) -> f64 {
    let cut = 0.95 * grid.half_length;
    let dx = grid.dx();
    psi.iter()
        .enumerate()
        .filter(|(i, _)| (-grid.half_length + *i as f64 * dx).abs() >= cut)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * dx
}

/// Moments of the weighted density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub xbar: f64,
    pub x2bar: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.x2bar - self.xbar * self.xbar
    }
}

/// Two-branch grid state. The spatially constant `x2bar / 2` potential only
/// rotates both branches by a common phase, kept exactly in `global_phase`;
/// the full branch wavefunctions are `psi± · exp(i global_phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub psi_plus: Vec<Complex64>,
    pub psi_minus: Vec<Complex64>,
    pub p: f64,
    pub t: f64,
    pub global_phase: f64,
}

impl GridState {
    pub fn new(psi_plus: Vec<Complex64>, psi_minus: Vec<Complex64>, p: f64) -> Result<Self> {
        check_weight(p)?;
        if psi_plus.len() != psi_minus.len() {
            return Err(Error::Setup("branch arrays differ in length".into()));
        }
        Ok(Self { psi_plus, psi_minus, p, t: 0.0, global_phase: 0.0 })
    }

    /// Samples the coherent branches of an analytic state onto the grid.
    pub fn from_coherent(grid: &GridSpec, state: &CoherentTwoBranchState) -> Result<Self> {
        Self::new(
            init_gaussian(grid, state.plus.center, state.plus.velocity, 1.0)?,
            init_gaussian(grid, state.minus.center, state.minus.velocity, 1.0)?,
            state.p,
        )
    }

    /// Branch wavefunctions with the accumulated global phase applied.
    pub fn wavefunctions(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let r = Complex64::cis(self.global_phase);
        (
            self.psi_plus.iter().map(|z| z * r).collect(),
            self.psi_minus.iter().map(|z| z * r).collect(),
        )
    }

    pub fn densities(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.psi_plus.iter().map(|z| z.norm_sqr()).collect(),
            self.psi_minus.iter().map(|z| z.norm_sqr()).collect(),
        )
    }
}

fn combine(p: f64, plus: &BranchStats, minus: &BranchStats) -> Moments {
    Moments {
        xbar: p * plus.mean + (1.0 - p) * minus.mean,
        x2bar: p * plus.second + (1.0 - p) * minus.second,
    }
}

fn check_norm(stats: &BranchStats, branch: &str, t: f64) -> Result<()> {
    if (stats.norm - 1.0).abs() > MOMENT_NORM_TOLERANCE {
        return Err(Error::Consistency(format!(
            "{branch} branch norm {} deviates from 1 at t = {t}",
            stats.norm
        )));
    }
    Ok(())
}

pub fn moments(state: &GridState, grid: &GridSpec) -> Result<Moments> {
    let plus = branch_stats(&state.psi_plus, grid);
    let minus = branch_stats(&state.psi_minus, grid);
    check_norm(&plus, "plus", state.t)?;
    check_norm(&minus, "minus", state.t)?;
    Ok(combine(state.p, &plus, &minus))
}

/// Observables recorded along a grid trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSample {
    pub t: f64,
    pub moments: Moments,
    pub x_plus: f64,
    pub x_minus: f64,
    pub width_plus: f64,
    pub width_minus: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub energy: f64,
}

impl GridSample {
    pub fn splitting(&self) -> f64 {
        self.x_plus - self.x_minus
    }
}

#[derive(Debug, Clone)]
pub struct GridRun {
    pub samples: Vec<GridSample>,
    pub final_state: GridState,
}

/// Strang-split propagator bound to one grid. Holds FFT plans and work buffers,
/// so it is cheap to step repeatedly and should be reused across runs.
pub struct SplitStepSolver {
    grid: GridSpec,
    x: Vec<f64>,
    harmonic_kick: Vec<Complex64>,
    k2: Vec<f64>,
    half_kinetic: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    global_phase: bool,
}

impl SplitStepSolver {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.points;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let x = grid.coordinates();
        let k2: Vec<f64> = grid.wavenumbers().iter().map(|k| k * k).collect();
        let inv_n = 1.0 / n as f64;
        // exp(-i (k²/2) (dt/2)), with the inverse-FFT normalization folded in
        let half_kinetic = k2
            .iter()
            .map(|&k2| Complex64::from_polar(inv_n, -0.25 * k2 * grid.dt))
            .collect();
        Self {
            grid,
            harmonic_kick: x.iter().map(|x| Complex64::cis(-0.5 * x * x * grid.dt)).collect(),
            x,
            k2,
            half_kinetic,
            fft,
            ifft,
            scratch: vec![Complex64::default(); scratch_len],
            global_phase: true,
        }
    }

    /// Whether the spatially constant `x2bar / 2` term is applied. It only
    /// rotates the global phase of each branch.
    pub fn with_global_phase(mut self, enabled: bool) -> Self {
        self.global_phase = enabled;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn check_len(&self, state: &GridState) -> Result<()> {
        if state.psi_plus.len() != self.grid.points || state.psi_minus.len() != self.grid.points {
            return Err(Error::Setup(format!(
                "state has {} points, solver grid has {}",
                state.psi_plus.len(),
                self.grid.points
            )));
        }
        Ok(())
    }

    fn half_kinetic(&mut self, psi: &mut [Complex64]) {
        self.fft.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(&self.half_kinetic).for_each(|(z, k)| *z *= k);
        self.ifft.process_with_scratch(psi, &mut self.scratch);
    }

    /// Multiplies by `exp(-i (x²/2 + slope x) dt)`. The linear factor is built by
    /// recurrence from an exact anchor at the start of each block.
    fn kick(&self, psi: &mut [Complex64], slope: f64) {
        const BLOCK: usize = 64;
        let theta = -slope * self.grid.dt;
        let ratio = Complex64::cis(theta * self.grid.dx());
        for ((zs, hs), xs) in psi.chunks_mut(BLOCK).zip(self.harmonic_kick.chunks(BLOCK)).zip(self.x.chunks(BLOCK)) {
            let mut linear = Complex64::cis(theta * xs[0]);
            for (z, h) in zs.iter_mut().zip(hs) {
                *z *= h * linear;
                linear *= ratio;
            }
        }
    }

    /// Advances `state` by one time step.
    pub fn step(&mut self, state: &mut GridState, forces: Forces) -> Result<()> {
        self.check_len(state)?;
        self.half_kinetic(&mut state.psi_plus);
        self.half_kinetic(&mut state.psi_minus);

        let plus = branch_stats(&state.psi_plus, &self.grid);
        let minus = branch_stats(&state.psi_minus, &self.grid);
        check_norm(&plus, "plus", state.t)?;
        check_norm(&minus, "minus", state.t)?;
        let m = combine(state.p, &plus, &minus);
        if self.global_phase {
            state.global_phase -= 0.5 * m.x2bar * self.grid.dt;
        }
        self.kick(&mut state.psi_plus, -m.xbar - forces.f_meas - forces.f_div);
        self.kick(&mut state.psi_minus, -m.xbar + forces.f_meas - forces.f_div);

        self.half_kinetic(&mut state.psi_plus);
        self.half_kinetic(&mut state.psi_minus);
        state.t += self.grid.dt;

        for (psi, before, name) in [(&state.psi_plus, plus.norm, "plus"), (&state.psi_minus, minus.norm, "minus")] {
            let after = branch_stats(psi, &self.grid).norm;
            if (after - before).abs() > STEP_NORM_TOLERANCE {
                return Err(Error::Numerical {
                    t: state.t,
                    message: format!("{name} branch norm drifted from {before} to {after} in one step"),
                });
            }
        }
        Ok(())
    }

    fn kinetic(&mut self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.fft.process_with_scratch(&mut buf, &mut self.scratch);
        let n = self.grid.points as f64;
        0.5 * self.grid.dx() / n * buf.iter().zip(&self.k2).map(|(z, k2)| k2 * z.norm_sqr()).sum::<f64>()
    }

    /// Expectation of the momentum operator, evaluated spectrally.
    pub fn momentum(&mut self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.fft.process_with_scratch(&mut buf, &mut self.scratch);
        let n = self.grid.points as f64;
        let k = self.grid.wavenumbers();
        self.grid.dx() / n * buf.iter().zip(&k).map(|(z, k)| k * z.norm_sqr()).sum::<f64>()
    }

    /// Conserved energy of the mean-field dynamics: weighted kinetic and
    /// external-force terms plus the self-gravity energy `(x2bar - xbar²) / 2`.
    pub fn energy(&mut self, state: &GridState, forces: Forces) -> Result<f64> {
        self.check_len(state)?;
        let plus = branch_stats(&state.psi_plus, &self.grid);
        let minus = branch_stats(&state.psi_minus, &self.grid);
        let m = combine(state.p, &plus, &minus);
        let e_plus = self.kinetic(&state.psi_plus) - (forces.f_meas + forces.f_div) * plus.mean * plus.norm;
        let e_minus = self.kinetic(&state.psi_minus) + (forces.f_meas - forces.f_div) * minus.mean * minus.norm;
        Ok(state.p * e_plus + (1.0 - state.p) * e_minus + 0.5 * m.variance())
    }

    pub fn sample(&mut self, state: &GridState, forces: Forces) -> Result<GridSample> {
        let plus = branch_stats(&state.psi_plus, &self.grid);
        let minus = branch_stats(&state.psi_minus, &self.grid);
        Ok(GridSample {
            t: state.t,
            moments: combine(state.p, &plus, &minus),
            x_plus: plus.mean,
            x_minus: minus.mean,
            width_plus: plus.width(),
            width_minus: minus.width(),
            norm_plus: plus.norm,
            norm_minus: minus.norm,
            energy: self.energy(state, forces)?,
        })
    }

    fn guard_edges(&self, state: &GridState) -> Result<()> {
        for (psi, name) in [(&state.psi_plus, "plus"), (&state.psi_minus, "minus")] {
            let edge = edge_density(psi, &self.grid);
            if edge > EDGE_DENSITY_TOLERANCE {
                return Err(Error::Numerical {
                    t: state.t,
                    message: format!("{name} branch has probability {edge:.3e} within 5% of the domain edge"),
                });
            }
        }
        Ok(())
    }

    /// Steps from `state0` until `t_max` (rounded to whole steps), recording a
    /// sample every `sample_every` steps and at the end.
    pub fn evolve(&mut self, state0: GridState, forces: Forces, t_max: f64, sample_every: usize) -> Result<GridRun> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::domain(format!("t_max must be positive, got {t_max}")));
        }
        let sample_every = sample_every.max(1);
        let steps = (t_max / self.grid.dt).round() as usize;
        let mut state = state0;
        self.guard_edges(&state)?;
        let mut samples = vec![self.sample(&state, forces)?];
        for i in 1..=steps {
            self.step(&mut state, forces)?;
            if i % sample_every == 0 || i == steps {
                self.guard_edges(&state)?;
                samples.push(self.sample(&state, forces)?);
            }
        }
        Ok(GridRun { samples, final_state: state })
    }

    /// Steps until `t_max` without recording, returning the final state.
    pub fn advance(&mut self, state0: GridState, forces: Forces, t_max: f64) -> Result<GridState> {
        let steps = (t_max / self.grid.dt).round() as usize;
        let mut state = state0;
        for _ in 0..steps {
            self.step(&mut state, forces)?;
        }
        self.guard_edges(&state)?;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::smooth_initial_condition;

    fn grid() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(32.0, 1000, 1e-3).is_err());
        assert!(GridSpec::new(0.0, 1024, 1e-3).is_err());
        assert!(GridSpec::new(32.0, 1024, 0.0).is_err());
        let g = GridSpec::new(32.0, 1024, 1e-3).unwrap();
        assert_eq!(g.dx(), 0.0625);
        assert!(g.check_extent(20.0, 1.0).is_ok());
        assert!(g.check_extent(22.0, 1.0).is_err());
    }

    #[test]
    fn ground_state_moments() {
        let g = grid();
        let psi = init_gaussian(&g, 0.0, 0.0, 1.0).unwrap();
        let s = branch_stats(&psi, &g);
        assert!((s.norm - 1.0).abs() < 1e-12);
        assert!(s.mean.abs() < 1e-10);
        assert!((s.second - 0.5).abs() < 1e-10);
    }

    #[test]
    fn gaussian_momentum() {
        let g = grid();
        let mut solver = SplitStepSolver::new(g);
        for v in [0.0, 0.37, -1.9] {
            let psi = init_gaussian(&g, 1.5, v, 1.0).unwrap();
            assert!((solver.momentum(&psi) - v).abs() < 1e-10, "v = {v}");
        }
    }

    #[test]
    fn constant_term_accumulates_global_phase() {
        let g = grid();
        let s0 = CoherentTwoBranchState::common_center(0.5, 0.0, 0.0).unwrap();
        let mut a = GridState::from_coherent(&g, &s0).unwrap();
        let mut b = a.clone();
        let mut with = SplitStepSolver::new(g);
        let mut without = SplitStepSolver::new(g).with_global_phase(false);
        for _ in 0..100 {
            with.step(&mut a, Forces::new(0.0, 0.0)).unwrap();
            without.step(&mut b, Forces::new(0.0, 0.0)).unwrap();
        }
        // ground state: x2bar = 1/2 throughout
        assert!((a.global_phase + 0.25 * 0.1).abs() < 1e-8);
        assert_eq!(b.global_phase, 0.0);
        assert_eq!(a.psi_plus, b.psi_plus);
        let (wa, _) = a.wavefunctions();
        let z = wa[g.points / 2] / a.psi_plus[g.points / 2];
        assert!((z.arg() - a.global_phase).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rejected_near_boundary() {
        let g = grid();
        assert!(init_gaussian(&g, 28.0, 0.0, 1.0).is_err());
        assert!(init_gaussian(&g, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn weighted_moment_cases() {
        let g = grid();
        let pair = |p: f64, a: f64, b: f64, w: f64| {
            GridState::new(init_gaussian(&g, a, 0.0, w).unwrap(), init_gaussian(&g, b, 0.0, w).unwrap(), p).unwrap()
        };
        let m = moments(&pair(0.5, 2.0, -2.0, 1.0), &g).unwrap();
        assert!(m.xbar.abs() < 1e-12);
        let m = moments(&pair(1.0, 1.7, 0.0, 1.3), &g).unwrap();
        assert!((m.xbar - 1.7).abs() < 1e-10);
        assert!((m.x2bar - (1.7 * 1.7 + 1.3 * 1.3 / 2.0)).abs() < 1e-10);
        let m = moments(&pair(0.3, 1.0, -1.0, 1.0), &g).unwrap();
        assert!((m.xbar + 0.4).abs() < 1e-12);
        assert!(m.variance() >= 0.0);
    }

    #[test]
    fn moments_reject_unnormalized() {
        let g = grid();
        let mut psi = init_gaussian(&g, 0.0, 0.0, 1.0).unwrap();
        psi.iter_mut().for_each(|z| *z *= 1.001);
        let s = GridState::new(psi.clone(), psi, 0.5).unwrap();
        assert!(matches!(moments(&s, &g), Err(Error::Consistency(_))));
    }

    #[test]
    fn self_consistent_ground_state_is_stationary() {
        // The split map breathes the exact ground state with amplitude ~dt²/8,
        // about 5e-8 in density at dt = 1e-3; dt = 2e-4 brings it to ~2e-9.
        let g = GridSpec { dt: 2e-4, ..grid() };
        let psi = init_gaussian(&g, 0.0, 0.0, 1.0).unwrap();
        let mut state = GridState::new(psi.clone(), psi, 1.0).unwrap();
        let (rho0, _) = state.densities();
        let mut solver = SplitStepSolver::new(g);
        for _ in 0..1000 {
            solver.step(&mut state, Forces::new(0.0, 0.0)).unwrap();
        }
        let (rho, _) = state.densities();
        let dev = rho.iter().zip(&rho0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-8, "max density deviation {dev}");
    }

    #[test]
    fn self_gravity_exerts_no_net_force() {
        let g = grid();
        let s0 = smooth_initial_condition(1.0, 0.0, 0.0, 0.0).unwrap();
        let mut solver = SplitStepSolver::new(g);
        let mut state = GridState::from_coherent(&g, &s0).unwrap();
        let forces = Forces::new(0.0, 1.0);
        for _ in 0..2000 {
            solver.step(&mut state, forces).unwrap();
        }
        let m = moments(&state, &g).unwrap();
        assert!((m.xbar - 2.0).abs() < 1e-6, "xbar(2) = {}", m.xbar);
    }

    #[test]
    fn energy_reflection_symmetry() {
        let g = grid();
        let mut solver = SplitStepSolver::new(g);
        let a = GridState::new(
            init_gaussian(&g, 1.2, 0.3, 1.0).unwrap(),
            init_gaussian(&g, -0.7, -0.1, 1.4).unwrap(),
            0.4,
        )
        .unwrap();
        let mirror = |psi: &[Complex64]| {
            // x_i -> -x_i maps index i to N - i (index 0 is -L, its mirror L is not on the grid)
            let n = psi.len();
            (0..n).map(|i| psi[(n - i) % n]).collect::<Vec<_>>()
        };
        let b = GridState::new(mirror(&a.psi_plus), mirror(&a.psi_minus), 0.4).unwrap();
        let f = Forces::new(0.0, 0.0);
        let (ea, eb) = (solver.energy(&a, f).unwrap(), solver.energy(&b, f).unwrap());
        assert!((ea - eb).abs() < 1e-12, "{ea} vs {eb}");
    }

    #[test]
    fn ground_state_energy() {
        let g = grid();
        let mut solver = SplitStepSolver::new(g);
        let psi = init_gaussian(&g, 0.0, 0.0, 1.0).unwrap();
        let s = GridState::new(psi.clone(), psi, 1.0).unwrap();
        // kinetic 1/4 plus self-gravity variance/2 = 1/4
        let e = solver.energy(&s, Forces::new(0.0, 0.0)).unwrap();
        assert!((e - 0.5).abs() < 1e-10, "E = {e}");
    }

    #[test]
    fn edge_guard_trips() {
        let g = GridSpec::new(8.0, 128, 1e-2).unwrap();
        let s0 = smooth_initial_condition(1.0, 0.0, 0.0, 0.0).unwrap();
        let mut solver = SplitStepSolver::new(g);
        let state = GridState::from_coherent(&g, &s0).unwrap();
        let err = solver.evolve(state, Forces::new(0.0, 2.0), 3.0, 10).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn evolve_sampling_layout() {
        let g = GridSpec::new(16.0, 256, 1e-2).unwrap();
        let s0 = smooth_initial_condition(0.5, 1.0, 0.0, 0.0).unwrap();
        let mut solver = SplitStepSolver::new(g);
        let run = solver.evolve(GridState::from_coherent(&g, &s0).unwrap(), Forces::new(1.0, 0.0), 1.05, 10).unwrap();
        let ts: Vec<f64> = run.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 12);
        assert_eq!(ts[0], 0.0);
        assert!((ts[11] - 1.05).abs() < 1e-12);
    }

    #[test]
    fn extent_bound_covers_oscillation() {
        let s0 = CoherentTwoBranchState::common_center(0.5, 0.0, 0.0).unwrap();
        let f = Forces::new(1.0, 0.0);
        assert!(expected_extent(&s0, f, 10.0) >= 2.0);
        let s0 = smooth_initial_condition(0.5, 1.0, 0.0, 0.0).unwrap();
        let e = expected_extent(&s0, Forces::new(1.0, 0.3), 10.0);
        assert!((e - 16.0).abs() < 1e-12);
    }
}
