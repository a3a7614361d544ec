//! Closed-form evolution of two coherent-state branches.
//!
//! In dimensionless units each branch centre obeys
//!
//! ```text
//! x+'' = -(x+ - xbar) + f_meas + f_div
//! x-'' = -(x- - xbar) - f_meas + f_div
//! ```
//!
//! with `xbar = p x+ + (1 - p) x-`. The weighted mean therefore accelerates
//! uniformly under the total force, while the offsets `delta± = x± - xbar`
//! oscillate at unit frequency around fixed equilibrium values. An optional
//! phenomenological damping `gamma` acts on the offsets only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::check_weight;

/// Constant forces acting on the apparatus, in units of `M omega^2 x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Forces {
    pub f_meas: f64,
    pub f_div: f64,
}

impl Forces {
    pub fn new(f_meas: f64, f_div: f64) -> Self {
        Self { f_meas, f_div }
    }
}

/// Mean-field force on the centre of mass: `2 (p - 1/2) f_meas + f_div`.
pub fn total_force(p: f64, f_meas: f64, f_div: f64) -> f64 {
    2.0 * (p - 0.5) * f_meas + f_div
}

/// Branch offsets `(delta+*, delta-*, d*)` relative to the weighted mean for
/// which both branches accelerate together with the mean.
pub fn equilibrium_splitting(p: f64, f_meas: f64) -> (f64, f64, f64) {
    let plus = 2.0 * (1.0 - p) * f_meas;
    let minus = -2.0 * p * f_meas;
    (plus, minus, plus - minus)
}

/// A coherent state of the unit-frequency oscillator. The width is pinned at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentBranch {
    pub center: f64,
    pub velocity: f64,
    /// Carried along unchanged; no observable depends on it.
    pub phase: f64,
}

impl CoherentBranch {
    pub fn new(center: f64, velocity: f64) -> Self {
        Self { center, velocity, phase: 0.0 }
    }

    pub fn width(&self) -> f64 {
        1.0
    }

    /// Coherent-state label `alpha` with `center = sqrt(2) Re alpha`.
    pub fn alpha(&self) -> (f64, f64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (self.center * s, self.velocity * s)
    }

    pub fn from_alpha(re: f64, im: f64) -> Self {
        let s = std::f64::consts::SQRT_2;
        Self::new(re * s, im * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentTwoBranchState {
    pub plus: CoherentBranch,
    pub minus: CoherentBranch,
    pub p: f64,
}

impl CoherentTwoBranchState {
    pub fn new(plus: CoherentBranch, minus: CoherentBranch, p: f64) -> Result<Self> {
        check_weight(p)?;
        Ok(Self { plus, minus, p })
    }

    /// Both branches at `center` with velocity `velocity`.
    pub fn common_center(p: f64, center: f64, velocity: f64) -> Result<Self> {
        let b = CoherentBranch::new(center, velocity);
        Self::new(b, b, p)
    }

    pub fn com(&self) -> f64 {
        self.p * self.plus.center + (1.0 - self.p) * self.minus.center
    }

    pub fn com_velocity(&self) -> f64 {
        self.p * self.plus.velocity + (1.0 - self.p) * self.minus.velocity
    }

    /// `x+ - x-`.
    pub fn splitting(&self) -> f64 {
        self.plus.center - self.minus.center
    }

    /// Offsets of the branch centres from the weighted mean.
    pub fn offsets(&self) -> (f64, f64) {
        let com = self.com();
        (self.plus.center - com, self.minus.center - com)
    }

    fn offset_velocities(&self) -> (f64, f64) {
        let v = self.com_velocity();
        (self.plus.velocity - v, self.minus.velocity - v)
    }
}

/// Coefficients of `xbar(t) = a + b t + c t^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SmoothCoefficients {
    pub fn from_state(state: &CoherentTwoBranchState, forces: Forces) -> Self {
        Self {
            a: state.com(),
            b: state.com_velocity(),
            c: 0.5 * total_force(state.p, forces.f_meas, forces.f_div),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t + self.c * t * t
    }
}

/// Weighted centre of mass at time `t`. Exact for every initial condition.
pub fn mean_trajectory(state0: &CoherentTwoBranchState, forces: Forces, t: f64) -> f64 {
    SmoothCoefficients::from_state(state0, forces).eval(t)
}

/// State whose branches sit at their equilibrium offsets around `(xbar0, vbar0)`,
/// so that the splitting stays constant while the pair accelerates.
pub fn smooth_initial_condition(
    p: f64,
    f_meas: f64,
    xbar0: f64,
    vbar0: f64,
) -> Result<CoherentTwoBranchState> {
    let (dp, dm, _) = equilibrium_splitting(p, f_meas);
    CoherentTwoBranchState::new(
        CoherentBranch::new(xbar0 + dp, vbar0),
        CoherentBranch::new(xbar0 + dm, vbar0),
        p,
    )
}

/// Solution of `u'' + gamma u' + u = 0` with `u(0) = u0`, `u'(0) = w0`;
/// returns `(u(t), u'(t))`.
fn damped_unit_oscillator(u0: f64, w0: f64, gamma: f64, t: f64) -> (f64, f64) {
    if gamma == 0.0 {
        let (s, c) = t.sin_cos();
        return (u0 * c + w0 * s, -u0 * s + w0 * c);
    }
    let a = 0.5 * gamma;
    if a < 1.0 {
        let omega = (1.0 - a * a).sqrt();
        let (s, c) = (omega * t).sin_cos();
        let e = (-a * t).exp();
        (
            e * (u0 * c + (w0 + a * u0) / omega * s),
            e * (w0 * c - (u0 + a * w0) / omega * s),
        )
    } else if a == 1.0 {
        let e = (-t).exp();
        (e * (u0 + (w0 + u0) * t), e * (w0 - (w0 + u0) * t))
    } else {
        let kappa = (a * a - 1.0).sqrt();
        let (r1, r2) = (-a + kappa, -a - kappa);
        let c1 = (w0 - r2 * u0) / (r1 - r2);
        let c2 = u0 - c1;
        let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
        (c1 * e1 + c2 * e2, r1 * c1 * e1 + r2 * c2 * e2)
    }
}

/// Evolves the two-branch state for a time `t` under constant forces.
///
/// `gamma` damps the branch offsets relative to the mean (exploratory, use 0
/// for the undamped dynamics). The weighted mean is unaffected by it.
pub fn evolve(
    state0: &CoherentTwoBranchState,
    forces: Forces,
    t: f64,
    gamma: f64,
) -> Result<CoherentTwoBranchState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("evolution time must be >= 0, got {t}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("damping must be >= 0, got {gamma}")));
    }
    let p = state0.p;
    let f_total = total_force(p, forces.f_meas, forces.f_div);
    let com = state0.com() + state0.com_velocity() * t + 0.5 * f_total * t * t;
    let com_v = state0.com_velocity() + f_total * t;

    let (eq_plus, eq_minus, _) = equilibrium_splitting(p, forces.f_meas);
    let (d_plus, d_minus) = state0.offsets();
    let (w_plus, w_minus) = state0.offset_velocities();
    let (u_plus, du_plus) = damped_unit_oscillator(d_plus - eq_plus, w_plus, gamma, t);
    let (u_minus, du_minus) = damped_unit_oscillator(d_minus - eq_minus, w_minus, gamma, t);

    Ok(CoherentTwoBranchState {
        plus: CoherentBranch {
            center: com + eq_plus + u_plus,
            velocity: com_v + du_plus,
            phase: state0.plus.phase,
        },
        minus: CoherentBranch {
            center: com + eq_minus + u_minus,
            velocity: com_v + du_minus,
            phase: state0.minus.phase,
        },
        p,
    })
}
