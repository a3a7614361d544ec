//! Physical parameters of the apparatus, the dimensionless unit system and the
//! classicality / measurability criteria.
//!
//! Every simulation in this crate runs in units where the coherent width `x0`
//! is the length unit, `1/omega_grav` is the time unit, `M omega_grav^2 x0` is
//! the force unit and `hbar omega_grav` is the energy unit. In those units the
//! branch Hamiltonians read `-1/2 d^2/dx^2 + V(x)` with a unit-frequency
//! self-consistent oscillator potential.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Newtonian gravitational constant, m^3 kg^-1 s^-2.
pub const G_NEWTON: f64 = 6.674_30e-11;

/// Default threshold for reading "much smaller than" as a ratio.
pub const DEFAULT_SIZEBOUND_RATIO: f64 = 0.01;

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a positive finite number, got {value}")))
    }
}

/// `sqrt(G M / R^3)`: the frequency of a homogeneous sphere oscillating in its
/// own parabolic gravitational potential.
pub fn omega_grav(mass: f64, radius: f64, g: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("radius", radius)?;
    require_positive("G", g)?;
    Ok((g * mass / radius.powi(3)).sqrt())
}

/// A homogeneous massive sphere. Built from any two of mass, radius and
/// density; the third, `omega_grav` and `x0` are derived on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApparatusParams {
    mass: f64,
    radius: f64,
    density: f64,
    g: f64,
    hbar: f64,
    omega_grav: f64,
    x0: f64,
}

fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}

impl ApparatusParams {
    pub fn from_mass_radius(mass: f64, radius: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("radius", radius)?;
        Self::build(mass, radius, mass / sphere_volume(radius), G_NEWTON, HBAR)
    }

    pub fn from_radius_density(radius: f64, density: f64) -> Result<Self> {
        require_positive("radius", radius)?;
        require_positive("density", density)?;
        Self::build(sphere_volume(radius) * density, radius, density, G_NEWTON, HBAR)
    }

    pub fn from_mass_density(mass: f64, density: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("density", density)?;
        let radius = (mass / density / (4.0 / 3.0 * PI)).cbrt();
        Self::build(mass, radius, density, G_NEWTON, HBAR)
    }

    /// Replaces the gravitational constant and recomputes the derived quantities.
    pub fn with_g(self, g: f64) -> Result<Self> {
        Self::build(self.mass, self.radius, self.density, g, self.hbar)
    }

    /// Replaces the reduced Planck constant (useful for `hbar = G = 1` unit systems).
    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::build(self.mass, self.radius, self.density, self.g, hbar)
    }

    fn build(mass: f64, radius: f64, density: f64, g: f64, hbar: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("radius", radius)?;
        require_positive("density", density)?;
        require_positive("hbar", hbar)?;
        let omega = omega_grav(mass, radius, g)?;
        let x0 = (hbar / (mass * omega)).sqrt();
        Ok(Self { mass, radius, density, g, hbar, omega_grav: omega, x0 })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega_grav(&self) -> f64 {
        self.omega_grav
    }

    /// Width of the coherent states of the `omega_grav` oscillator.
    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn scales(&self) -> Scales {
        Scales {
            length: self.x0,
            time: 1.0 / self.omega_grav,
            force: self.mass * self.omega_grav * self.omega_grav * self.x0,
            energy: self.hbar * self.omega_grav,
        }
    }
}

/// Law of the frozen diverting force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FDiv {
    /// Uniform on `[-F_meas, +F_meas]`.
    Uniform,
    /// A single known value, in newtons.
    Fixed {
        #[serde(rename = "value_N")]
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementConfig {
    /// Weight `|c+|^2` of the plus branch.
    pub p: f64,
    /// Measurement force magnitude, N.
    pub f_meas: f64,
    pub f_div: FDiv,
    /// Duration of the measurement interaction, s.
    pub tau_meas: f64,
    /// Displacement scale of the diverting landscape, m.
    pub l0: f64,
}

impl MeasurementConfig {
    pub fn new(p: f64, f_meas: f64, f_div: FDiv, tau_meas: f64, l0: f64) -> Result<Self> {
        let cfg = Self { p, f_meas, f_div, tau_meas, l0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_weight(self.p)?;
        if !(self.f_meas.is_finite() && self.f_meas >= 0.0) {
            return Err(Error::domain(format!("F_meas must be >= 0, got {}", self.f_meas)));
        }
        if let FDiv::Fixed { value } = self.f_div {
            if !value.is_finite() {
                return Err(Error::domain("F_div value must be finite"));
            }
        }
        require_positive("tau_meas", self.tau_meas)?;
        require_positive("l0", self.l0)
    }
}

pub(crate) fn check_weight(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("branch weight p must lie in [0, 1], got {p}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantityKind {
    Length,
    Time,
    Force,
    Energy,
}

impl FromStr for QuantityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(Self::Length),
            "time" => Ok(Self::Time),
            "force" => Ok(Self::Force),
            "energy" => Ok(Self::Energy),
            other => Err(Error::domain(format!("unknown quantity kind {other:?}"))),
        }
    }
}

impl fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Length => "length",
            Self::Time => "time",
            Self::Force => "force",
            Self::Energy => "energy",
        };
        f.write_str(s)
    }
}

/// SI values of the dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scales {
    /// m
    pub length: f64,
    /// s
    pub time: f64,
    /// N
    pub force: f64,
    /// J
    pub energy: f64,
}

impl Scales {
    pub fn unit(&self, kind: QuantityKind) -> f64 {
        match kind {
            QuantityKind::Length => self.length,
            QuantityKind::Time => self.time,
            QuantityKind::Force => self.force,
            QuantityKind::Energy => self.energy,
        }
    }

    pub fn to_dimensionless(&self, value: f64, kind: QuantityKind) -> f64 {
        value / self.unit(kind)
    }

    pub fn to_si(&self, value: f64, kind: QuantityKind) -> f64 {
        value * self.unit(kind)
    }
}

/// Outcome of checking the apparatus against the size bound, the
/// displacement requirement and the timing criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub omega_grav: f64,
    pub x0: f64,
    /// Order-of-magnitude splitting `F_meas / (M omega^2)`, m.
    pub d_est: f64,
    /// Steady branch splitting of the coupled Ehrenfest dynamics, `2 F_meas / (M omega^2)`, m.
    pub d_equilibrium: f64,
    pub x0_over_r: f64,
    pub sizebound_ratio: f64,
    pub sizebound_ok: bool,
    /// `(F_meas / M) tau^2`, m.
    pub displacement: f64,
    pub displacement_ok: bool,
    pub timing_ok: bool,
    /// Smallest radius satisfying the timing criterion, `l0 / (omega tau)^2`, m.
    pub r_min: f64,
}

impl CriteriaReport {
    pub fn all_ok(&self) -> bool {
        self.sizebound_ok && self.displacement_ok && self.timing_ok
    }
}

pub fn classicality_report(params: &ApparatusParams, cfg: &MeasurementConfig) -> CriteriaReport {
    classicality_report_with_ratio(params, cfg, DEFAULT_SIZEBOUND_RATIO)
}

/// Same as [`classicality_report`] with an explicit threshold for "x0 much smaller than R".
pub fn classicality_report_with_ratio(
    params: &ApparatusParams,
    cfg: &MeasurementConfig,
    sizebound_ratio: f64,
) -> CriteriaReport {
    let omega = params.omega_grav();
    let stiffness = params.mass() * omega * omega;
    let d_est = cfg.f_meas / stiffness;
    let x0_over_r = params.x0() / params.radius();
    let displacement = cfg.f_meas / params.mass() * cfg.tau_meas * cfg.tau_meas;
    let omega_tau_sq = (omega * cfg.tau_meas).powi(2);
    CriteriaReport {
        omega_grav: omega,
        x0: params.x0(),
        d_est,
        d_equilibrium: 2.0 * d_est,
        x0_over_r,
        sizebound_ratio,
        sizebound_ok: x0_over_r < sizebound_ratio && d_est < params.radius(),
        displacement,
        displacement_ok: displacement >= cfg.l0,
        timing_ok: omega_tau_sq > cfg.l0 / params.radius(),
        r_min: cfg.l0 / omega_tau_sq,
    }
}
