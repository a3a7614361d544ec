//! JSON run configuration.
//!
//! Physical inputs are SI; initial conditions and grid options are in the
//! dimensionless units of the simulator (length `x0`, time `1/omega_grav`).

use std::fmt;
use std::path::Path;

use gravimean::units::{DEFAULT_SIZEBOUND_RATIO, G_NEWTON, HBAR};
use gravimean::{
    ApparatusParams, CoherentTwoBranchState, FDiv, FDivLaw, GridSpec, MeasurementConfig, QuantityKind, Scales,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted key path of the offending entry; empty for document-level problems.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: &str, message: impl Into<String>) -> Self {
        Self { path: path.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineName {
    Analytic,
    Grid,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOptions {
    pub half_length: Option<f64>,
    pub points: Option<usize>,
    pub dt: Option<f64>,
}

/// Initial condition of `evolve` and `compare`, dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Branches at their equilibrium offsets: no oscillation.
    Smooth {
        #[serde(default)]
        xbar0: f64,
        #[serde(default)]
        vbar0: f64,
    },
    /// Both branches on top of each other: oscillation about the equilibrium.
    CommonCenter {
        #[serde(default)]
        center: f64,
        #[serde(default)]
        velocity: f64,
    },
    /// Explicit Gaussian branches. Widths other than 1 are grid-only.
    Branches {
        x_plus: f64,
        v_plus: f64,
        x_minus: f64,
        v_minus: f64,
        #[serde(default = "unit_width")]
        width_plus: f64,
        #[serde(default = "unit_width")]
        width_minus: f64,
    },
}

fn unit_width() -> f64 {
    1.0
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Smooth { xbar0: 0.0, vbar0: 0.0 }
    }
}

impl InitialCondition {
    pub fn widths(&self) -> (f64, f64) {
        match *self {
            InitialCondition::Branches { width_plus, width_minus, .. } => (width_plus, width_minus),
            _ => (1.0, 1.0),
        }
    }

    pub fn is_coherent(&self) -> bool {
        self.widths() == (1.0, 1.0)
    }

    /// Branch centres and velocities as a coherent analytic state (widths ignored).
    pub fn coherent_state(&self, p: f64, f_meas: f64) -> gravimean::Result<CoherentTwoBranchState> {
        match *self {
            InitialCondition::Smooth { xbar0, vbar0 } => gravimean::smooth_initial_condition(p, f_meas, xbar0, vbar0),
            InitialCondition::CommonCenter { center, velocity } => {
                CoherentTwoBranchState::common_center(p, center, velocity)
            }
            InitialCondition::Branches { x_plus, v_plus, x_minus, v_minus, .. } => CoherentTwoBranchState::new(
                gravimean::CoherentBranch::new(x_plus, v_plus),
                gravimean::CoherentBranch::new(x_minus, v_minus),
                p,
            ),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mass_kg: Option<f64>,
    radius_m: Option<f64>,
    density_kgm3: Option<f64>,
    #[serde(rename = "G")]
    g: Option<f64>,
    hbar: Option<f64>,
    p: f64,
    #[serde(rename = "F_meas_N")]
    f_meas: f64,
    tau_meas_s: f64,
    l0_m: f64,
    #[serde(rename = "F_div")]
    f_div: FDiv,
    grid: Option<GridOptions>,
    gamma: Option<f64>,
    engine: Option<EngineName>,
    sizebound_ratio: Option<f64>,
    initial: Option<InitialCondition>,
}

/// Dimensionless view of the measurement problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dimensionless {
    pub p: f64,
    pub f_meas: f64,
    pub f_div: FDivLaw,
    pub tau: f64,
}

/// A fully validated configuration with every default applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub apparatus: ApparatusParams,
    pub measurement: MeasurementConfig,
    pub scales: Scales,
    pub dimensionless: Dimensionless,
    pub grid: GridSpec,
    pub gamma: f64,
    pub engine: EngineName,
    pub sizebound_ratio: f64,
    pub initial: InitialCondition,
    /// Keys that were absent and took their default value.
    pub defaults_applied: Vec<String>,
}

fn positive(path: &str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::at(path, format!("must be a positive number, got {value}")))
    }
}

pub fn parse_config(text: &str) -> Result<ResolvedConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError { path: if path == "." { String::new() } else { path }, message: e.inner().to_string() }
    })?;
    resolve(raw)
}

pub fn load_config(path: &Path) -> Result<ResolvedConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn resolve(raw: RawConfig) -> Result<ResolvedConfig, ConfigError> {
    let mut defaults = Vec::new();

    let apparatus = match (raw.mass_kg, raw.radius_m, raw.density_kgm3) {
        (Some(m), Some(r), None) => {
            ApparatusParams::from_mass_radius(positive("mass_kg", m)?, positive("radius_m", r)?)
        }
        (None, Some(r), Some(rho)) => {
            ApparatusParams::from_radius_density(positive("radius_m", r)?, positive("density_kgm3", rho)?)
        }
        (Some(m), None, Some(rho)) => {
            ApparatusParams::from_mass_density(positive("mass_kg", m)?, positive("density_kgm3", rho)?)
        }
        _ => {
            return Err(ConfigError::at(
                "",
                "give exactly two of `mass_kg`, `radius_m`, `density_kgm3`",
            ))
        }
    }
    .map_err(|e| ConfigError::at("", e.to_string()))?;

    let g = match raw.g {
        Some(g) => positive("G", g)?,
        None => {
            defaults.push("G".to_string());
            G_NEWTON
        }
    };
    let hbar = match raw.hbar {
        Some(h) => positive("hbar", h)?,
        None => {
            defaults.push("hbar".to_string());
            HBAR
        }
    };
    let apparatus = apparatus
        .with_g(g)
        .and_then(|a| a.with_hbar(hbar))
        .map_err(|e| ConfigError::at("G", e.to_string()))?;

    if !(0.0..=1.0).contains(&raw.p) {
        return Err(ConfigError::at("p", format!("must lie in [0, 1], got {}", raw.p)));
    }
    if !(raw.f_meas.is_finite() && raw.f_meas >= 0.0) {
        return Err(ConfigError::at("F_meas_N", format!("must be >= 0, got {}", raw.f_meas)));
    }
    positive("tau_meas_s", raw.tau_meas_s)?;
    positive("l0_m", raw.l0_m)?;
    if let FDiv::Fixed { value } = raw.f_div {
        if !value.is_finite() {
            return Err(ConfigError::at("F_div.value_N", "must be finite"));
        }
    }
    let measurement = MeasurementConfig::new(raw.p, raw.f_meas, raw.f_div, raw.tau_meas_s, raw.l0_m)
        .map_err(|e| ConfigError::at("", e.to_string()))?;

    let opts = raw.grid.unwrap_or_else(|| {
        defaults.push("grid".to_string());
        GridOptions::default()
    });
    let base = GridSpec::default();
    let grid = GridSpec::new(
        opts.half_length.unwrap_or(base.half_length),
        opts.points.unwrap_or(base.points),
        opts.dt.unwrap_or(base.dt),
    )
    .map_err(|e| ConfigError::at("grid", e.to_string()))?;

    let gamma = raw.gamma.unwrap_or_else(|| {
        defaults.push("gamma".to_string());
        0.0
    });
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(ConfigError::at("gamma", format!("must be >= 0, got {gamma}")));
    }
    let sizebound_ratio = match raw.sizebound_ratio {
        Some(r) => positive("sizebound_ratio", r)?,
        None => {
            defaults.push("sizebound_ratio".to_string());
            DEFAULT_SIZEBOUND_RATIO
        }
    };
    let engine = raw.engine.unwrap_or_else(|| {
        defaults.push("engine".to_string());
        EngineName::Analytic
    });
    let initial = raw.initial.unwrap_or_else(|| {
        defaults.push("initial".to_string());
        InitialCondition::default()
    });
    if let InitialCondition::Branches { width_plus, width_minus, .. } = initial {
        positive("initial.width_plus", width_plus)?;
        positive("initial.width_minus", width_minus)?;
    }

    let scales = apparatus.scales();
    let dimensionless = Dimensionless {
        p: measurement.p,
        f_meas: scales.to_dimensionless(measurement.f_meas, QuantityKind::Force),
        f_div: match measurement.f_div {
            FDiv::Uniform => FDivLaw::Uniform,
            FDiv::Fixed { value } => FDivLaw::Fixed { value: scales.to_dimensionless(value, QuantityKind::Force) },
        },
        tau: scales.to_dimensionless(measurement.tau_meas, QuantityKind::Time),
    };

    Ok(ResolvedConfig {
        apparatus,
        measurement,
        scales,
        dimensionless,
        grid,
        gamma,
        engine,
        sizebound_ratio,
        initial,
        defaults_applied: defaults,
    })
}
