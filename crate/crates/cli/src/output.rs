//! Trajectory CSV files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gravimean::{CoherentTwoBranchState, GridSample};

pub const TRAJECTORY_HEADER: &str = "t,xbar,x2bar,x_plus,x_minus,d,norm_plus,norm_minus,energy";

/// One CSV row. Columns the analytic propagator does not produce stay empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub xbar: f64,
    pub x2bar: Option<f64>,
    pub x_plus: f64,
    pub x_minus: f64,
    pub d: f64,
    pub norm_plus: Option<f64>,
    pub norm_minus: Option<f64>,
    pub energy: Option<f64>,
}

/// `<x²>` of the branch mixture; each unit-width branch adds a variance of 1/2.
fn coherent_second_moment(s: &CoherentTwoBranchState) -> f64 {
    let (xp, xm) = (s.plus.center, s.minus.center);
    s.p * (xp * xp + 0.5) + (1.0 - s.p) * (xm * xm + 0.5)
}

impl TrajectoryRow {
    pub fn from_analytic(t: f64, s: &CoherentTwoBranchState) -> Self {
        Self {
            t,
            xbar: s.com(),
            x2bar: Some(coherent_second_moment(s)),
            x_plus: s.plus.center,
            x_minus: s.minus.center,
            d: s.splitting(),
            norm_plus: None,
            norm_minus: None,
            energy: None,
        }
    }

    pub fn from_grid(s: &GridSample) -> Self {
        Self {
            t: s.t,
            xbar: s.moments.xbar,
            x2bar: Some(s.moments.x2bar),
            x_plus: s.x_plus,
            x_minus: s.x_minus,
            d: s.splitting(),
            norm_plus: Some(s.norm_plus),
            norm_minus: Some(s.norm_minus),
            energy: Some(s.energy),
        }
    }
}

/// 17 significant digits in scientific notation; parses back bit-exactly.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn cell(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn write_trajectory<W: Write>(rows: &[TrajectoryRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_f64(r.t),
            format_f64(r.xbar),
            cell(r.x2bar),
            format_f64(r.x_plus),
            format_f64(r.x_minus),
            format_f64(r.d),
            cell(r.norm_plus),
            cell(r.norm_minus),
            cell(r.energy),
        )?;
    }
    out.flush()
}

pub fn emit_trajectory(rows: &[TrajectoryRow], path: &Path) -> io::Result<()> {
    if rows.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty trajectory"));
    }
    write_trajectory(rows, BufWriter::new(File::create(path)?))
}
