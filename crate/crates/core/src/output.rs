//! CSV and JSON writers.
//!
//! Numbers are printed with Rust's shortest round-trip formatting, so equal
//! runs produce byte-identical CSV files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coupled::{CoupledState, RunReport, STEP_COLUMNS};
use crate::grid::node;

pub const SNAPSHOT_COLUMNS: [&str; 5] = ["x", "u", "v", "p_bar", "p_hat"];

pub fn timeseries_csv(report: &RunReport) -> String {
    let mut out = STEP_COLUMNS.join(",");
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.s,
            r.s_dot,
            r.mass,
            r.energy,
            r.min_strain,
            r.strain_bound,
            r.picard_iters,
            r.newton_iters_beam,
            r.newton_iters_pore
        );
    }
    out
}

/// One row per beam node; `p_bar` is interpolated from the pore grid at the
/// node's reference coordinate.
pub fn snapshot_csv(state: &CoupledState) -> String {
    let mut out = SNAPSHOT_COLUMNS.join(",");
    out.push('\n');
    let u = state.beam.u();
    let v = state.beam.v();
    for j in 0..=u.cells() {
        let x = node(j, u.cells());
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            x,
            u[j],
            v[j],
            state.p_bar.interpolate(x),
            state.p_hat[j]
        );
    }
    out
}

pub fn snapshot_name(index: usize) -> String {
    format!("{index:04}.csv")
}

/// Row of `orders.csv`. `observed` is an order for convergence ladders, a
/// violation count for fuzz studies and a relative difference for
/// cross-checks; it passes when it lies in `[band_low, band_high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub suite: String,
    pub study: String,
    pub resolution: String,
    pub error: f64,
    pub observed: Option<f64>,
    pub band_low: f64,
    pub band_high: f64,
    pub passed: bool,
}

pub const ORDER_COLUMNS: [&str; 8] = [
    "suite",
    "study",
    "resolution",
    "error",
    "observed",
    "band_low",
    "band_high",
    "passed",
];

pub fn orders_csv(rows: &[OrderRow]) -> String {
    let mut out = ORDER_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let observed = r.observed.map_or(String::new(), |o| o.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.suite, r.study, r.resolution, r.error, observed, r.band_low, r.band_high, r.passed
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    write_text(path, &(text + "\n"))
}
