//! End-to-end runs: configuration in, output directory out.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error as ThisError;

use crate::config::{ConfigError, SimConfig};
use crate::coupled::{run_simulation, RunReport};
use crate::diagnostics::{
    check_energy_monotone, check_energy_series, check_mass_series, check_strain_series, InvariantCheck,
};
use crate::output::{snapshot_csv, snapshot_name, timeseries_csv, write_json, write_text};

/// Process exit status of the command line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Config,
    Solver,
    Invariant,
    Order,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Config => 2,
            Status::Solver => 3,
            Status::Invariant => 4,
            Status::Order => 5,
        }
    }
}

#[derive(Debug, ThisError)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub config_hash: String,
    pub version: &'static str,
    pub wall_time_s: f64,
    pub steps: usize,
    pub dt: f64,
    pub t_final: f64,
    pub n_beam: usize,
    pub n_pore: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub final_s: f64,
    pub mass_drift: f64,
    pub min_strain: f64,
    pub max_picard_iters: usize,
    pub relaxed_steps: usize,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub status: Status,
    pub exit_code: i32,
    pub error: Option<String>,
    pub failed_step: Option<usize>,
    pub metadata: Metadata,
    pub summary: Summary,
    pub checks: Vec<InvariantCheck>,
}

/// Invariant checks applicable to a finished run. Energy monotonicity is
/// required only when no pressure work enters.
pub fn run_checks(cfg: &SimConfig, report: &RunReport) -> Result<Vec<InvariantCheck>, ConfigError> {
    let setup = cfg.build()?;
    let mut checks = check_strain_series(report, cfg.checks.strain_floor);
    checks.push(check_energy_series(report));
    if setup.beam.nu.is_zero() {
        checks.push(check_energy_monotone(report));
    }
    checks.push(check_mass_series(report, &setup.pore.h0, cfg.checks.mass_tol));
    Ok(checks)
}

fn summarize(report: &RunReport) -> Summary {
    Summary {
        final_s: report.rows.last().map_or(f64::NAN, |r| r.s),
        mass_drift: report.mass_drift(),
        min_strain: report.rows.iter().map(|r| r.min_strain).fold(f64::INFINITY, f64::min),
        max_picard_iters: report.coupling.iter().map(|c| c.iterations).max().unwrap_or(0),
        relaxed_steps: report.coupling.iter().filter(|c| c.relaxed).count(),
    }
}

/// Output directory: `FOAMSWELL_OUT` if set, else the configured one.
pub fn output_dir(cfg: &SimConfig) -> PathBuf {
    std::env::var_os("FOAMSWELL_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory))
}

/// Runs `cfg`, writing `timeseries.csv`, `snapshots/NNNN.csv` and
/// `report.json` under `out`. Solver failures still write the partial
/// time series and a report.
pub fn run_config(cfg: &SimConfig, out: &Path) -> Result<RunOutcome, RunError> {
    let setup = cfg.build()?;
    let started = Instant::now();
    let snap_dir = out.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;
    let stride = cfg.output.snapshot_stride;
    let mut written = 0usize;
    let mut io_error = None;
    let mut observer = |k: usize, state: &crate::coupled::CoupledState| {
        if stride > 0 && k.is_multiple_of(stride) && io_error.is_none() {
            if let Err(e) = write_text(&snap_dir.join(snapshot_name(written)), &snapshot_csv(state)) {
                io_error = Some(e);
            }
            written += 1;
        }
    };
    let result = run_simulation(
        setup.state.clone(),
        setup.t_final,
        &setup.beam,
        &setup.pore,
        &setup.coupling,
        &mut observer,
    );
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let (report, failure) = match result {
        Ok(r) => (r, None),
        Err(f) => (*f.partial.clone(), Some(f)),
    };
    write_text(&out.join("timeseries.csv"), &timeseries_csv(&report))?;
    let checks = if failure.is_none() { run_checks(cfg, &report)? } else { Vec::new() };
    let status = if failure.is_some() {
        Status::Solver
    } else if checks.iter().all(|c| c.passed) {
        Status::Ok
    } else {
        Status::Invariant
    };
    let outcome = RunOutcome {
        status,
        exit_code: status.code(),
        error: failure.as_ref().map(|f| f.error.to_string()),
        failed_step: failure.as_ref().map(|f| f.step),
        metadata: Metadata {
            config_hash: cfg.hash(),
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: started.elapsed().as_secs_f64(),
            steps: report.rows.len().saturating_sub(1),
            dt: report.dt,
            t_final: report.t_final,
            n_beam: report.n_beam,
            n_pore: report.n_pore,
        },
        summary: summarize(&report),
        checks,
    };
    write_json(&out.join("report.json"), &outcome)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn equilibrium_run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = scenarios::EQUILIBRIUM.config();
        cfg.discretization.t_final = 0.05;
        cfg.output.snapshot_stride = 25;
        let outcome = run_config(&cfg, dir.path()).unwrap();
        assert_eq!(outcome.status, Status::Ok);
        assert_eq!(outcome.metadata.steps, 50);
        let ts = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
        assert_eq!(ts.lines().count(), 52);
        for k in 0..3 {
            assert!(dir.path().join("snapshots").join(snapshot_name(k)).exists());
        }
        assert!(!dir.path().join("snapshots").join(snapshot_name(3)).exists());
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(json["exit_code"], 0);
        assert_eq!(json["metadata"]["config_hash"], cfg.hash());
    }
}
