//! Time stepping of the coupled beam and pore problems.
//!
//! Each step alternates the two solvers until the pressure forcing fed to
//! the beam stops changing: the beam is advanced with a guess for `p_hat`,
//! the pore problem is advanced on the resulting domain, and the new
//! pressure is pulled back to material coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::beam::{beam_energy, energy_step, initial_acceleration, step_beam, BeamLoads, BeamProblem, EnergyStep};
use crate::constitutive::BoundarySource;
use crate::deformation::{pull_back_pressure, pull_back_velocity_on, DeformationSnapshot};
use crate::diagnostics::{strain_bound, StrainBound};
use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;
use crate::pore::{liquid_mass, step_diffusion, DiffusionProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation factor in `(0, 1]`.
    pub omega: f64,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 30,
            omega: 1.0,
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid("tol", format!("must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be >= 1"));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(invalid("omega", format!("must lie in (0, 1], got {}", self.omega)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledState {
    pub t: f64,
    pub beam: DeformationSnapshot,
    pub p_bar: GridFunction,
    /// `p_bar` pulled back to the beam grid.
    pub p_hat: GridFunction,
    /// Beam velocity in reference coordinates on the pore grid.
    pub v_bar: GridFunction,
    /// Pressure the beam equation used at this time level.
    pub p_hat_applied: GridFunction,
}

impl CoupledState {
    /// State with caches computed from `beam` and `p_bar`.
    pub fn new(t: f64, beam: DeformationSnapshot, p_bar: GridFunction) -> Result<Self> {
        if !(beam.s() > 0.0) {
            return Err(Error::DegenerateDomain(beam.s()));
        }
        let p_hat = pull_back_pressure(&p_bar, &beam);
        let v_bar = pull_back_velocity_on(&beam, p_bar.cells());
        Ok(Self {
            t,
            beam,
            p_bar,
            p_hat_applied: p_hat.clone(),
            p_hat,
            v_bar,
        })
    }

    /// Initial state; the acceleration is solved from the discrete equation.
    pub fn initial(u0: GridFunction, v0: GridFunction, p_bar0: GridFunction, beam_prob: &BeamProblem) -> Result<Self> {
        let rest = DeformationSnapshot::new(u0.clone(), v0.clone())?;
        let p_hat = pull_back_pressure(&p_bar0, &rest);
        let beam = initial_acceleration(u0, v0, &p_hat, beam_prob, &BeamLoads::none())?;
        Self::new(0.0, beam, p_bar0)
    }

    pub fn s(&self) -> f64 {
        self.beam.s()
    }
}

/// Convergence log of one coupled step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    /// Relative change of the forcing per iteration.
    pub history: Vec<f64>,
    pub omega: f64,
    /// Whether the relaxation fell back to `0.5`.
    pub relaxed: bool,
    pub newton_iters_beam: usize,
    pub newton_iters_pore: usize,
}

/// Relative max-norm change of `nu(p_hat)`, scaled by `sup |nu|`.
fn forcing_change(beam_prob: &BeamProblem, a: &GridFunction, b: &GridFunction) -> f64 {
    let nu = &beam_prob.nu;
    let delta = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (nu.eval(*x) - nu.eval(*y)).abs())
        .fold(0.0, f64::max);
    if delta == 0.0 {
        0.0
    } else {
        delta / nu.sup()
    }
}

/// Advances `state` by `beam_prob.dt`.
pub fn coupled_step(
    state: &CoupledState,
    beam_prob: &BeamProblem,
    diff_prob: &DiffusionProblem,
    cfg: &CouplingConfig,
) -> Result<(CoupledState, PicardReport)> {
    let dt = beam_prob.dt;
    let t_new = state.t + dt;
    let n_pore = state.p_bar.cells();
    let mut guess = state.p_hat.clone();
    let mut omega = cfg.omega;
    let mut relaxed = false;
    let mut history = Vec::new();
    let (mut nb, mut np) = (0, 0);
    for it in 1..=cfg.max_iter {
        let b = step_beam(&state.beam, &guess, beam_prob)?;
        nb += b.newton_iters;
        let snap = b.next;
        let (s, s_dot) = (snap.s(), snap.s_dot());
        if !(s > 0.0) {
            return Err(Error::DegenerateDomain(s));
        }
        let v_bar = pull_back_velocity_on(&snap, n_pore);
        let p = step_diffusion(&state.p_bar, s, s_dot, &v_bar, t_new, &diff_prob.with_dt(dt))?;
        np += p.newton_iters;
        let p_hat = pull_back_pressure(&p.next, &snap);
        let change = forcing_change(beam_prob, &p_hat, &guess);
        let stalled = history.last().is_some_and(|&last| change >= last);
        history.push(change);
        if change < cfg.tol {
            let next = CoupledState {
                t: t_new,
                beam: snap,
                p_bar: p.next,
                p_hat,
                v_bar,
                p_hat_applied: guess,
            };
            return Ok((
                next,
                PicardReport {
                    iterations: it,
                    history,
                    omega,
                    relaxed,
                    newton_iters_beam: nb,
                    newton_iters_pore: np,
                },
            ));
        }
        if stalled && omega > 0.5 {
            omega = 0.5;
            relaxed = true;
        }
        let blended: Vec<f64> = p_hat
            .values()
            .iter()
            .zip(guess.values())
            .map(|(new, old)| omega * new + (1.0 - omega) * old)
            .collect();
        guess = GridFunction::from_vec_unchecked(blended);
    }
    Err(Error::Coupling {
        iterations: cfg.max_iter,
        history,
    })
}

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub s: f64,
    pub s_dot: f64,
    pub mass: f64,
    pub energy: f64,
    pub min_strain: f64,
    pub strain_bound: f64,
    pub picard_iters: usize,
    pub newton_iters_beam: usize,
    pub newton_iters_pore: usize,
}

/// Column names of [`StepRecord`] in order.
pub const STEP_COLUMNS: [&str; 10] = [
    "t",
    "s",
    "s_dot",
    "mass",
    "energy",
    "min_strain",
    "strain_bound",
    "picard_iters",
    "newton_iters_beam",
    "newton_iters_pore",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<StepRecord>,
    pub strain: Vec<StrainBound>,
    pub energy_steps: Vec<EnergyStep>,
    pub coupling: Vec<PicardReport>,
    pub dt: f64,
    pub t_final: f64,
    pub n_beam: usize,
    pub n_pore: usize,
    pub h0: BoundarySource,
}

impl RunReport {
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.rows.first().map_or(0.0, |r| r.mass);
        self.rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max)
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone, ThisError)]
#[error("step {step} failed: {error}")]
pub struct RunFailure {
    pub step: usize,
    pub error: Error,
    pub partial: Box<RunReport>,
}

fn record(
    state: &CoupledState,
    beam_prob: &BeamProblem,
    diff_prob: &DiffusionProblem,
    picard: Option<&PicardReport>,
) -> Result<(StepRecord, StrainBound)> {
    let bound = strain_bound(state.beam.u());
    let mass = liquid_mass(&state.p_bar, state.s(), &diff_prob.rho, diff_prob.psi.primitive(state.s()));
    Ok((
        StepRecord {
            t: state.t,
            s: state.s(),
            s_dot: state.beam.s_dot(),
            mass,
            energy: beam_energy(&state.beam, beam_prob)?,
            min_strain: bound.measured,
            strain_bound: bound.bound,
            picard_iters: picard.map_or(0, |p| p.iterations),
            newton_iters_beam: picard.map_or(0, |p| p.newton_iters_beam),
            newton_iters_pore: picard.map_or(0, |p| p.newton_iters_pore),
        },
        bound,
    ))
}

/// Number of steps of size `dt` needed to reach `t_final`, the last one
/// possibly shortened.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    let ratio = t_final / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Marches from `initial` to `t_final`, calling `observer` with the step
/// index and state after every step (and for the initial state).
pub fn run_simulation(
    initial: CoupledState,
    t_final: f64,
    beam_prob: &BeamProblem,
    diff_prob: &DiffusionProblem,
    cfg: &CouplingConfig,
    observer: &mut dyn FnMut(usize, &CoupledState),
) -> std::result::Result<RunReport, RunFailure> {
    let dt = beam_prob.dt;
    let steps = step_count(t_final, dt);
    let mut report = RunReport {
        rows: Vec::with_capacity(steps + 1),
        strain: Vec::with_capacity(steps + 1),
        energy_steps: Vec::with_capacity(steps),
        coupling: Vec::with_capacity(steps),
        dt,
        t_final,
        n_beam: beam_prob.n,
        n_pore: diff_prob.n,
        h0: diff_prob.h0.clone(),
    };
    let fail = |step: usize, error: Error, report: &RunReport| RunFailure {
        step,
        error,
        partial: Box::new(report.clone()),
    };
    match record(&initial, beam_prob, diff_prob, None) {
        Ok((row, bound)) => {
            report.rows.push(row);
            report.strain.push(bound);
        }
        Err(e) => return Err(fail(0, e, &report)),
    }
    observer(0, &initial);
    let mut state = initial;
    for k in 1..=steps {
        let t_target = if k == steps { t_final } else { k as f64 * dt };
        let h = t_target - state.t;
        let bp = beam_prob.with_dt(h);
        let dp = diff_prob.with_dt(h);
        let outcome = coupled_step(&state, &bp, &dp, cfg).and_then(|(mut next, picard)| {
            next.t = t_target;
            let balance = energy_step(&state.beam, &next.beam, &state.p_hat_applied, &next.p_hat_applied, &bp)?;
            let (row, bound) = record(&next, &bp, &dp, Some(&picard))?;
            Ok((next, picard, balance, row, bound))
        });
        match outcome {
            Ok((next, picard, balance, row, bound)) => {
                report.rows.push(row);
                report.strain.push(bound);
                report.energy_steps.push(balance);
                report.coupling.push(picard);
                observer(k, &next);
                state = next;
            }
            Err(e) => return Err(fail(k, e, &report)),
        }
    }
    Ok(report)
}
