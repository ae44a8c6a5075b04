//! Implicit integration of the viscoelastic beam
//!
//! ```text
//! m u_tt + gamma u_xxxx - (f(u_x) + k_v u_xt + nu(p_hat))_x = b
//! u(0) = 0,  u_xx(0) = u_xx(1) = 0,
//! -gamma u_xxx(1) + f(u_x(1)) + k_v u_xt(1) + nu(p_hat(1)) + phi(s) = q
//! ```
//!
//! on a uniform grid. The spatial operator is the gradient of the discrete
//! energy
//!
//! ```text
//! E_h = (m/2) sum_j h w_j v_j^2 + (gamma/2) sum_{i=1}^{N-1} h (D2 u_i)^2
//!     + sum_c h F(g_c) + phi_hat(u_N)
//! ```
//!
//! with `g_c` the cell gradients, `F` the elastic potential and lumped weights
//! `w_N = 1/2`, `w_j = 1` otherwise. Dropping the end values of `D2 u` is the
//! ghost-node reflection for `u_xx = 0`, and the last row is the natural
//! boundary condition. Time stepping is the Newmark average-acceleration rule
//! with the equation enforced at the new time level.

use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::constitutive::{
    elastic_potential, elastic_response, elastic_response_derivative, elastic_response_second_derivative,
    BoundedLipschitzLaw, PhysicalConstants,
};
use crate::deformation::DeformationSnapshot;
use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;
use crate::newton::{self, NewtonSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamProblem {
    pub constants: PhysicalConstants,
    pub phi: BoundedLipschitzLaw,
    pub nu: BoundedLipschitzLaw,
    pub n: usize,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Smallest cell gradient the line search accepts.
    pub gradient_floor: f64,
}

impl BeamProblem {
    pub fn new(
        constants: PhysicalConstants,
        phi: BoundedLipschitzLaw,
        nu: BoundedLipschitzLaw,
        n: usize,
        dt: f64,
    ) -> Result<Self> {
        let p = Self {
            constants,
            phi,
            nu,
            n,
            dt,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            gradient_floor: 1e-8,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.n < crate::grid::MIN_CELLS {
            return Err(invalid("n_beam", format!("need at least {} cells", crate::grid::MIN_CELLS)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(invalid("newton_tol", "must be > 0"));
        }
        if self.newton_max_iter == 0 {
            return Err(invalid("newton_max_iter", "must be >= 1"));
        }
        if !(self.gradient_floor >= 0.0) {
            return Err(invalid("gradient_floor", "must be >= 0"));
        }
        Ok(())
    }

    /// Copy with a different time step.
    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }

    fn settings(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.newton_tol,
            max_iter: self.newton_max_iter,
            max_halvings: 60,
        }
    }
}

/// External loads at the new time level: nodal body force and tip force.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeamLoads {
    pub body: Option<Vec<f64>>,
    pub tip: f64,
}

impl BeamLoads {
    pub fn none() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone)]
pub struct BeamStepResult {
    pub next: DeformationSnapshot,
    pub newton_iters: usize,
    pub residual_norm: f64,
}

fn weight(j: usize, n: usize) -> f64 {
    if j == n {
        0.5
    } else {
        1.0
    }
}

/// Cell averages of `nu(p_hat)`.
fn nu_cells(nu: &BoundedLipschitzLaw, p_hat: &[f64]) -> Vec<f64> {
    p_hat.windows(2).map(|w| 0.5 * (nu.eval(w[0]) + nu.eval(w[1]))).collect()
}

#[derive(Debug)]
struct Kinematics {
    v: Vec<f64>,
    a: Vec<f64>,
}

fn newmark(u: &[f64], prev: &DeformationSnapshot, dt: f64) -> Kinematics {
    let (un, vn, an) = (prev.u().values(), prev.v().values(), prev.a().values());
    let v = (0..u.len()).map(|j| 2.0 * (u[j] - un[j]) / dt - vn[j]).collect();
    let a = (0..u.len())
        .map(|j| 4.0 * (u[j] - un[j]) / (dt * dt) - 4.0 * vn[j] / dt - an[j])
        .collect();
    Kinematics { v, a }
}

/// Force-scaled rows without the inertia term.
fn static_rows(u: &[f64], v: &[f64], nu_bar: &[f64], prob: &BeamProblem, loads: &BeamLoads) -> Result<Vec<f64>> {
    let n = u.len() - 1;
    let h = 1.0 / n as f64;
    let c = &prob.constants;
    let mut r = vec![0.0; n + 1];
    let gamma_scale = c.gamma / (h * h * h);
    for i in 1..n {
        let d = u[i - 1] - 2.0 * u[i] + u[i + 1];
        r[i - 1] += gamma_scale * d;
        r[i] -= 2.0 * gamma_scale * d;
        r[i + 1] += gamma_scale * d;
    }
    for cell in 0..n {
        let g = (u[cell + 1] - u[cell]) / h;
        let gdot = (v[cell + 1] - v[cell]) / h;
        let f = elastic_response(g, c.k).map_err(|_| singular(cell, g))?;
        let sigma = f + c.k_v * gdot + nu_bar[cell];
        r[cell + 1] += sigma;
        r[cell] -= sigma;
    }
    r[n] += prob.phi.eval(u[n]) - loads.tip;
    if let Some(b) = &loads.body {
        for j in 1..=n {
            r[j] -= h * weight(j, n) * b[j];
        }
    }
    r[0] = 0.0;
    Ok(r)
}

fn singular(cell: usize, g: f64) -> Error {
    Error::SingularConfiguration(format!("deformation gradient {g:.3e} <= 0 in cell {cell}"))
}

fn full_rows(
    u: &[f64],
    prev: &DeformationSnapshot,
    nu_bar: &[f64],
    prob: &BeamProblem,
    loads: &BeamLoads,
) -> Result<(Vec<f64>, Kinematics)> {
    let n = u.len() - 1;
    let h = 1.0 / n as f64;
    let kin = newmark(u, prev, prob.dt);
    let mut r = static_rows(u, &kin.v, nu_bar, prob, loads)?;
    for j in 1..=n {
        r[j] += prob.constants.m * h * weight(j, n) * kin.a[j];
    }
    r[0] = u[0];
    Ok((r, kin))
}

fn jacobian(u: &[f64], prob: &BeamProblem) -> Result<BandedMatrix> {
    let n = u.len() - 1;
    let h = 1.0 / n as f64;
    let dt = prob.dt;
    let c = &prob.constants;
    let mut jac = BandedMatrix::zeros(n + 1, 2, 2);
    let gamma_scale = c.gamma / (h * h * h);
    let stencil = [1.0, -2.0, 1.0];
    for i in 1..n {
        for (da, &ea) in stencil.iter().enumerate() {
            let row = i + da - 1;
            if row == 0 {
                continue;
            }
            for (db, &eb) in stencil.iter().enumerate() {
                jac.add(row, i + db - 1, gamma_scale * ea * eb);
            }
        }
    }
    for cell in 0..n {
        let g = (u[cell + 1] - u[cell]) / h;
        let kc = (elastic_response_derivative(g, c.k).map_err(|_| singular(cell, g))? + 2.0 * c.k_v / dt) / h;
        jac.add(cell + 1, cell + 1, kc);
        jac.add(cell + 1, cell, -kc);
        if cell > 0 {
            jac.add(cell, cell + 1, -kc);
            jac.add(cell, cell, kc);
        }
    }
    for j in 1..=n {
        jac.add(j, j, c.m * h * weight(j, n) * 4.0 / (dt * dt));
    }
    jac.add(n, n, prob.phi.derivative(u[n]));
    jac.set(0, 0, 1.0);
    Ok(jac)
}

fn check_sizes(prev: &DeformationSnapshot, p_hat: &GridFunction, prob: &BeamProblem) -> Result<()> {
    if prev.cells() != prob.n || p_hat.cells() != prob.n {
        return Err(invalid(
            "beam",
            format!(
                "grid mismatch: problem {} cells, state {}, p_hat {}",
                prob.n,
                prev.cells(),
                p_hat.cells()
            ),
        ));
    }
    Ok(())
}

/// Nodal residual of the scheme for `candidate.u`, in equation units
/// (force rows divided by their lumped mass weight); row 0 is `u(0)`.
///
/// Velocity and acceleration are those implied by the Newmark update from
/// `previous`; the ones stored in `candidate` are not used.
pub fn beam_residual(
    candidate: &DeformationSnapshot,
    previous: &DeformationSnapshot,
    p_hat: &GridFunction,
    prob: &BeamProblem,
) -> Result<GridFunction> {
    beam_residual_loaded(candidate, previous, p_hat, prob, &BeamLoads::none())
}

pub fn beam_residual_loaded(
    candidate: &DeformationSnapshot,
    previous: &DeformationSnapshot,
    p_hat: &GridFunction,
    prob: &BeamProblem,
    loads: &BeamLoads,
) -> Result<GridFunction> {
    check_sizes(previous, p_hat, prob)?;
    let n = prob.n;
    let h = 1.0 / n as f64;
    let nu_bar = nu_cells(&prob.nu, p_hat.values());
    let (mut r, _) = full_rows(candidate.u().values(), previous, &nu_bar, prob, loads)?;
    for (j, rj) in r.iter_mut().enumerate().skip(1) {
        *rj /= h * weight(j, n);
    }
    Ok(GridFunction::from_vec_unchecked(r))
}

/// Advances one step with `p_hat` frozen at the new time level.
pub fn step_beam(previous: &DeformationSnapshot, p_hat: &GridFunction, prob: &BeamProblem) -> Result<BeamStepResult> {
    step_beam_loaded(previous, p_hat, prob, &BeamLoads::none())
}

pub fn step_beam_loaded(
    previous: &DeformationSnapshot,
    p_hat: &GridFunction,
    prob: &BeamProblem,
    loads: &BeamLoads,
) -> Result<BeamStepResult> {
    check_sizes(previous, p_hat, prob)?;
    let n = prob.n;
    let dt = prob.dt;
    let nu_bar = nu_cells(&prob.nu, p_hat.values());
    let floor = prob.gradient_floor;
    let admissible = |u: &[f64]| {
        let inv_h = n as f64;
        u.windows(2).all(|w| (w[1] - w[0]) * inv_h > floor)
    };

    let (un, vn, an) = (previous.u().values(), previous.v().values(), previous.a().values());
    let predictor: Vec<f64> = (0..=n)
        .map(|j| un[j] + dt * vn[j] + 0.5 * dt * dt * an[j])
        .collect();
    let start = if admissible(&predictor) { predictor } else { un.to_vec() };

    let out = newton::solve(
        "beam",
        start,
        |u| full_rows(u, previous, &nu_bar, prob, loads).map(|(r, _)| r),
        |u| jacobian(u, prob),
        admissible,
        &prob.settings(),
    )?;
    let mut u = out.x;
    u[0] = 0.0;
    let kin = newmark(&u, previous, dt);
    let mut v = kin.v;
    v[0] = 0.0;
    let mut a = kin.a;
    a[0] = 0.0;
    let next = DeformationSnapshot::with_acceleration(
        GridFunction::new(u)?,
        GridFunction::new(v)?,
        GridFunction::new(a)?,
    )?;
    Ok(BeamStepResult {
        next,
        newton_iters: out.iterations,
        residual_norm: out.residual_norm,
    })
}

/// Acceleration that satisfies the discrete equation at the initial time.
pub fn initial_acceleration(
    u0: GridFunction,
    v0: GridFunction,
    p_hat: &GridFunction,
    prob: &BeamProblem,
    loads: &BeamLoads,
) -> Result<DeformationSnapshot> {
    let n = prob.n;
    let h = 1.0 / n as f64;
    let rest = DeformationSnapshot::new(u0, v0)?;
    check_sizes(&rest, p_hat, prob)?;
    let nu_bar = nu_cells(&prob.nu, p_hat.values());
    let r = static_rows(rest.u().values(), rest.v().values(), &nu_bar, prob, loads)?;
    let mut a = vec![0.0; n + 1];
    for j in 1..=n {
        a[j] = -r[j] / (prob.constants.m * h * weight(j, n));
    }
    DeformationSnapshot::with_acceleration(rest.u().clone(), rest.v().clone(), GridFunction::new(a)?)
}

/// Discrete energy `E_h` of a snapshot.
pub fn beam_energy(snap: &DeformationSnapshot, prob: &BeamProblem) -> Result<f64> {
    let c = &prob.constants;
    let u = snap.u().values();
    let n = u.len() - 1;
    let h = 1.0 / n as f64;
    let kinetic = 0.5 * c.m * crate::grid::trapezoid_of_squares(snap.v().values());
    let bending: f64 = (1..n)
        .map(|i| {
            let d = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (h * h);
            0.5 * c.gamma * h * d * d
        })
        .sum();
    let mut stored = 0.0;
    for cell in 0..n {
        let g = (u[cell + 1] - u[cell]) / h;
        stored += h * elastic_potential(g, c.k).map_err(|_| singular(cell, g))?;
    }
    Ok(kinetic + bending + stored + prob.phi.primitive(snap.s()))
}

/// Energy balance of one step.
///
/// The scheme satisfies `E_1 + dissipation = E_0 + work` up to the trapezoid
/// remainder of the nonquadratic potentials and the work of the leftover
/// Newton residual, both bounded by `slack`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyStep {
    pub energy_before: f64,
    pub energy_after: f64,
    pub dissipation: f64,
    pub work: f64,
    pub slack: f64,
}

impl EnergyStep {
    /// `E_0 + work + slack - E_1 - dissipation`; nonnegative when the
    /// balance holds.
    pub fn margin(&self) -> f64 {
        self.energy_before + self.work + self.slack - self.energy_after - self.dissipation
    }
}

/// Discrete equation evaluated at a stored time level; nonzero only by the
/// Newton tolerance.
fn level_rows(snap: &DeformationSnapshot, nu_bar: &[f64], prob: &BeamProblem) -> Result<Vec<f64>> {
    let n = snap.cells();
    let h = 1.0 / n as f64;
    let mut r = static_rows(snap.u().values(), snap.v().values(), nu_bar, prob, &BeamLoads::none())?;
    for (j, a) in snap.a().values().iter().enumerate().skip(1) {
        r[j] += prob.constants.m * h * weight(j, n) * a;
    }
    Ok(r)
}

/// Evaluates the step balance between `before` and `after`, where
/// `p_hat_before` and `p_hat_after` are the pressures the equation used at
/// the two time levels.
pub fn energy_step(
    before: &DeformationSnapshot,
    after: &DeformationSnapshot,
    p_hat_before: &GridFunction,
    p_hat_after: &GridFunction,
    prob: &BeamProblem,
) -> Result<EnergyStep> {
    let c = &prob.constants;
    let n = before.cells();
    let h = 1.0 / n as f64;
    let (u0, u1) = (before.u().values(), after.u().values());
    let (v0, v1) = (before.v().values(), after.v().values());
    let nu0 = nu_cells(&prob.nu, p_hat_before.values());
    let nu1 = nu_cells(&prob.nu, p_hat_after.values());
    let mut dissipation = 0.0;
    let mut work = 0.0;
    let mut slack = 0.0;
    for cell in 0..n {
        let g0 = (u0[cell + 1] - u0[cell]) / h;
        let g1 = (u1[cell + 1] - u1[cell]) / h;
        let gd = 0.5 * ((v0[cell + 1] - v0[cell]) + (v1[cell + 1] - v1[cell])) / h;
        dissipation += prob.dt * c.k_v * h * gd * gd;
        let dg = g1 - g0;
        work -= h * dg * 0.5 * (nu0[cell] + nu1[cell]);
        let fpp = elastic_response_second_derivative(g0.min(g1), c.k)?.abs();
        slack += h * dg.abs().powi(3) * fpp / 12.0;
    }
    let ds = (after.s() - before.s()).abs();
    slack += ds.powi(3) * prob.phi.sup_second_derivative() / 12.0;
    let r0 = level_rows(before, &nu0, prob)?;
    let r1 = level_rows(after, &nu1, prob)?;
    for j in 1..=n {
        slack += 0.5 * (u1[j] - u0[j]).abs() * (r0[j] + r1[j]).abs();
    }
    Ok(EnergyStep {
        energy_before: beam_energy(before, prob)?,
        energy_after: beam_energy(after, prob)?,
        dissipation,
        work,
        slack,
    })
}
