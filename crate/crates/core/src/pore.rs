//! Backward-Euler integration of the pore pressure on the reference interval
//!
//! ```text
//! rho(p)_t - (kappa/s^2) p_xx + (1/s)(v_bar rho(p))_x - (s'/s) x rho(p)_x = S
//! (kappa/s) p_x(0) = h0(t),   (kappa/s) p_x(1) = -s' psi(s)
//! ```
//!
//! where `p` is the pressure rescaled to `x = y / s(t)`. Neumann data enter
//! through ghost nodes in the second difference; first differences are
//! central inside and one-sided second order at the ends.

use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::constitutive::{BoundarySource, BoundedLipschitzLaw, DensityLaw, PhysicalConstants};
use crate::error::{invalid, Error, Result};
use crate::grid::{node, GridFunction};
use crate::newton::{self, NewtonSettings};

/// Discretisation of the transport terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvectionScheme {
    #[default]
    Central,
    /// First-order upwinding of `rho_x` by the net transport speed
    /// `(v_bar - s' x) / s`.
    Upwind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionProblem {
    pub constants: PhysicalConstants,
    pub rho: DensityLaw,
    pub psi: BoundedLipschitzLaw,
    pub h0: BoundarySource,
    pub n: usize,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub advection: AdvectionScheme,
}

impl DiffusionProblem {
    pub fn new(
        constants: PhysicalConstants,
        rho: DensityLaw,
        psi: BoundedLipschitzLaw,
        h0: BoundarySource,
        n: usize,
        dt: f64,
    ) -> Result<Self> {
        let p = Self {
            constants,
            rho,
            psi,
            h0,
            n,
            dt,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            advection: AdvectionScheme::Central,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.n < crate::grid::MIN_CELLS {
            return Err(invalid("n_pore", format!("need at least {} cells", crate::grid::MIN_CELLS)));
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
        Ok(())
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct PressureStepResult {
    pub next: GridFunction,
    pub newton_iters: usize,
    pub residual_norm: f64,
}

/// Weights of the first difference at node `i`.
fn d1_stencil(i: usize, n: usize) -> [(usize, f64); 3] {
    let inv = 0.5 * n as f64;
    if i == 0 {
        [(0, -3.0 * inv), (1, 4.0 * inv), (2, -inv)]
    } else if i == n {
        [(n, 3.0 * inv), (n - 1, -4.0 * inv), (n - 2, inv)]
    } else {
        [(i - 1, -inv), (i + 1, inv), (i, 0.0)]
    }
}

/// One-sided difference at `i`, backward when `backward` holds.
fn upwind_stencil(i: usize, n: usize, backward: bool) -> [(usize, f64); 2] {
    let inv = n as f64;
    if (backward && i > 0) || i == n {
        [(i, inv), (i - 1, -inv)]
    } else {
        [(i + 1, inv), (i, -inv)]
    }
}

struct Frame<'a> {
    s: f64,
    s_dot: f64,
    v_bar: &'a [f64],
    flux_left: f64,
    flux_right: f64,
}

fn frame<'a>(s: f64, s_dot: f64, v_bar: &'a GridFunction, t_new: f64, prob: &DiffusionProblem) -> Result<Frame<'a>> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::DegenerateDomain(s));
    }
    if v_bar.cells() != prob.n {
        return Err(invalid(
            "v_bar",
            format!("grid has {} cells, problem {}", v_bar.cells(), prob.n),
        ));
    }
    let kappa = prob.constants.kappa;
    Ok(Frame {
        s,
        s_dot,
        v_bar: v_bar.values(),
        flux_left: s * prob.h0.eval(t_new) / kappa,
        flux_right: -s * s_dot * prob.psi.eval(s) / kappa,
    })
}

fn residual(p: &[f64], previous: &[f64], fr: &Frame, prob: &DiffusionProblem, source: Option<&[f64]>) -> Vec<f64> {
    let n = p.len() - 1;
    let h = 1.0 / n as f64;
    let rho = &prob.rho;
    let q: Vec<f64> = p.iter().map(|&v| rho.eval(v)).collect();
    let diff = prob.constants.kappa / (fr.s * fr.s);
    let mut r = vec![0.0; n + 1];
    for i in 0..=n {
        let d2 = if i == 0 {
            2.0 * (p[1] - p[0] - h * fr.flux_left) / (h * h)
        } else if i == n {
            2.0 * (p[n - 1] - p[n] + h * fr.flux_right) / (h * h)
        } else {
            (p[i - 1] - 2.0 * p[i] + p[i + 1]) / (h * h)
        };
        let x = node(i, n);
        let transport = match prob.advection {
            AdvectionScheme::Central => d1_stencil(i, n)
                .iter()
                .map(|&(k, w)| w * (fr.v_bar[k] - fr.s_dot * x) * q[k])
                .sum::<f64>(),
            AdvectionScheme::Upwind => {
                let dv: f64 = d1_stencil(i, n).iter().map(|&(k, w)| w * fr.v_bar[k]).sum();
                let c = fr.v_bar[i] - fr.s_dot * x;
                let dq: f64 = upwind_stencil(i, n, c > 0.0).iter().map(|&(k, w)| w * q[k]).sum();
                dv * q[i] + c * dq
            }
        } / fr.s;
        r[i] = (q[i] - rho.eval(previous[i])) / prob.dt - diff * d2 + transport;
        if let Some(src) = source {
            r[i] -= src[i];
        }
    }
    r
}

fn jacobian(p: &[f64], fr: &Frame, prob: &DiffusionProblem) -> BandedMatrix {
    let n = p.len() - 1;
    let h = 1.0 / n as f64;
    let rho = &prob.rho;
    let dq: Vec<f64> = p.iter().map(|&v| rho.derivative(v)).collect();
    let diff = prob.constants.kappa / (fr.s * fr.s);
    let mut jac = BandedMatrix::zeros(n + 1, 2, 2);
    let inv_h2 = 1.0 / (h * h);
    for i in 0..=n {
        jac.add(i, i, dq[i] / prob.dt);
        if i == 0 {
            jac.add(0, 0, 2.0 * diff * inv_h2);
            jac.add(0, 1, -2.0 * diff * inv_h2);
        } else if i == n {
            jac.add(n, n, 2.0 * diff * inv_h2);
            jac.add(n, n - 1, -2.0 * diff * inv_h2);
        } else {
            jac.add(i, i - 1, -diff * inv_h2);
            jac.add(i, i, 2.0 * diff * inv_h2);
            jac.add(i, i + 1, -diff * inv_h2);
        }
        let x = node(i, n);
        match prob.advection {
            AdvectionScheme::Central => {
                for (k, w) in d1_stencil(i, n) {
                    jac.add(i, k, w * (fr.v_bar[k] - fr.s_dot * x) * dq[k] / fr.s);
                }
            }
            AdvectionScheme::Upwind => {
                let dv: f64 = d1_stencil(i, n).iter().map(|&(k, w)| w * fr.v_bar[k]).sum();
                jac.add(i, i, dv * dq[i] / fr.s);
                let c = fr.v_bar[i] - fr.s_dot * x;
                for (k, w) in upwind_stencil(i, n, c > 0.0) {
                    jac.add(i, k, c * w * dq[k] / fr.s);
                }
            }
        }
    }
    jac
}

/// Nodal backward-Euler residual of `candidate`.
pub fn diffusion_residual(
    candidate: &GridFunction,
    previous: &GridFunction,
    s: f64,
    s_dot: f64,
    v_bar: &GridFunction,
    t_new: f64,
    prob: &DiffusionProblem,
) -> Result<GridFunction> {
    let fr = frame(s, s_dot, v_bar, t_new, prob)?;
    Ok(GridFunction::from_vec_unchecked(residual(
        candidate.values(),
        previous.values(),
        &fr,
        prob,
        None,
    )))
}

/// Advances the pressure by one step given the domain length `s`, its rate
/// `s_dot` and the reference velocity `v_bar` at the new time `t_new`.
pub fn step_diffusion(
    previous: &GridFunction,
    s: f64,
    s_dot: f64,
    v_bar: &GridFunction,
    t_new: f64,
    prob: &DiffusionProblem,
) -> Result<PressureStepResult> {
    step_diffusion_with_source(previous, s, s_dot, v_bar, t_new, prob, None)
}

/// As [`step_diffusion`] with an additional nodal source at `t_new`.
pub fn step_diffusion_with_source(
    previous: &GridFunction,
    s: f64,
    s_dot: f64,
    v_bar: &GridFunction,
    t_new: f64,
    prob: &DiffusionProblem,
    source: Option<&[f64]>,
) -> Result<PressureStepResult> {
    if previous.cells() != prob.n {
        return Err(invalid(
            "p_bar",
            format!("grid has {} cells, problem {}", previous.cells(), prob.n),
        ));
    }
    let fr = frame(s, s_dot, v_bar, t_new, prob)?;
    let prev = previous.values();
    let out = newton::solve(
        "pore",
        prev.to_vec(),
        |p| Ok(residual(p, prev, &fr, prob, source)),
        |p| Ok(jacobian(p, &fr, prob)),
        |p| p.iter().all(|v| v.is_finite()),
        &NewtonSettings {
            tol: prob.newton_tol,
            max_iter: prob.newton_max_iter,
            max_halvings: 30,
        },
    )?;
    Ok(PressureStepResult {
        next: GridFunction::new(out.x)?,
        newton_iters: out.iterations,
        residual_norm: out.residual_norm,
    })
}

/// Liquid mass `s int_0^1 rho(p_bar) dx + psi_hat(s)`.
pub fn liquid_mass(p_bar: &GridFunction, s: f64, rho: &DensityLaw, psi_hat_of_s: f64) -> f64 {
    s * p_bar.map(|p| rho.eval(p)).trapezoid() + psi_hat_of_s
}
