//! Manufactured solutions for the beam and pore solvers.
//!
//! Each solution is injected through a source term so that the chosen
//! closed-form field solves the continuous problem exactly; the discrete
//! error then measures the scheme alone.

use std::f64::consts::PI;

use crate::beam::{initial_acceleration, step_beam_loaded, BeamLoads, BeamProblem};
use crate::constitutive::{elastic_response, elastic_response_derivative, DensityLaw, PhysicalConstants};
use crate::deformation::DeformationSnapshot;
use crate::error::Result;
use crate::grid::GridFunction;
use crate::pore::{step_diffusion_with_source, DiffusionProblem};

/// Time profile of a manufactured beam solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// `t + t^2`, integrated exactly by the Newmark rule.
    Quadratic,
    /// `sin(2t)`.
    Sine,
}

impl TimeProfile {
    fn eval(self, t: f64) -> (f64, f64, f64) {
        match self {
            TimeProfile::Quadratic => (t + t * t, 1.0 + 2.0 * t, 2.0),
            TimeProfile::Sine => ((2.0 * t).sin(), 2.0 * (2.0 * t).cos(), -4.0 * (2.0 * t).sin()),
        }
    }
}

/// `u*(t, x) = x + amp sin(pi x) T(t)` under the frozen pressure
/// `p_hat(x) = p_amp cos(pi x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSolution {
    pub amp: f64,
    pub p_amp: f64,
    pub profile: TimeProfile,
}

impl BeamSolution {
    pub fn u(&self, t: f64, x: f64) -> f64 {
        x + self.amp * (PI * x).sin() * self.profile.eval(t).0
    }

    pub fn v(&self, t: f64, x: f64) -> f64 {
        self.amp * (PI * x).sin() * self.profile.eval(t).1
    }

    pub fn p_hat(&self, x: f64) -> f64 {
        self.p_amp * (PI * x).cos()
    }

    /// Body force and tip load that make `u*` exact at time `t`.
    pub fn loads(&self, t: f64, prob: &BeamProblem) -> Result<BeamLoads> {
        let c = &prob.constants;
        let (tt, tp, tpp) = self.profile.eval(t);
        let a = self.amp;
        let n = prob.n;
        let mut body = vec![0.0; n + 1];
        for (j, bj) in body.iter_mut().enumerate() {
            let x = j as f64 / n as f64;
            let (sn, cs) = ((PI * x).sin(), (PI * x).cos());
            let ux = 1.0 + a * PI * cs * tt;
            let uxx = -a * PI * PI * sn * tt;
            let uxxxx = a * PI.powi(4) * sn * tt;
            let utt = a * sn * tpp;
            let uxxt = -a * PI * PI * sn * tp;
            let p_x = -self.p_amp * PI * sn;
            let sigma_x = elastic_response_derivative(ux, c.k)? * uxx
                + c.k_v * uxxt
                + prob.nu.derivative(self.p_hat(x)) * p_x;
            *bj = c.m * utt + c.gamma * uxxxx - sigma_x;
        }
        let ux1 = 1.0 - a * PI * tt;
        let uxxx1 = a * PI.powi(3) * tt;
        let uxt1 = -a * PI * tp;
        let tip = -c.gamma * uxxx1
            + elastic_response(ux1, c.k)?
            + c.k_v * uxt1
            + prob.nu.eval(self.p_hat(1.0))
            + prob.phi.eval(self.u(t, 1.0));
        Ok(BeamLoads { body: Some(body), tip })
    }

    /// Integrates to `t_final` and returns the max nodal error in `u`.
    pub fn error(&self, prob: &BeamProblem, t_final: f64) -> Result<f64> {
        let snap = self.solve(prob, t_final)?;
        let exact = GridFunction::from_fn(prob.n, |x| self.u(t_final, x))?;
        Ok(snap.u().max_abs_diff(&exact))
    }

    /// Final deformation after integrating to `t_final`.
    pub fn solve(&self, prob: &BeamProblem, t_final: f64) -> Result<DeformationSnapshot> {
        let n = prob.n;
        let p_hat = GridFunction::from_fn(n, |x| self.p_hat(x))?;
        let mut snap = initial_acceleration(
            GridFunction::from_fn(n, |x| self.u(0.0, x))?,
            GridFunction::from_fn(n, |x| self.v(0.0, x))?,
            &p_hat,
            prob,
            &self.loads(0.0, prob)?,
        )?;
        let steps = (t_final / prob.dt).round() as usize;
        for k in 1..=steps {
            let t = k as f64 * prob.dt;
            snap = step_beam_loaded(&snap, &p_hat, prob, &self.loads(t, prob)?)?.next;
        }
        Ok(snap)
    }
}

/// Pore solution on the domain `s(t) = 1 + s_rate t` moving with the affine
/// velocity `v_bar = s' x`, with zero storage law `psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoreProfile {
    /// `cos(pi x)(1 + t)`.
    Linear,
    /// `cos(pi x) e^{-t}`.
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoreSolution {
    pub s_rate: f64,
    pub profile: PoreProfile,
}

impl PoreSolution {
    pub fn p(&self, t: f64, x: f64) -> f64 {
        let tt = match self.profile {
            PoreProfile::Linear => 1.0 + t,
            PoreProfile::Decay => (-t).exp(),
        };
        (PI * x).cos() * tt
    }

    fn p_t(&self, t: f64, x: f64) -> f64 {
        let tt = match self.profile {
            PoreProfile::Linear => 1.0,
            PoreProfile::Decay => -(-t).exp(),
        };
        (PI * x).cos() * tt
    }

    pub fn s(&self, t: f64) -> f64 {
        1.0 + self.s_rate * t
    }

    /// Source making `p*` exact. With `v_bar = s' x` the transport terms
    /// reduce to `(s'/s) rho(p)`; the Neumann data are zero because
    /// `cos(pi x)` has vanishing slope at both ends.
    pub fn source(&self, t: f64, x: f64, rho: &DensityLaw, constants: &PhysicalConstants) -> f64 {
        let s = self.s(t);
        let p = self.p(t, x);
        let p_xx = -PI * PI * p;
        rho.derivative(p) * self.p_t(t, x) - constants.kappa / (s * s) * p_xx + self.s_rate / s * rho.eval(p)
    }

    /// Integrates to `t_final`; returns the max nodal error.
    pub fn error(&self, prob: &DiffusionProblem, t_final: f64) -> Result<f64> {
        let p = self.solve(prob, t_final)?;
        let exact = GridFunction::from_fn(prob.n, |x| self.p(t_final, x))?;
        Ok(p.max_abs_diff(&exact))
    }

    pub fn solve(&self, prob: &DiffusionProblem, t_final: f64) -> Result<GridFunction> {
        let n = prob.n;
        let mut p = GridFunction::from_fn(n, |x| self.p(0.0, x))?;
        let steps = (t_final / prob.dt).round() as usize;
        let v_bar = GridFunction::from_fn(n, |x| self.s_rate * x)?;
        for k in 1..=steps {
            let t = k as f64 * prob.dt;
            let src: Vec<f64> = p
                .nodes()
                .map(|x| self.source(t, x, &prob.rho, &prob.constants))
                .collect();
            p = step_diffusion_with_source(&p, self.s(t), self.s_rate, &v_bar, t, prob, Some(&src))?.next;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{BoundarySource, BoundedLipschitzLaw};

    fn constants() -> PhysicalConstants {
        PhysicalConstants::new(1.0, 0.01, 1.0, 0.5, 1.0).unwrap()
    }

    fn beam(n: usize, dt: f64) -> BeamProblem {
        BeamProblem::new(
            constants(),
            BoundedLipschitzLaw::new(0.2, 1.0, 0.7).unwrap(),
            BoundedLipschitzLaw::new(0.1, 1.0, 0.0).unwrap(),
            n,
            dt,
        )
        .unwrap()
    }

    #[test]
    fn beam_spatial_order() {
        let sol = BeamSolution { amp: 0.1, p_amp: 0.5, profile: TimeProfile::Quadratic };
        let e: Vec<f64> = [16, 32, 64].iter().map(|&n| sol.error(&beam(n, 0.01), 0.5).unwrap()).collect();
        eprintln!("beam spatial errors {e:?}");
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.3, "order {order}");
        }
    }

    #[test]
    fn pore_spatial_order() {
        let sol = PoreSolution { s_rate: 0.1, profile: PoreProfile::Linear };
        let rho = DensityLaw::linear(1.0, 0.0).unwrap();
        let e: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let prob = DiffusionProblem::new(constants(), rho, BoundedLipschitzLaw::zero(), BoundarySource::Constant(0.0), n, 0.01).unwrap();
                sol.error(&prob, 0.5).unwrap()
            })
            .collect();
        eprintln!("pore spatial errors {e:?}");
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.3, "order {order}");
        }
    }
}
