//! Initial data families and the boundary compatibility condition.
//!
//! The deformation is `u0(x) = lambda x + alpha sin(pi x)`, which satisfies
//! `u0(0) = 0` and `u0_xx(0) = u0_xx(1) = 0` for every parameter choice; it is
//! strictly monotone iff `lambda > |alpha| pi`. The velocity is `v0 = beta x`
//! and the pressure is constant or `mean + amp cos(pi x)`.
//!
//! Strong solutions need the natural boundary condition to hold at `t = 0`:
//!
//! ```text
//! -gamma u0_xxx(1) + f(u0_x(1)) + k_v v0_x(1) + nu(p0(1)) + phi(u0(1)) = 0
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constitutive::{elastic_response, MaterialSystem};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Largest admissible violation of the compatibility identity.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PressureProfile {
    Constant { mean: f64 },
    Cosine { mean: f64, amp: f64 },
}

impl PressureProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            PressureProfile::Constant { mean } => mean,
            PressureProfile::Cosine { mean, amp } => mean + amp * (PI * x).cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub stretch: f64,
    pub alpha: f64,
    pub pressure: PressureProfile,
    pub v0_slope: f64,
}

impl InitialData {
    pub fn u0(&self, x: f64) -> f64 {
        self.stretch * x + self.alpha * (PI * x).sin()
    }

    pub fn u0_x(&self, x: f64) -> f64 {
        self.stretch + self.alpha * PI * (PI * x).cos()
    }

    pub fn v0(&self, x: f64) -> f64 {
        self.v0_slope * x
    }

    /// `min_x u0_x = lambda - |alpha| pi`.
    pub fn min_gradient(&self) -> f64 {
        self.stretch - self.alpha.abs() * PI
    }

    /// Errors unless `u0_x > 0` on `[0, 1]` and all values are finite.
    pub fn check_monotone(&self) -> Result<()> {
        let finite = [self.stretch, self.alpha, self.v0_slope].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Assumption("initial data must be finite".into()));
        }
        let g = self.min_gradient();
        if !(g > 0.0) {
            return Err(Error::Assumption(format!(
                "initial deformation gradient must be > 0 on [0,1]; min u0_x = stretch - |alpha| pi = {g:.6e}"
            )));
        }
        Ok(())
    }

    /// Left-hand side of the compatibility identity.
    pub fn compatibility_residual(&self, material: &MaterialSystem) -> Result<f64> {
        self.check_monotone()?;
        let c = &material.constants;
        let u0_xxx_1 = self.alpha * PI.powi(3);
        Ok(-c.gamma * u0_xxx_1
            + elastic_response(self.u0_x(1.0), c.k)?
            + c.k_v * self.v0_slope
            + material.nu.eval(self.pressure.eval(1.0))
            + material.phi.eval(self.u0(1.0)))
    }

    /// Copy with `v0_slope` chosen so that the identity holds exactly.
    pub fn with_compatible_velocity(&self, material: &MaterialSystem) -> Result<Self> {
        let rest = Self {
            v0_slope: 0.0,
            ..*self
        };
        let r = rest.compatibility_residual(material)?;
        Ok(Self {
            v0_slope: -r / material.constants.k_v,
            ..*self
        })
    }

    /// Errors when the compatibility identity is violated beyond
    /// [`COMPATIBILITY_TOL`].
    pub fn check_compatible(&self, material: &MaterialSystem) -> Result<()> {
        let r = self.compatibility_residual(material)?;
        if r.abs() >= COMPATIBILITY_TOL {
            return Err(Error::Assumption(format!(
                "initial data violate the boundary compatibility identity at x = 1: residual {r:.3e}"
            )));
        }
        Ok(())
    }

    /// Nodal `(u0, v0)` on the beam grid and `p0` on the pore grid.
    pub fn sample(&self, n_beam: usize, n_pore: usize) -> Result<(GridFunction, GridFunction, GridFunction)> {
        self.check_monotone()?;
        Ok((
            GridFunction::from_fn(n_beam, |x| self.u0(x))?,
            GridFunction::from_fn(n_beam, |x| self.v0(x))?,
            GridFunction::from_fn(n_pore, |x| self.pressure.eval(x))?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{BoundedLipschitzLaw, DensityLaw, PhysicalConstants};

    fn material() -> MaterialSystem {
        MaterialSystem {
            constants: PhysicalConstants::new(1.0, 0.01, 1.0, 0.5, 1.0).unwrap(),
            rho: DensityLaw::new(1.0, 0.5, 1.0, 1.0).unwrap(),
            nu: BoundedLipschitzLaw::new(0.1, 1.0, 0.0).unwrap(),
            phi: BoundedLipschitzLaw::new(0.2, 1.0, 1.0).unwrap(),
            psi: BoundedLipschitzLaw::zero(),
        }
    }

    fn data(alpha: f64) -> InitialData {
        InitialData {
            stretch: 1.0,
            alpha,
            pressure: PressureProfile::Cosine { mean: 0.2, amp: 0.1 },
            v0_slope: 0.0,
        }
    }

    #[test]
    fn family_satisfies_end_conditions() {
        let d = data(0.2);
        let h = 1e-4;
        for x0 in [0.0f64, 1.0] {
            // one-sided second difference at the ends
            let s = if x0 == 0.0 { 1.0 } else { -1.0 };
            let uxx = (d.u0(x0) - 2.0 * d.u0(x0 + s * h) + d.u0(x0 + 2.0 * s * h)) / (h * h);
            assert!(uxx.abs() < 1e-2, "u0_xx({x0}) = {uxx}");
        }
        assert_eq!(d.u0(0.0), 0.0);
    }

    #[test]
    fn gradient_touching_zero_is_rejected() {
        let d = data(1.0 / PI);
        assert!(matches!(d.check_monotone(), Err(Error::Assumption(_))));
        assert!(data(0.3).check_monotone().is_ok());
        assert!(data(-0.3).check_monotone().is_ok());
        assert!(data(-0.33).check_monotone().is_err());
    }

    #[test]
    fn compatible_velocity_zeroes_residual() {
        let m = material();
        let d = data(0.1).with_compatible_velocity(&m).unwrap();
        assert!(d.compatibility_residual(&m).unwrap().abs() < 1e-14);
        assert!(d.check_compatible(&m).is_ok());
        assert!(data(0.1).check_compatible(&m).is_err());
    }

    #[test]
    fn residual_matches_finite_difference_evaluation() {
        let m = material();
        let d = InitialData {
            v0_slope: 0.37,
            ..data(0.15)
        };
        let h = 1e-3;
        let x = 1.0;
        let uxxx = (d.u0(x) - 3.0 * d.u0(x - h) + 3.0 * d.u0(x - 2.0 * h) - d.u0(x - 3.0 * h)) / (h * h * h);
        let ux = (3.0 * d.u0(x) - 4.0 * d.u0(x - h) + d.u0(x - 2.0 * h)) / (2.0 * h);
        let c = m.constants;
        let oracle = -c.gamma * uxxx
            + elastic_response(ux, c.k).unwrap()
            + c.k_v * 0.37
            + m.nu.eval(0.1)
            + m.phi.eval(d.u0(1.0));
        let r = d.compatibility_residual(&m).unwrap();
        assert!((r - oracle).abs() < 1e-4, "{r} vs {oracle}");
    }
}
