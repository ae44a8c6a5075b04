//! Damped Newton iteration over banded Jacobians.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Tolerance on the diagonally scaled residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed while searching for an admissible iterate.
    pub max_halvings: usize,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// `max_i |r_i / J_ii|`: the residual expressed in units of the unknowns,
/// independent of how the equations are scaled.
pub fn scaled_norm(r: &[f64], diag: &[f64]) -> f64 {
    r.iter()
        .zip(diag)
        .map(|(ri, di)| if *di != 0.0 { (ri / di).abs() } else { ri.abs() })
        .fold(0.0, f64::max)
}

/// Runs Newton from `x0`.
///
/// Each update is halved until `admissible` accepts the trial point and the
/// residual can be evaluated there; a few extra halvings look for a
/// decrease of the scaled residual.
pub fn solve<R, J, A>(
    solver: &'static str,
    x0: Vec<f64>,
    mut residual: R,
    mut jacobian: J,
    admissible: A,
    settings: &NewtonSettings,
) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<BandedMatrix>,
    A: Fn(&[f64]) -> bool,
{
    const DESCENT_HALVINGS: usize = 6;

    let mut x = x0;
    let mut r = residual(&x)?;
    let mut iterations = 0;
    loop {
        let jac = jacobian(&x)?;
        let diag = jac.diagonal();
        let norm = scaled_norm(&r, &diag);
        if !norm.is_finite() {
            return Err(Error::NewtonDivergence {
                solver,
                iterations,
                residual: norm,
            });
        }
        if norm <= settings.tol {
            return Ok(NewtonOutcome {
                x,
                iterations,
                residual_norm: norm,
            });
        }
        if iterations >= settings.max_iter {
            return Err(Error::NewtonDivergence {
                solver,
                iterations,
                residual: norm,
            });
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = jac.solve(&rhs)?;

        let mut lambda = 1.0;
        let mut halvings = 0;
        let (mut best_x, mut best_r, mut best_norm) = loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            if admissible(&trial) {
                if let Ok(rt) = residual(&trial) {
                    let nt = scaled_norm(&rt, &diag);
                    if nt.is_finite() {
                        break (trial, rt, nt);
                    }
                }
            }
            halvings += 1;
            if halvings > settings.max_halvings {
                return Err(Error::SingularConfiguration(format!(
                    "{solver}: line search could not find an admissible step after {halvings} halvings"
                )));
            }
            lambda *= 0.5;
        };
        let mut extra = 0;
        while best_norm >= norm && extra < DESCENT_HALVINGS {
            lambda *= 0.5;
            extra += 1;
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            if !admissible(&trial) {
                continue;
            }
            if let Ok(rt) = residual(&trial) {
                let nt = scaled_norm(&rt, &diag);
                if nt < best_norm {
                    best_x = trial;
                    best_r = rt;
                    best_norm = nt;
                }
            }
        }
        x = best_x;
        r = best_r;
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_diagonal_nonlinear_system() {
        // x_i^3 = i + 1, restricted to x > 0
        let n = 5;
        let out = solve(
            "test",
            vec![1.0; n],
            |x| Ok(x.iter().enumerate().map(|(i, v)| v * v * v - (i as f64 + 1.0)).collect()),
            |x| {
                let mut j = BandedMatrix::zeros(n, 1, 1);
                for (i, v) in x.iter().enumerate() {
                    j.set(i, i, 3.0 * v * v);
                }
                Ok(j)
            },
            |x| x.iter().all(|v| *v > 0.0),
            &NewtonSettings {
                tol: 1e-13,
                max_iter: 50,
                max_halvings: 40,
            },
        )
        .unwrap();
        for (i, v) in out.x.iter().enumerate() {
            assert!((v - (i as f64 + 1.0).cbrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_divergence_at_cap() {
        let err = solve(
            "test",
            vec![10.0; 9],
            |x| Ok(x.iter().map(|v| v.atan()).collect()),
            |x| {
                let mut j = BandedMatrix::zeros(x.len(), 0, 0);
                for (i, v) in x.iter().enumerate() {
                    j.set(i, i, 1.0 / (1.0 + v * v));
                }
                Ok(j)
            },
            |_| true,
            &NewtonSettings {
                tol: 1e-12,
                max_iter: 1,
                max_halvings: 3,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NewtonDivergence { .. }));
    }
}
