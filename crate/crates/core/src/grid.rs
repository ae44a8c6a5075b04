//! Nodal functions on the uniform grid over `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 8;

/// Values at `N + 1` uniformly spaced nodes `x_j = j / N` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_CELLS + 1 {
            return Err(invalid(
                "grid",
                format!("need at least {} nodes, got {}", MIN_CELLS + 1, values.len()),
            ));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("grid", format!("non-finite value at node {j}")));
        }
        Ok(Self { values })
    }

    /// Samples `f` at the nodes of an `n`-cell grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..=n).map(|j| f(node(j, n))).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n + 1])
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n.max(MIN_CELLS) + 1],
        }
    }

    /// Builds without validation; callers guarantee the invariants.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.len() > MIN_CELLS);
        Self { values }
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Node coordinates.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.cells();
        (0..=n).map(move |j| node(j, n))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Piecewise-linear interpolant at `x`, clamped to `[0, 1]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.cells();
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= 1.0 {
            return self.values[n];
        }
        let scaled = x * n as f64;
        let j = (scaled.floor() as usize).min(n - 1);
        let theta = scaled - j as f64;
        self.values[j] + theta * (self.values[j + 1] - self.values[j])
    }

    /// Forward differences `(f_{j+1} - f_j) / h`, one per cell.
    pub fn cell_gradients(&self) -> Vec<f64> {
        let inv_h = self.cells() as f64;
        self.values.windows(2).map(|w| (w[1] - w[0]) * inv_h).collect()
    }

    pub fn min_cell_gradient(&self) -> f64 {
        self.cell_gradients().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Central second differences at interior nodes, linearly extrapolated to
    /// the two end nodes.
    pub fn second_differences(&self) -> Vec<f64> {
        let n = self.cells();
        let inv_h2 = (n * n) as f64;
        let mut d2 = vec![0.0; n + 1];
        for j in 1..n {
            d2[j] = (self.values[j + 1] - 2.0 * self.values[j] + self.values[j - 1]) * inv_h2;
        }
        d2[0] = 2.0 * d2[1] - d2[2];
        d2[n] = 2.0 * d2[n - 1] - d2[n - 2];
        d2
    }

    /// Trapezoid rule for `int_0^1 f`.
    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.values)
    }

    /// Discrete L2 norm (trapezoid rule on the squares).
    pub fn l2_norm(&self) -> f64 {
        trapezoid_of_squares(&self.values).sqrt()
    }

    /// Discrete L2 norm of the derivative, midpoint rule on cell gradients.
    pub fn gradient_l2_norm(&self) -> f64 {
        let h = self.spacing();
        self.cell_gradients().iter().map(|g| g * g * h).sum::<f64>().sqrt()
    }

    /// Discrete L2 norm of the second derivative.
    pub fn second_derivative_l2_norm(&self) -> f64 {
        trapezoid_of_squares(&self.second_differences()).sqrt()
    }

    /// Discrete full H2 norm `(|z|^2 + |z'|^2 + |z''|^2)^{1/2}`.
    pub fn h2_norm(&self) -> f64 {
        (self.l2_norm().powi(2) + self.gradient_l2_norm().powi(2) + self.second_derivative_l2_norm().powi(2)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Max-norm distance to another function on the same grid.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.values[j]
    }
}

/// Coordinate of node `j` on an `n`-cell grid.
#[inline]
pub fn node(j: usize, n: usize) -> f64 {
    j as f64 / n as f64
}

pub fn trapezoid(values: &[f64]) -> f64 {
    let n = values.len() - 1;
    let h = 1.0 / n as f64;
    let inner: f64 = values[1..n].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n]))
}

pub fn trapezoid_of_squares(values: &[f64]) -> f64 {
    let n = values.len() - 1;
    let h = 1.0 / n as f64;
    let inner: f64 = values[1..n].iter().map(|v| v * v).sum();
    h * (inner + 0.5 * (values[0] * values[0] + values[n] * values[n]))
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_or_nonfinite() {
        assert!(GridFunction::new(vec![0.0; 8]).is_err());
        let mut v = vec![0.0; 9];
        v[3] = f64::NAN;
        assert!(GridFunction::new(v).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_linear_functions() {
        let f = GridFunction::from_fn(16, |x| 3.0 * x - 1.0).unwrap();
        for &x in &[0.0, 0.013, 0.5, 0.77, 1.0] {
            assert!((f.interpolate(x) - (3.0 * x - 1.0)).abs() < 1e-14);
        }
        assert_eq!(f.interpolate(-0.2), -1.0);
        assert_eq!(f.interpolate(1.4), 2.0);
    }

    #[test]
    fn norms_of_identity() {
        let f = GridFunction::from_fn(400, |x| x).unwrap();
        assert!((f.l2_norm() - (1.0f64 / 3.0).sqrt()).abs() < 1e-5);
        assert!((f.gradient_l2_norm() - 1.0).abs() < 1e-12);
        assert!(f.second_derivative_l2_norm() < 1e-9);
    }

    #[test]
    fn trapezoid_second_order() {
        let e = |n| (GridFunction::from_fn(n, |x: f64| x.exp()).unwrap().trapezoid() - (1f64.exp() - 1.0)).abs();
        let ratio = e(32) / e(64);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }
}
