//! The deformation `y = u(t, x)` of the bar and the changes of variables
//! between material coordinates, the physical liquid domain `(0, s)` and the
//! rescaled reference interval.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{node, GridFunction};

/// Nodal deformation, velocity and acceleration at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationSnapshot {
    u: GridFunction,
    v: GridFunction,
    a: GridFunction,
}

impl DeformationSnapshot {
    /// Snapshot at rest acceleration.
    pub fn new(u: GridFunction, v: GridFunction) -> Result<Self> {
        let a = GridFunction::zeros(u.cells());
        Self::with_acceleration(u, v, a)
    }

    pub fn with_acceleration(u: GridFunction, v: GridFunction, a: GridFunction) -> Result<Self> {
        if u.cells() != v.cells() || u.cells() != a.cells() {
            return Err(invalid(
                "snapshot",
                format!("grid sizes differ: u {}, v {}, a {}", u.cells(), v.cells(), a.cells()),
            ));
        }
        if u.first() != 0.0 {
            return Err(invalid("snapshot", format!("u(0) must be 0, got {}", u.first())));
        }
        if v.first() != 0.0 {
            return Err(invalid("snapshot", format!("v(0) must be 0, got {}", v.first())));
        }
        check_monotone(u.values())?;
        Ok(Self { u, v, a })
    }

    /// The rigid identity `u = x` at rest.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(GridFunction::from_fn(n, |x| x)?, GridFunction::constant(n, 0.0)?)
    }

    pub fn u(&self) -> &GridFunction {
        &self.u
    }

    pub fn v(&self) -> &GridFunction {
        &self.v
    }

    pub fn a(&self) -> &GridFunction {
        &self.a
    }

    pub fn cells(&self) -> usize {
        self.u.cells()
    }

    /// Right end of the liquid domain, `s = u(1)`.
    pub fn s(&self) -> f64 {
        self.u.last()
    }

    /// `s' = v(1)`.
    pub fn s_dot(&self) -> f64 {
        self.v.last()
    }

    pub fn min_strain(&self) -> f64 {
        self.u.min_cell_gradient()
    }
}

/// Errors unless every cell gradient is positive.
pub(crate) fn check_monotone(u: &[f64]) -> Result<()> {
    let n = u.len() - 1;
    for (c, w) in u.windows(2).enumerate() {
        let g = (w[1] - w[0]) * n as f64;
        if !(g > 0.0) {
            return Err(Error::SingularConfiguration(format!(
                "deformation gradient {g:.3e} <= 0 in cell {c}"
            )));
        }
    }
    Ok(())
}

/// Material coordinate `x` with `u(x) = y`, for `y` in the physical domain.
///
/// Points beyond the right end `s` map to `1`.
pub fn invert_deformation(snap: &DeformationSnapshot, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("position must be >= 0, got {y}")));
    }
    Ok(invert_monotone(snap.u.values(), y))
}

fn invert_monotone(u: &[f64], y: f64) -> f64 {
    let n = u.len() - 1;
    if y <= 0.0 {
        return 0.0;
    }
    if y >= u[n] {
        return 1.0;
    }
    // first node with u > y; the cell is [j - 1, j]
    let j = u.partition_point(|&uj| uj <= y).clamp(1, n);
    let theta = (y - u[j - 1]) / (u[j] - u[j - 1]);
    ((j - 1) as f64 + theta) / n as f64
}

/// Pressure in material coordinates, `p_hat(x_j) = p_bar(u(x_j) / s)`, on the
/// grid of `snap`.
pub fn pull_back_pressure(p_bar: &GridFunction, snap: &DeformationSnapshot) -> GridFunction {
    let s = snap.s();
    let n = snap.cells();
    let mut values: Vec<f64> = snap.u.values().iter().map(|&uj| p_bar.interpolate(uj / s)).collect();
    values[0] = p_bar.first();
    values[n] = p_bar.last();
    GridFunction::from_vec_unchecked(values)
}

/// Velocity in reference coordinates on the grid of `snap`.
pub fn pull_back_velocity(snap: &DeformationSnapshot) -> GridFunction {
    pull_back_velocity_on(snap, snap.cells())
}

/// `v_bar(x_k) = v(u^{-1}(s x_k))` on an `n`-cell reference grid.
pub fn pull_back_velocity_on(snap: &DeformationSnapshot, n: usize) -> GridFunction {
    let s = snap.s();
    let u = snap.u.values();
    let mut values: Vec<f64> = (0..=n)
        .map(|k| snap.v.interpolate(invert_monotone(u, s * node(k, n))))
        .collect();
    values[0] = 0.0;
    values[n] = snap.s_dot();
    GridFunction::from_vec_unchecked(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn snap(n: usize, u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> DeformationSnapshot {
        DeformationSnapshot::new(GridFunction::from_fn(n, u).unwrap(), GridFunction::from_fn(n, v).unwrap()).unwrap()
    }

    #[test]
    fn inverse_of_identity_and_stretch() {
        let id = snap(16, |x| x, |_| 0.0);
        assert!((invert_deformation(&id, 0.37).unwrap() - 0.37).abs() < 1e-15);
        let st = snap(16, |x| 2.0 * x, |_| 0.0);
        assert_eq!(invert_deformation(&st, 1.0).unwrap(), 0.5);
        assert_eq!(invert_deformation(&st, 3.0).unwrap(), 1.0);
        assert_eq!(invert_deformation(&st, 0.0).unwrap(), 0.0);
        assert!(matches!(invert_deformation(&st, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_non_monotone_and_unpinned() {
        let u = GridFunction::from_fn(10, |x| x * (1.0 - x)).unwrap();
        let v = GridFunction::zeros(10);
        assert!(matches!(
            DeformationSnapshot::new(u, v.clone()),
            Err(Error::SingularConfiguration(_))
        ));
        let u = GridFunction::from_fn(10, |x| x + 0.1).unwrap();
        assert!(DeformationSnapshot::new(u, v).is_err());
    }

    #[test]
    fn affine_deformation_pulls_back_nodewise() {
        let sn = snap(20, |x| 1.3 * x, |x| 0.4 * x);
        let p = GridFunction::from_fn(20, |x| (3.0 * x).sin()).unwrap();
        let ph = pull_back_pressure(&p, &sn);
        for j in 0..=20 {
            assert!((ph[j] - p[j]).abs() < 1e-14);
        }
        let vb = pull_back_velocity(&sn);
        for (j, x) in vb.nodes().enumerate() {
            assert!((vb[j] - 0.4 * x).abs() < 1e-14);
        }
        let c = GridFunction::constant(20, 2.5).unwrap();
        let sq = snap(20, |x| x + 0.3 * x * x, |_| 0.0);
        assert!(pull_back_pressure(&c, &sq).values().iter().all(|&v| v == 2.5));
        assert!(pull_back_velocity(&sq).values().iter().all(|&v| v == 0.0));
    }

    fn pressure_error(n: usize) -> f64 {
        let u = |x: f64| x + 0.3 * x * x;
        let s = u(1.0);
        let sn = snap(n, u, |_| 0.0);
        let p = GridFunction::from_fn(n, |x| (2.0 * x).cos()).unwrap();
        let ph = pull_back_pressure(&p, &sn);
        // oracle: composition evaluated on a 10x finer grid
        let fine = GridFunction::from_fn(10 * n, |x| (2.0 * u(x) / s).cos()).unwrap();
        (0..=n).map(|j| (ph[j] - fine[10 * j]).abs()).fold(0.0, f64::max)
    }

    fn velocity_error(n: usize) -> f64 {
        let u = |x: f64| x + 0.3 * x * x;
        let v = |x: f64| (1.5 * x).sin();
        let s = u(1.0);
        let sn = snap(n, u, v);
        let vb = pull_back_velocity(&sn);
        // exact inverse of x + 0.3 x^2 = y
        let inv = |y: f64| (-1.0 + (1.0 + 1.2 * y).sqrt()) / 0.6;
        let fine = GridFunction::from_fn(10 * n, |x| v(inv(s * x))).unwrap();
        (0..=n).map(|j| (vb[j] - fine[10 * j]).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn pullbacks_are_second_order() {
        for e in [pressure_error, velocity_error] {
            let ratio = e(32) / e(64);
            assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
        }
    }

    #[test]
    fn endpoints_are_pinned() {
        let sn = snap(12, |x| x + 0.2 * (3.0 * x).sin(), |x| x * x);
        let p = GridFunction::from_fn(12, |x| x.exp()).unwrap();
        assert_eq!(pull_back_pressure(&p, &sn).last(), p.last());
        assert_eq!(pull_back_velocity(&sn).last(), sn.s_dot());
        assert_eq!(pull_back_velocity_on(&sn, 40).last(), sn.s_dot());
    }

    proptest! {
        #[test]
        fn round_trip_and_monotone(amp in -0.25f64..0.25, freq in 0.5f64..3.0, n in 8usize..64) {
            let sn = snap(n, |x| x + amp * (freq * x).sin() / freq, |_| 0.0);
            for (j, x) in sn.u().nodes().enumerate() {
                let back = invert_deformation(&sn, sn.u()[j]).unwrap();
                prop_assert!((back - x).abs() < 1e-12);
            }
            let mut prev = 0.0;
            for k in 0..=200 {
                let y = 1.2 * sn.s() * k as f64 / 200.0;
                let x = invert_deformation(&sn, y).unwrap();
                prop_assert!(x >= prev);
                prev = x;
            }
        }
    }
}
