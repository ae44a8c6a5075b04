//! Spectral Galerkin discretisation of the beam problem with frozen pressure.
//!
//! The trial space is spanned by `{x, sin(pi x), ..., sin((n-1) pi x)}`,
//! orthonormalised in `(z, w)_X = (z, w) + (z', w') + (z'', w'')`. Every
//! member vanishes at `x = 0`; the remaining boundary conditions are natural
//! and hold only weakly. The weak form is
//!
//! ```text
//! m (u_tt, z) + gamma (u_xx, z'') + (f(u_x) + k_v u_xt + nu(p_hat), z') = g(t) z(1),
//! g = -phi(u(1)) + extra(t)
//! ```
//!
//! integrated with the same Newmark rule as the finite-difference solver.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constitutive::{
    elastic_potential, elastic_response, elastic_response_derivative, elastic_response_second_derivative,
    BoundedLipschitzLaw, PhysicalConstants,
};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_q(x), P_q'(x))` by the three-term recurrence.
fn legendre(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `[0, 1]` with `panels` equal panels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn composite(panels: usize, q: usize) -> Self {
        let (xs, ws) = gauss_legendre(q);
        let h = 1.0 / panels as f64;
        let mut points = Vec::with_capacity(panels * q);
        let mut weights = Vec::with_capacity(panels * q);
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, w) in xs.iter().zip(&ws) {
                points.push(a + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Self { points, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Generator `k`: `x` for `k = 0`, `sin(k pi x)` otherwise, with its first
/// two derivatives.
fn generator(k: usize, x: f64) -> [f64; 3] {
    if k == 0 {
        [x, 1.0, 0.0]
    } else {
        let w = k as f64 * PI;
        let (s, c) = (w * x).sin_cos();
        [s, w * c, -w * w * s]
    }
}

/// Orthonormal basis of the trial space with tabulated values.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    pub n: usize,
    /// Row `i` holds the generator coefficients of basis function `i`.
    pub coefficients: DMatrix<f64>,
    pub quadrature: Quadrature,
    /// Values, first and second derivatives at the quadrature points
    /// (`points x n`).
    pub values: [DMatrix<f64>; 3],
    /// Basis values at `x = 1`.
    pub at_one: DVector<f64>,
}

impl GalerkinBasis {
    /// `X` Gram matrix of the basis by quadrature.
    pub fn gram(&self) -> DMatrix<f64> {
        let w = DMatrix::from_diagonal(&DVector::from_vec(self.quadrature.weights.clone()));
        let mut g = DMatrix::zeros(self.n, self.n);
        for d in 0..3 {
            g += self.values[d].transpose() * &w * &self.values[d];
        }
        g
    }

    /// `[z_i(x), z_i'(x), z_i''(x)]` for every basis function.
    pub fn eval(&self, x: f64) -> [DVector<f64>; 3] {
        let gens: Vec<[f64; 3]> = (0..self.n).map(|k| generator(k, x)).collect();
        std::array::from_fn(|d| {
            let g = DVector::from_iterator(self.n, gens.iter().map(|v| v[d]));
            &self.coefficients * g
        })
    }

    /// Expansion `sum c_i z_i` sampled on an `n_grid`-cell grid.
    pub fn reconstruct(&self, coeffs: &DVector<f64>, n_grid: usize) -> Result<GridFunction> {
        GridFunction::from_fn(n_grid, |x| self.eval(x)[0].dot(coeffs))
    }

    /// `X`-orthogonal projection of a function given with two derivatives.
    pub fn project(&self, f: impl Fn(f64) -> [f64; 3]) -> DVector<f64> {
        let q = &self.quadrature;
        let mut c = DVector::zeros(self.n);
        for (k, (x, w)) in q.points.iter().zip(&q.weights).enumerate() {
            let fv = f(*x);
            for i in 0..self.n {
                c[i] += w * (0..3).map(|d| fv[d] * self.values[d][(k, i)]).sum::<f64>();
            }
        }
        c
    }
}

/// Gram-Schmidt (applied twice) in the `X` inner product over `n`
/// generators, with `q` Gauss points on each of `max(4, n)` panels.
pub fn build_basis(n: usize, q: usize) -> Result<GalerkinBasis> {
    if n == 0 {
        return Err(Error::Basis("need at least one mode".into()));
    }
    if q < 2 * n {
        return Err(Error::Basis(format!("quadrature order {q} below 2n = {}", 2 * n)));
    }
    let quadrature = Quadrature::composite(n.max(4), q);
    let npts = quadrature.points.len();
    let gens: [DMatrix<f64>; 3] =
        std::array::from_fn(|d| DMatrix::from_fn(npts, n, |p, k| generator(k, quadrature.points[p])[d]));
    let w = DMatrix::from_diagonal(&DVector::from_vec(quadrature.weights.clone()));
    let mut gen_gram = DMatrix::zeros(n, n);
    for g in &gens {
        gen_gram += g.transpose() * &w * g;
    }
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &gen_gram * b)[(0, 0)];
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        let norm0 = inner(&v, &v).sqrt();
        for _ in 0..2 {
            for r in &rows {
                let proj = inner(&v, r);
                v -= r * proj;
            }
        }
        let norm = inner(&v, &v).sqrt();
        if !(norm > 1e-12 * norm0) {
            return Err(Error::Basis(format!("generator {k} is linearly dependent")));
        }
        rows.push(v / norm);
    }
    let coefficients = DMatrix::from_fn(n, n, |i, k| rows[i][k]);
    let values: [DMatrix<f64>; 3] = std::array::from_fn(|d| &gens[d] * coefficients.transpose());
    let gen_one = DVector::from_iterator(n, (0..n).map(|k| generator(k, 1.0)[0]));
    let at_one = &coefficients * gen_one;
    let basis = GalerkinBasis {
        n,
        coefficients,
        quadrature,
        values,
        at_one,
    };
    let dev = (basis.gram() - DMatrix::identity(n, n)).abs().max();
    if dev > 1e-10 {
        return Err(Error::Basis(format!("Gram matrix deviates from identity by {dev:.3e}")));
    }
    Ok(basis)
}

/// Physical data of the Galerkin problem.
pub struct GalerkinProblem<'a> {
    pub constants: PhysicalConstants,
    pub phi: BoundedLipschitzLaw,
    pub nu: BoundedLipschitzLaw,
    /// Frozen pressure `p_hat(t, x)`.
    pub p_hat: &'a dyn Fn(f64, f64) -> f64,
    /// Extra tip load added to `-phi(u(1))`.
    pub extra_load: &'a dyn Fn(f64) -> f64,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

/// Coefficient history and energy bookkeeping of a Galerkin run.
#[derive(Debug, Clone)]
pub struct GalerkinTrajectory {
    pub times: Vec<f64>,
    pub coefficients: Vec<DVector<f64>>,
    pub velocities: Vec<DVector<f64>>,
    /// `E_k + sum D`.
    pub energy_lhs: Vec<f64>,
    /// `E_0 + sum W + sum slack`.
    pub energy_rhs: Vec<f64>,
    /// Final Newton residual (in basis-coefficient units) per step.
    pub residuals: Vec<f64>,
}

impl GalerkinTrajectory {
    pub fn reconstruct(&self, basis: &GalerkinBasis, k: usize, n_grid: usize) -> Result<GridFunction> {
        basis.reconstruct(&self.coefficients[k], n_grid)
    }

    /// Smallest `rhs - lhs` of the energy inequality.
    pub fn energy_margin(&self) -> f64 {
        self.energy_lhs
            .iter()
            .zip(&self.energy_rhs)
            .skip(1)
            .map(|(l, r)| r - l)
            .fold(f64::INFINITY, f64::min)
    }
}

struct Operators {
    mass: DMatrix<f64>,
    stiff: DMatrix<f64>,
    visc: DMatrix<f64>,
}

fn operators(basis: &GalerkinBasis, c: &PhysicalConstants) -> Operators {
    let w = DMatrix::from_diagonal(&DVector::from_vec(basis.quadrature.weights.clone()));
    let gram = |d: usize| basis.values[d].transpose() * &w * &basis.values[d];
    Operators {
        mass: gram(0) * c.m,
        stiff: gram(2) * c.gamma,
        visc: gram(1) * c.k_v,
    }
}

/// Strains `u_x` at the quadrature points, rejecting nonpositive ones.
fn strains(basis: &GalerkinBasis, c: &DVector<f64>) -> Result<DVector<f64>> {
    let g = &basis.values[1] * c;
    if let Some(k) = g.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::SingularConfiguration(format!(
            "Galerkin strain {:.3e} <= 0 at quadrature point x = {:.6}",
            g[k], basis.quadrature.points[k]
        )));
    }
    Ok(g)
}

/// Everything but inertia: `K c + C v + (f(u_x) + nu, z') - g z(1)`.
fn static_force(
    basis: &GalerkinBasis,
    ops: &Operators,
    prob: &GalerkinProblem,
    t: f64,
    c: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let g = strains(basis, c)?;
    let q = &basis.quadrature;
    let mut sigma = DVector::zeros(q.points.len());
    for k in 0..q.points.len() {
        let s = elastic_response(g[k], prob.constants.k)? + prob.nu.eval((prob.p_hat)(t, q.points[k]));
        sigma[k] = q.weights[k] * s;
    }
    let s_tip = basis.at_one.dot(c);
    let load = -prob.phi.eval(s_tip) + (prob.extra_load)(t);
    Ok(&ops.stiff * c + &ops.visc * v + basis.values[1].transpose() * sigma - &basis.at_one * load)
}

fn energy(basis: &GalerkinBasis, ops: &Operators, prob: &GalerkinProblem, c: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let g = strains(basis, c)?;
    let q = &basis.quadrature;
    let mut stored = 0.0;
    for k in 0..q.points.len() {
        stored += q.weights[k] * elastic_potential(g[k], prob.constants.k)?;
    }
    let kinetic = 0.5 * v.dot(&(&ops.mass * v));
    let bending = 0.5 * c.dot(&(&ops.stiff * c));
    Ok(kinetic + bending + stored + prob.phi.primitive(basis.at_one.dot(c)))
}

/// Integrates the Galerkin system from `u0`, `v0` (each given with two
/// derivatives) to `t_final`.
pub fn integrate_galerkin(
    basis: &GalerkinBasis,
    u0: impl Fn(f64) -> [f64; 3],
    v0: impl Fn(f64) -> [f64; 3],
    prob: &GalerkinProblem,
    t_final: f64,
) -> Result<GalerkinTrajectory> {
    let ops = operators(basis, &prob.constants);
    let dt = prob.dt;
    let mass_lu = ops.mass.clone().lu();
    let mut c = basis.project(u0);
    let mut v = basis.project(v0);
    strains(basis, &c)?;
    let f0 = static_force(basis, &ops, prob, 0.0, &c, &v)?;
    let mut a = mass_lu
        .solve(&(-f0))
        .ok_or_else(|| Error::Basis("singular mass matrix".into()))?;
    let e0 = energy(basis, &ops, prob, &c, &v)?;
    let q = &basis.quadrature;
    let k_el = prob.constants.k;
    let steps = (t_final / dt).round() as usize;
    let mut traj = GalerkinTrajectory {
        times: vec![0.0],
        coefficients: vec![c.clone()],
        velocities: vec![v.clone()],
        energy_lhs: vec![e0],
        energy_rhs: vec![e0],
        residuals: vec![0.0],
    };
    let (mut diss, mut work, mut slack) = (0.0, 0.0, 0.0);
    let lin = &ops.mass * (4.0 / (dt * dt)) + &ops.stiff + &ops.visc * (2.0 / dt);
    for step in 1..=steps {
        let t = step as f64 * dt;
        let t_old = t - dt;
        let newmark = |x: &DVector<f64>| {
            let vn = (x - &c) * (2.0 / dt) - &v;
            let an = (x - &c) * (4.0 / (dt * dt)) - &v * (4.0 / dt) - &a;
            (vn, an)
        };
        let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
            let (vn, an) = newmark(x);
            Ok(&ops.mass * an + static_force(basis, &ops, prob, t, x, &vn)?)
        };
        let mut x = &c + &v * dt + &a * (0.5 * dt * dt);
        if strains(basis, &x).is_err() {
            x = c.clone();
        }
        let mut r = residual(&x)?;
        let mut iters = 0;
        let res_norm = loop {
            let g = strains(basis, &x)?;
            let mut jac = lin.clone();
            let mut wq = DVector::zeros(q.points.len());
            for k in 0..q.points.len() {
                wq[k] = q.weights[k] * elastic_response_derivative(g[k], k_el)?;
            }
            jac += basis.values[1].transpose() * DMatrix::from_diagonal(&wq) * &basis.values[1];
            let s_tip = basis.at_one.dot(&x);
            jac += &basis.at_one * basis.at_one.transpose() * prob.phi.derivative(s_tip);
            let scaled = (0..basis.n).map(|i| (r[i] / jac[(i, i)]).abs()).fold(0.0, f64::max);
            if scaled <= prob.newton_tol {
                break scaled;
            }
            if iters >= prob.newton_max_iter {
                return Err(Error::NewtonDivergence {
                    solver: "galerkin",
                    iterations: iters,
                    residual: scaled,
                });
            }
            let delta = jac
                .lu()
                .solve(&(-&r))
                .ok_or(Error::SingularMatrix(0))?;
            let mut lambda = 1.0;
            loop {
                let trial = &x + &delta * lambda;
                if let Ok(rt) = residual(&trial) {
                    x = trial;
                    r = rt;
                    break;
                }
                lambda *= 0.5;
                if lambda < 1e-12 {
                    return Err(Error::SingularConfiguration(
                        "Galerkin line search could not keep strains positive".into(),
                    ));
                }
            }
            iters += 1;
        };
        let (vn, an) = newmark(&x);
        let g_old = strains(basis, &c)?;
        let g_new = strains(basis, &x)?;
        let gd_old = &basis.values[1] * &v;
        let gd_new = &basis.values[1] * &vn;
        for k in 0..q.points.len() {
            let w = q.weights[k];
            let gd = 0.5 * (gd_old[k] + gd_new[k]);
            diss += dt * prob.constants.k_v * w * gd * gd;
            let xk = q.points[k];
            let nu_avg = 0.5 * (prob.nu.eval((prob.p_hat)(t_old, xk)) + prob.nu.eval((prob.p_hat)(t, xk)));
            let dg = g_new[k] - g_old[k];
            work -= w * dg * nu_avg;
            let fpp = elastic_response_second_derivative(g_old[k].min(g_new[k]), k_el)?.abs();
            slack += w * dg.abs().powi(3) * fpp / 12.0;
        }
        let (s_old, s_new) = (basis.at_one.dot(&c), basis.at_one.dot(&x));
        let ds = s_new - s_old;
        work += ds * 0.5 * ((prob.extra_load)(t_old) + (prob.extra_load)(t));
        slack += ds.abs().powi(3) * prob.phi.sup_second_derivative() / 12.0;
        c = x;
        v = vn;
        a = an;
        let e = energy(basis, &ops, prob, &c, &v)?;
        traj.times.push(t);
        traj.coefficients.push(c.clone());
        traj.velocities.push(v.clone());
        traj.energy_lhs.push(e + diss);
        traj.energy_rhs.push(e0 + work + slack + 1e-10 * (1.0 + e0.abs()));
        traj.residuals.push(res_norm);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_high_degree() {
        let (x, w) = gauss_legendre(6);
        // exact through degree 11
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((int - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let quad = Quadrature::composite(4, 8);
        assert!((quad.integrate(|x| (3.0 * x).exp()) - ((3.0f64).exp() - 1.0) / 3.0).abs() < 1e-13);
    }

    #[test]
    fn single_mode_has_unit_norm() {
        let b = build_basis(1, 2).unwrap();
        // X norm of x is sqrt(1/3 + 1)
        let expect = 1.0 / (4.0f64 / 3.0).sqrt();
        assert!((b.coefficients[(0, 0)] - expect).abs() < 1e-13);
        assert!((b.gram()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_is_identity_and_basis_vanishes_at_zero() {
        for n in [3, 8, 16] {
            let b = build_basis(n, 2 * n).unwrap();
            let dev = (b.gram() - DMatrix::identity(n, n)).abs().max();
            assert!(dev < 1e-10, "n={n} dev {dev}");
            assert!(b.eval(0.0)[0].abs().max() < 1e-14);
        }
        assert!(matches!(build_basis(4, 7), Err(Error::Basis(_))));
        assert!(matches!(build_basis(0, 4), Err(Error::Basis(_))));
    }

    #[test]
    fn projection_reproduces_span_members() {
        let b = build_basis(6, 12).unwrap();
        let f = |x: f64| {
            let (s1, c1) = (PI * x).sin_cos();
            let (s3, c3) = (3.0 * PI * x).sin_cos();
            [
                0.7 * x + 0.2 * s1 - 0.05 * s3,
                0.7 + 0.2 * PI * c1 - 0.15 * PI * c3,
                -0.2 * PI * PI * s1 + 0.45 * PI * PI * s3,
            ]
        };
        let c = b.project(f);
        for &x in &[0.1, 0.37, 0.8, 1.0] {
            assert!((b.eval(x)[0].dot(&c) - f(x)[0]).abs() < 1e-10);
        }
    }

    fn problem<'a>(p_hat: &'a dyn Fn(f64, f64) -> f64, zero: &'a dyn Fn(f64) -> f64, nu_c: f64, shift: f64) -> GalerkinProblem<'a> {
        GalerkinProblem {
            constants: PhysicalConstants::new(1.0, 0.01, 1.0, 0.5, 1.0).unwrap(),
            phi: BoundedLipschitzLaw::new(0.2, 1.0, shift).unwrap(),
            nu: BoundedLipschitzLaw::new(nu_c, 1.0, 0.0).unwrap(),
            p_hat,
            extra_load: zero,
            dt: 0.01,
            newton_tol: 1e-12,
            newton_max_iter: 30,
        }
    }

    #[test]
    fn equilibrium_coefficients_stay_constant() {
        let p_star: f64 = 0.5;
        let nu_star = 0.1 * p_star.tanh();
        let shift = 1.0 - (-nu_star / 0.2).atanh();
        let ph = move |_t: f64, _x: f64| p_star;
        let zero = |_t: f64| 0.0;
        let prob = problem(&ph, &zero, 0.1, shift);
        let b = build_basis(6, 12).unwrap();
        let traj = integrate_galerkin(&b, |x| [x, 1.0, 0.0], |_| [0.0; 3], &prob, 0.5).unwrap();
        let first = &traj.coefficients[0];
        for c in &traj.coefficients {
            assert!((c - first).abs().max() < 1e-12);
        }
    }

    #[test]
    fn energy_inequality_holds_along_trajectory() {
        let ph = |_t: f64, x: f64| 0.5 * (PI * x).cos();
        let zero = |_t: f64| 0.0;
        let prob = problem(&ph, &zero, 0.1, 1.0);
        let b = build_basis(8, 16).unwrap();
        let traj = integrate_galerkin(
            &b,
            |x| {
                let (s, c) = (PI * x).sin_cos();
                [x + 0.1 * s, 1.0 + 0.1 * PI * c, -0.1 * PI * PI * s]
            },
            |x| [0.3 * x, 0.3, 0.0],
            &prob,
            0.5,
        )
        .unwrap();
        assert!(traj.energy_margin() >= 0.0, "margin {}", traj.energy_margin());
        assert!(traj.residuals.iter().all(|r| *r <= 1e-12));
    }
}
