//! Runtime checks of the analytic inequalities and balance laws.
//!
//! Every check returns an [`InvariantCheck`] whose `margin` is nonnegative
//! exactly when the check passes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constitutive::BoundarySource;
use crate::coupled::RunReport;
use crate::deformation::DeformationSnapshot;
use crate::grid::GridFunction;

/// Admissible drift ratio under `dt` halving for a first-order scheme.
pub const MASS_RATIO_BAND: (f64, f64) = (1.6, 2.6);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

impl InvariantCheck {
    /// Check `measured >= bound`.
    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        let margin = measured - bound;
        Self {
            name: name.to_string(),
            passed: margin >= 0.0,
            measured,
            bound,
            margin,
        }
    }

    /// Check `measured <= bound`.
    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        let margin = bound - measured;
        Self {
            name: name.to_string(),
            passed: margin >= 0.0,
            measured,
            bound,
            margin,
        }
    }
}

/// Ingredients of the strain lower bound for one deformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainBound {
    /// `int 1/u_x^2`.
    pub r1: f64,
    /// Discrete H2 norm of `u`.
    pub r2: f64,
    /// `(r2 / sqrt 2) exp(-r1 r2^2)`.
    pub bound: f64,
    /// Minimum cell gradient.
    pub measured: f64,
    /// Quadrature allowance `10 h^2 r2`.
    pub slack: f64,
}

impl StrainBound {
    pub fn margin(&self) -> f64 {
        self.measured - (self.bound - self.slack)
    }
}

/// `bound = (r2 / sqrt 2) exp(-r1 r2^2)`.
pub fn strain_bound_formula(r1: f64, r2: f64) -> f64 {
    r2 / std::f64::consts::SQRT_2 * (-r1 * r2 * r2).exp()
}

/// Evaluates the strain bound for a monotone nodal deformation.
pub fn strain_bound(u: &GridFunction) -> StrainBound {
    let h = u.spacing();
    let grads = u.cell_gradients();
    let r1: f64 = grads.iter().map(|g| h / (g * g)).sum();
    let r2 = u.h2_norm();
    StrainBound {
        r1,
        r2,
        bound: strain_bound_formula(r1, r2),
        measured: grads.iter().copied().fold(f64::INFINITY, f64::min),
        slack: 10.0 * h * h * r2,
    }
}

pub fn check_strain_bound(snap: &DeformationSnapshot) -> InvariantCheck {
    let b = strain_bound(snap.u());
    InvariantCheck::at_least("strain_bound", b.measured, b.bound - b.slack)
}

/// Both sides of the interpolation inequality
/// `|z|_inf <= 2 |z_x|^{1/2} |z|^{1/2}` (for `z(0) = 0`), with `+ 2|z|` added
/// on the right otherwise.
pub fn check_gn_inequality(z: &GridFunction, vanishes_at_zero: bool) -> InvariantCheck {
    let h = z.spacing();
    let lhs = z.max_abs();
    let l2 = z.l2_norm();
    let grad = z.gradient_l2_norm();
    let mut rhs = 2.0 * grad.sqrt() * l2.sqrt();
    if !vanishes_at_zero {
        rhs += 2.0 * l2;
    }
    let slack = 10.0 * h * h * (lhs + grad + z.second_derivative_l2_norm());
    let name = if vanishes_at_zero { "gn_inequality" } else { "gn_inequality_general" };
    InvariantCheck::at_most(name, lhs, rhs + slack)
}

/// With `h0 = 0` the total mass must stay within `tol (1 + |m0|)` of its
/// initial value; otherwise `m(t) - m(0)` must track `-int_0^t h0`.
pub fn check_mass_series(report: &RunReport, h0: &BoundarySource, tol: f64) -> InvariantCheck {
    let Some(first) = report.rows.first() else {
        return InvariantCheck::at_most("mass_series", 0.0, 0.0);
    };
    let m0 = first.mass;
    let t0 = first.t;
    let err = report
        .rows
        .iter()
        .map(|r| (r.mass - m0 + h0.integral(t0, r.t)).abs())
        .fold(0.0, f64::max);
    InvariantCheck::at_most("mass_series", err, tol * (1.0 + m0.abs()))
}

/// Ratio of mass-balance errors between a run and its companion at twice the
/// time step; first order puts it in [`MASS_RATIO_BAND`]. Runs whose errors
/// are both at round-off level pass trivially.
pub fn check_mass_order(fine: &RunReport, coarse: &RunReport) -> InvariantCheck {
    let err = |r: &RunReport| {
        let m0 = r.rows.first().map_or(0.0, |x| x.mass);
        let t0 = r.rows.first().map_or(0.0, |x| x.t);
        r.rows
            .iter()
            .map(|x| (x.mass - m0 + r.h0.integral(t0, x.t)).abs())
            .fold(0.0, f64::max)
    };
    let (ef, ec) = (err(fine), err(coarse));
    if ef < 1e-12 && ec < 1e-12 {
        return InvariantCheck {
            name: "mass_order".into(),
            passed: true,
            measured: 0.0,
            bound: 0.0,
            margin: 0.0,
        };
    }
    let ratio = ec / ef;
    let (lo, hi) = MASS_RATIO_BAND;
    let margin = (ratio - lo).min(hi - ratio);
    InvariantCheck {
        name: "mass_order".into(),
        passed: margin >= 0.0,
        measured: ratio,
        bound: lo,
        margin,
    }
}

/// Cumulative energy inequality
/// `E_k + sum D <= E_0 + sum W + sum slack + 1e-8 (1 + |E_0|)`.
pub fn check_energy_series(report: &RunReport) -> InvariantCheck {
    let e0 = report.energy_steps.first().map_or(0.0, |s| s.energy_before);
    let allowance = 1e-8 * (1.0 + e0.abs());
    let mut lhs_extra = 0.0;
    let mut rhs_extra = 0.0;
    let mut worst = f64::INFINITY;
    let mut worst_lhs = e0;
    let mut worst_rhs = e0;
    for s in &report.energy_steps {
        lhs_extra += s.dissipation;
        rhs_extra += s.work + s.slack;
        let lhs = s.energy_after + lhs_extra;
        let rhs = e0 + rhs_extra + allowance;
        if rhs - lhs < worst {
            worst = rhs - lhs;
            worst_lhs = lhs;
            worst_rhs = rhs;
        }
    }
    if report.energy_steps.is_empty() {
        return InvariantCheck::at_most("energy_inequality", e0, e0);
    }
    InvariantCheck::at_most("energy_inequality", worst_lhs, worst_rhs)
}

/// `E` never increases by more than round-off between rows.
pub fn check_energy_monotone(report: &RunReport) -> InvariantCheck {
    let e0 = report.rows.first().map_or(0.0, |r| r.energy);
    let rise = report
        .rows
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    InvariantCheck::at_most("energy_monotone", rise, 1e-10 * (1.0 + e0.abs()))
}

/// Every recorded state satisfies the strain lower bound and stays above
/// `floor`.
pub fn check_strain_series(report: &RunReport, floor: f64) -> Vec<InvariantCheck> {
    let worst = report
        .strain
        .iter()
        .min_by(|a, b| a.margin().total_cmp(&b.margin()))
        .copied();
    let min_strain = report.strain.iter().map(|b| b.measured).fold(f64::INFINITY, f64::min);
    let mut out = vec![InvariantCheck::at_least("strain_floor", min_strain, floor)];
    if let Some(b) = worst {
        out.push(InvariantCheck::at_least("strain_bound", b.measured, b.bound - b.slack));
    }
    out
}

/// Outcome of a randomized check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub samples: usize,
    pub failures: usize,
    pub worst_margin: f64,
}

/// Random smooth monotone deformation `c x + sum a_k sin(k pi x) / (k pi)`
/// with `c` chosen so the minimum slope is a random `eps` in `[1e-3, 3]`.
pub fn random_monotone(rng: &mut ChaCha8Rng, n: usize) -> GridFunction {
    let modes = rng.random_range(1..=5);
    let amps: Vec<f64> = (0..modes).map(|_| rng.random_range(-1.0..1.0)).collect();
    let eps = 10f64.powf(rng.random_range(-3.0..0.5));
    let raw = |x: f64| -> f64 {
        amps.iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * x).cos())
            .sum()
    };
    let min_raw = (0..=64 * n).map(|i| raw(i as f64 / (64 * n) as f64)).fold(f64::INFINITY, f64::min);
    let c = eps - min_raw;
    let f = |x: f64| -> f64 {
        c * x
            + amps
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let w = (k + 1) as f64 * std::f64::consts::PI;
                    a * (w * x).sin() / w
                })
                .sum::<f64>()
    };
    GridFunction::from_vec_unchecked((0..=n).map(|j| f(j as f64 / n as f64)).collect())
}

/// Random smooth function; `z(0) = 0` when `vanishing`.
pub fn random_smooth(rng: &mut ChaCha8Rng, n: usize, vanishing: bool) -> GridFunction {
    let modes = rng.random_range(1..=6);
    let amps: Vec<f64> = (0..modes).map(|_| rng.random_range(-2.0..2.0)).collect();
    let phases: Vec<f64> = (0..modes).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    let offset = if vanishing { 0.0 } else { rng.random_range(-1.0..1.0) };
    let g = |x: f64| -> f64 {
        amps.iter()
            .zip(&phases)
            .enumerate()
            .map(|(k, (a, ph))| a * ((k + 1) as f64 * std::f64::consts::PI * x + ph).sin())
            .sum()
    };
    let g0 = g(0.0);
    GridFunction::from_vec_unchecked(
        (0..=n)
            .map(|j| {
                let x = j as f64 / n as f64;
                if vanishing {
                    g(x) - g0
                } else {
                    g(x) + offset
                }
            })
            .collect(),
    )
}

fn summarize(checks: impl Iterator<Item = InvariantCheck>) -> FuzzSummary {
    let mut s = FuzzSummary {
        samples: 0,
        failures: 0,
        worst_margin: f64::INFINITY,
    };
    for c in checks {
        s.samples += 1;
        if !c.passed {
            s.failures += 1;
        }
        s.worst_margin = s.worst_margin.min(c.margin);
    }
    s
}

/// Strain lower bound on `samples` random monotone states.
pub fn fuzz_strain_bound(samples: usize, seed: u64) -> FuzzSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    summarize((0..samples).map(|_| {
        let n = rng.random_range(32..=256);
        let u = random_monotone(&mut rng, n);
        let b = strain_bound(&u);
        InvariantCheck::at_least("strain_bound", b.measured, b.bound - b.slack)
    }))
}

/// Interpolation inequality on `samples` random smooth functions.
pub fn fuzz_gn(samples: usize, seed: u64, vanishing: bool) -> FuzzSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    summarize((0..samples).map(|_| {
        let n = rng.random_range(32..=256);
        let z = random_smooth(&mut rng, n, vanishing);
        check_gn_inequality(&z, vanishing)
    }))
}
