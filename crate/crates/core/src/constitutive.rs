//! Physical constants and constitutive laws.
//!
//! The elastic response is the singular law
//!
//! ```text
//! f(g) = (k/2) (g - 1/2 - 1/(2 g^3)),   g = u_x > 0
//! ```
//!
//! which blows up as the deformation gradient tends to zero. The remaining
//! laws come in closed-form families so that every constant the analysis
//! needs (lower slope bound of the density law, Lipschitz constants, sup
//! norms) is known exactly:
//!
//! * density `rho(p) = a p + b tanh(p / ell) + w0`, with inverse `beta`;
//! * bounded laws `c tanh((r - r0) / ell)` for the pressure stress `nu`, the
//!   swelling force `phi` and the pore storage rate `psi`, with primitive
//!   `c ell log cosh((r - r0) / ell)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `max_x 2 sech^2(x) |tanh(x)|`, the peak of `|d^2/dx^2 tanh|`.
const TANH_SECOND_PEAK: f64 = 0.769_800_358_919_501_1; // 4 / (3 sqrt 3)

/// Positive material constants of the beam and the pore flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Mass density of the foam.
    pub m: f64,
    /// Fourth-order (bending) stiffness.
    pub gamma: f64,
    /// Elastic constant of the response function.
    pub k: f64,
    /// Viscous constant.
    pub k_v: f64,
    /// Permeability.
    pub kappa: f64,
}

impl PhysicalConstants {
    pub fn new(m: f64, gamma: f64, k: f64, k_v: f64, kappa: f64) -> Result<Self> {
        let c = Self {
            m,
            gamma,
            k,
            k_v,
            kappa,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("m", self.m),
            ("gamma", self.gamma),
            ("k", self.k),
            ("k_v", self.k_v),
            ("kappa", self.kappa),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// Elastic response `f(g) = (k/2)(g - 1/2 - 1/(2 g^3))`.
pub fn elastic_response(g: f64, k: f64) -> Result<f64> {
    check_gradient(g)?;
    Ok(0.5 * k * (g - 0.5 - 0.5 / (g * g * g)))
}

/// `f'(g) = (k/2)(1 + 3/(2 g^4))`, bounded below by `k/2`.
pub fn elastic_response_derivative(g: f64, k: f64) -> Result<f64> {
    check_gradient(g)?;
    let g2 = g * g;
    Ok(0.5 * k * (1.0 + 1.5 / (g2 * g2)))
}

/// `f''(g) = -3k / g^5`.
pub fn elastic_response_second_derivative(g: f64, k: f64) -> Result<f64> {
    check_gradient(g)?;
    Ok(-3.0 * k / g.powi(5))
}

/// Primitive of the elastic response, normalised so that
/// `F(g) = (k/4) g^2 - (k/4) g + k / (8 g^2)`.
///
/// Summed over the bar this gives the stored elastic energy
/// `(k/4)(|u_x|^2 - |u_x|_{L1}) + (k/8) int 1/u_x^2`.
pub fn elastic_potential(g: f64, k: f64) -> Result<f64> {
    check_gradient(g)?;
    Ok(0.25 * k * g * g - 0.25 * k * g + 0.125 * k / (g * g))
}

fn check_gradient(g: f64) -> Result<()> {
    if g > 0.0 && g.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "deformation gradient must be > 0, got {g}"
        )))
    }
}

/// Density law `rho(p) = a p + b tanh(p / ell) + w0` and its inverse.
///
/// With `a > 0` and `b >= 0` the slope satisfies `a <= rho' <= a + b/ell`,
/// so `mu = a` is the infimum of `rho'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityLaw {
    pub a: f64,
    pub b: f64,
    pub ell: f64,
    pub w0: f64,
}

/// Which member of the density family a law is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityFamily {
    Linear,
    TanhAugmented,
}

impl DensityLaw {
    pub fn new(a: f64, b: f64, ell: f64, w0: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid("a", format!("slope must be > 0, got {a}")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(invalid("b", format!("saturation amplitude must be >= 0, got {b}")));
        }
        if !(ell.is_finite() && ell > 0.0) {
            return Err(invalid("ell", format!("scale must be > 0, got {ell}")));
        }
        if !w0.is_finite() {
            return Err(invalid("w0", "offset must be finite"));
        }
        Ok(Self { a, b, ell, w0 })
    }

    /// `rho(p) = a p + w0`.
    pub fn linear(a: f64, w0: f64) -> Result<Self> {
        Self::new(a, 0.0, 1.0, w0)
    }

    pub fn family(&self) -> DensityFamily {
        if self.b == 0.0 {
            DensityFamily::Linear
        } else {
            DensityFamily::TanhAugmented
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.a * p + self.b * (p / self.ell).tanh() + self.w0
    }

    pub fn derivative(&self, p: f64) -> f64 {
        let th = (p / self.ell).tanh();
        self.a + self.b / self.ell * (1.0 - th * th)
    }

    pub fn second_derivative(&self, p: f64) -> f64 {
        let th = (p / self.ell).tanh();
        -2.0 * self.b / (self.ell * self.ell) * (1.0 - th * th) * th
    }

    /// The inverse `beta = rho^{-1}`, by safeguarded Newton on the bracket
    /// `[(w - w0 - b)/a, (w - w0 + b)/a]`.
    pub fn inverse(&self, w: f64) -> f64 {
        let shifted = w - self.w0;
        if self.b == 0.0 {
            return shifted / self.a;
        }
        let mut lo = (shifted - self.b) / self.a;
        let mut hi = (shifted + self.b) / self.a;
        let mut p = shifted / self.a;
        for _ in 0..100 {
            let r = self.eval(p) - w;
            if r == 0.0 {
                return p;
            }
            if r > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            let mut next = p - r / self.derivative(p);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - p).abs() <= 1e-16 * (1.0 + p.abs()) {
                return next;
            }
            p = next;
        }
        p
    }

    /// `beta'(w) = 1 / rho'(beta(w))`.
    pub fn inverse_derivative(&self, w: f64) -> f64 {
        1.0 / self.derivative(self.inverse(w))
    }

    /// Lower bound `mu` of `rho'`.
    pub fn mu(&self) -> f64 {
        self.a
    }

    /// `sup |rho'| = a + b / ell`.
    pub fn sup_derivative(&self) -> f64 {
        self.a + self.b / self.ell
    }

    /// `sup |rho''|`.
    pub fn sup_second_derivative(&self) -> f64 {
        self.b / (self.ell * self.ell) * TANH_SECOND_PEAK
    }

    /// `sup |beta'| = 1 / mu`.
    pub fn sup_inverse_derivative(&self) -> f64 {
        1.0 / self.mu()
    }

    /// Certified upper bound of `|beta''| = |rho''| / rho'^3`.
    pub fn sup_inverse_second_derivative(&self) -> f64 {
        self.sup_second_derivative() / self.mu().powi(3)
    }

    /// `C_rho = |rho'|_inf + |beta'|_{W^{1,inf}}`.
    pub fn c_rho(&self) -> f64 {
        self.sup_derivative() + self.sup_inverse_derivative() + self.sup_inverse_second_derivative()
    }
}

/// Bounded Lipschitz law `c tanh((r - r0) / ell)`.
///
/// The amplitude may be negative (e.g. a pressure that compresses the solid
/// skeleton); all bounds use `|c|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedLipschitzLaw {
    pub amplitude: f64,
    pub scale: f64,
    pub shift: f64,
}

impl BoundedLipschitzLaw {
    pub fn new(amplitude: f64, scale: f64, shift: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(invalid("amplitude", "must be finite"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid("scale", format!("must be > 0, got {scale}")));
        }
        if !shift.is_finite() {
            return Err(invalid("shift", "must be finite"));
        }
        Ok(Self {
            amplitude,
            scale,
            shift,
        })
    }

    /// The identically zero law.
    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            scale: 1.0,
            shift: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    fn arg(&self, r: f64) -> f64 {
        (r - self.shift) / self.scale
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.amplitude * self.arg(r).tanh()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let th = self.arg(r).tanh();
        self.amplitude / self.scale * (1.0 - th * th)
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let th = self.arg(r).tanh();
        -2.0 * self.amplitude / (self.scale * self.scale) * (1.0 - th * th) * th
    }

    /// Primitive `c ell log cosh((r - r0)/ell)`, zero at `r0`.
    pub fn primitive(&self, r: f64) -> f64 {
        self.amplitude * self.scale * log_cosh(self.arg(r))
    }

    /// `sup |law| = |c|`.
    pub fn sup(&self) -> f64 {
        self.amplitude.abs()
    }

    /// Lipschitz constant `|c| / ell`.
    pub fn lipschitz(&self) -> f64 {
        self.amplitude.abs() / self.scale
    }

    /// `|law|_{W^{1,inf}} = |c| + |c| / ell`.
    pub fn w1_inf_norm(&self) -> f64 {
        self.sup() + self.lipschitz()
    }

    /// `sup |law''|`.
    pub fn sup_second_derivative(&self) -> f64 {
        self.amplitude.abs() / (self.scale * self.scale) * TANH_SECOND_PEAK
    }
}

/// `log cosh x`, overflow free.
fn log_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
}

/// Prescribed flux `h0(t)` at the fixed end of the liquid domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySource {
    Constant(f64),
    /// Piecewise-linear table `(t_i, h_i)`; clamped outside the knots.
    Table(Vec<(f64, f64)>),
}

impl Default for BoundarySource {
    fn default() -> Self {
        BoundarySource::Constant(0.0)
    }
}

impl BoundarySource {
    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("h0", "table needs at least one knot"));
        }
        if knots.iter().any(|(t, h)| !t.is_finite() || !h.is_finite()) {
            return Err(invalid("h0", "table entries must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("h0", "knot times must be strictly increasing"));
        }
        Ok(BoundarySource::Table(knots))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            BoundarySource::Constant(c) => *c,
            BoundarySource::Table(knots) => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let idx = knots.partition_point(|k| k.0 <= t);
                let (t0, h0) = knots[idx - 1];
                let (t1, h1) = knots[idx];
                h0 + (h1 - h0) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            BoundarySource::Constant(c) => *c == 0.0,
            BoundarySource::Table(knots) => knots.iter().all(|k| k.1 == 0.0),
        }
    }

    /// Exact integral of the (clamped, piecewise-linear) source over `[t0, t1]`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t1 < t0 {
            return -self.integral(t1, t0);
        }
        match self {
            BoundarySource::Constant(c) => c * (t1 - t0),
            BoundarySource::Table(knots) => {
                let mut breaks = vec![t0];
                breaks.extend(knots.iter().map(|k| k.0).filter(|&t| t > t0 && t < t1));
                breaks.push(t1);
                breaks
                    .windows(2)
                    .map(|w| 0.5 * (self.eval(w[0]) + self.eval(w[1])) * (w[1] - w[0]))
                    .sum()
            }
        }
    }

    /// Total variation `int |h0'| dt`, the W^{1,1} seminorm.
    pub fn w11_seminorm(&self) -> f64 {
        match self {
            BoundarySource::Constant(_) => 0.0,
            BoundarySource::Table(knots) => knots.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum(),
        }
    }
}

/// All constants and constitutive laws of one foam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSystem {
    pub constants: PhysicalConstants,
    pub rho: DensityLaw,
    pub nu: BoundedLipschitzLaw,
    pub phi: BoundedLipschitzLaw,
    pub psi: BoundedLipschitzLaw,
}

/// Constants certified by [`validate_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub mu: f64,
    pub sup_rho_prime: f64,
    pub c_rho: f64,
    pub c_phi: f64,
    pub c_psi: f64,
    pub c_nu: f64,
    pub samples: usize,
}

/// Sampling window for [`validate_assumptions`].
#[derive(Debug, Clone, Copy)]
pub struct SamplingRange {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl Default for SamplingRange {
    fn default() -> Self {
        Self {
            lo: -50.0,
            hi: 50.0,
            samples: 10_001,
        }
    }
}

/// Returns the closed-form constants of the laws and confirms by dense
/// sampling that every claimed bound holds pointwise.
pub fn validate_assumptions(system: &MaterialSystem, range: SamplingRange) -> Result<AssumptionReport> {
    system.constants.validate()?;
    let rho = &system.rho;
    if !(rho.mu() > 0.0) {
        return Err(Error::Assumption(format!(
            "density law: slope lower bound mu = {} is not positive",
            rho.mu()
        )));
    }
    let n = range.samples.max(2);
    let mut violations = Vec::new();
    let slack = 1e-12;
    for i in 0..n {
        let r = range.lo + (range.hi - range.lo) * i as f64 / (n - 1) as f64;
        let d = rho.derivative(r);
        if d < rho.mu() - slack || d > rho.sup_derivative() + slack {
            violations.push(format!("density law: rho'({r}) = {d} outside [mu, sup rho']"));
        }
        let back = rho.inverse(rho.eval(r));
        if (back - r).abs() > 1e-10 * (1.0 + r.abs()) {
            violations.push(format!("density law: beta(rho({r})) = {back}"));
        }
        let w = rho.eval(r);
        let bd = rho.inverse_derivative(w);
        if bd.abs() > rho.sup_inverse_derivative() + slack {
            violations.push(format!("density law: |beta'({w})| = {bd} exceeds 1/mu"));
        }
        let bdd = rho.second_derivative(r).abs() / d.powi(3);
        if bdd > rho.sup_inverse_second_derivative() + slack {
            violations.push(format!("density law: |beta''| = {bdd} exceeds certified bound"));
        }
        for (name, law) in [("nu", &system.nu), ("phi", &system.phi), ("psi", &system.psi)] {
            if law.eval(r).abs() > law.sup() + slack {
                violations.push(format!("{name}: |{name}({r})| exceeds |c|"));
            }
            if law.derivative(r).abs() > law.lipschitz() + slack {
                violations.push(format!("{name}: |{name}'({r})| exceeds |c|/ell"));
            }
        }
        if violations.len() > 8 {
            break;
        }
    }
    if !violations.is_empty() {
        return Err(Error::Assumption(violations.join("; ")));
    }
    Ok(AssumptionReport {
        mu: rho.mu(),
        sup_rho_prime: rho.sup_derivative(),
        c_rho: rho.c_rho(),
        c_phi: system.phi.w1_inf_norm(),
        c_psi: system.psi.w1_inf_norm(),
        c_nu: system.nu.w1_inf_norm(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn elastic_response_closed_forms() {
        assert_eq!(elastic_response(1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(elastic_response(0.5, 1.0).unwrap(), -2.0, epsilon = 1e-15);
        assert_relative_eq!(elastic_response(2.0, 1.0).unwrap(), 0.71875, epsilon = 1e-15);
    }

    #[test]
    fn elastic_response_rejects_nonpositive_gradient() {
        assert!(matches!(elastic_response(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(elastic_response(-0.3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(elastic_response_derivative(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn elastic_response_blows_up_near_zero() {
        assert!(elastic_response(1e-3, 1.0).unwrap() < -1e8);
    }

    #[test]
    fn derivative_closed_form_and_asymptote() {
        assert_relative_eq!(elastic_response_derivative(1.0, 1.0).unwrap(), 1.25, epsilon = 1e-15);
        assert_relative_eq!(elastic_response_derivative(1e6, 1.0).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let (g, k, h) = (0.7, 2.0, 1e-6);
        let fd = (elastic_response(g + h, k).unwrap() - elastic_response(g - h, k).unwrap()) / (2.0 * h);
        let exact = elastic_response_derivative(g, k).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-6, "fd {fd} exact {exact}");
    }

    #[test]
    fn potential_is_primitive_of_response() {
        for &g in &[0.3, 0.8, 1.0, 1.7, 3.0] {
            let h = 1e-5;
            let fd = (elastic_potential(g + h, 1.3).unwrap() - elastic_potential(g - h, 1.3).unwrap()) / (2.0 * h);
            assert_relative_eq!(fd, elastic_response(g, 1.3).unwrap(), epsilon = 1e-8, max_relative = 1e-8);
        }
        assert_relative_eq!(elastic_potential(1.0, 1.0).unwrap(), 0.125);
    }

    #[test]
    fn linear_density_constants() {
        let rho = DensityLaw::linear(1.0, 0.0).unwrap();
        assert_eq!(rho.family(), DensityFamily::Linear);
        assert_eq!(rho.mu(), 1.0);
        assert_eq!(rho.sup_derivative(), 1.0);
        assert_eq!(rho.inverse(3.5), 3.5);
    }

    #[test]
    fn tanh_density_sup_slope_by_dense_sampling() {
        let rho = DensityLaw::new(1.0, 0.5, 1.0, 0.0).unwrap();
        let n = 200_001;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let p = -50.0 + 100.0 * i as f64 / (n - 1) as f64;
            let d = rho.derivative(p);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        assert!(lo >= 1.0 - 1e-12);
        assert!((lo - 1.0).abs() < 1e-12);
        assert!((hi - 1.5).abs() < 1e-9);
        assert_eq!(rho.mu(), 1.0);
        assert_eq!(rho.sup_derivative(), 1.5);
    }

    #[test]
    fn density_rejects_bad_parameters() {
        assert!(DensityLaw::new(0.0, 0.1, 1.0, 0.0).is_err());
        assert!(DensityLaw::new(1.0, -0.1, 1.0, 0.0).is_err());
        assert!(DensityLaw::new(1.0, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_law_has_zero_constants() {
        let nu = BoundedLipschitzLaw::new(0.0, 0.7, 0.2).unwrap();
        assert_eq!(nu.w1_inf_norm(), 0.0);
        assert_eq!(nu.eval(3.0), 0.0);
    }

    #[test]
    fn primitive_handles_large_arguments() {
        let law = BoundedLipschitzLaw::new(2.0, 0.5, 0.0).unwrap();
        // log cosh(x) ~ |x| - ln 2
        let r = 500.0;
        assert_relative_eq!(law.primitive(r), 2.0 * 0.5 * (1000.0 - std::f64::consts::LN_2), max_relative = 1e-14);
    }

    #[test]
    fn boundary_source_table_clamps_and_integrates() {
        let h0 = BoundarySource::table(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)]).unwrap();
        assert_eq!(h0.eval(-1.0), 0.0);
        assert_eq!(h0.eval(0.5), 1.0);
        assert_eq!(h0.eval(5.0), 2.0);
        assert_relative_eq!(h0.integral(0.0, 2.0), 3.0, epsilon = 1e-15);
        assert_relative_eq!(h0.integral(0.5, 3.0), 4.75, epsilon = 1e-12);
        assert_eq!(h0.w11_seminorm(), 2.0);
        assert!(BoundarySource::table(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn validate_reports_closed_form_constants() {
        let system = MaterialSystem {
            constants: PhysicalConstants::new(1.0, 0.01, 1.0, 0.5, 1.0).unwrap(),
            rho: DensityLaw::new(1.0, 0.5, 1.0, 0.0).unwrap(),
            nu: BoundedLipschitzLaw::zero(),
            phi: BoundedLipschitzLaw::new(0.2, 0.5, 1.0).unwrap(),
            psi: BoundedLipschitzLaw::new(-0.3, 2.0, 1.0).unwrap(),
        };
        let report = validate_assumptions(&system, SamplingRange::default()).unwrap();
        assert_eq!(report.mu, 1.0);
        assert_eq!(report.sup_rho_prime, 1.5);
        assert_eq!(report.c_nu, 0.0);
        assert_relative_eq!(report.c_phi, 0.2 + 0.4);
        assert_relative_eq!(report.c_psi, 0.3 + 0.15);
    }

    #[test]
    fn constants_reject_nonpositive() {
        let err = PhysicalConstants::new(1.0, 0.01, -1.0, 0.5, 1.0).unwrap_err();
        assert!(err.to_string().contains("`k`"));
    }
}
