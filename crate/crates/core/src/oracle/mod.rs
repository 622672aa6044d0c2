//! Kinetic quadrature oracle.
//!
//! Moments, fluxes and the entropy of the maximum-entropy distribution are
//! integrated numerically over `(C, I)` and compared against the closed forms
//! of [`crate::closure`] and [`crate::gas`]. The oracle shares nothing with
//! the closed-form path except [`multipliers_from_state`].
//!
//! The distribution factorizes as `Omega exp(-xi C^2) exp(-zeta I)`, so every
//! integrand used here is a sum of terms that are products of one factor per
//! velocity axis and a power of `I`. For such terms the tensor-product
//! Gauss-Hermite rule collapses to a product of one-dimensional sums, and the
//! generalized Gauss-Laguerre rule absorbs the `I^alpha` measure exactly.
//! An independent adaptive Gauss-Kronrod evaluation of the same factors
//! cross-checks every quantity.

mod probe;
pub mod quadrature;

use std::fmt;

use crate::closure::{closed_fluxes, entropy_parts, multipliers_from_state, Multipliers};
use crate::error::{Et6Error, Result};
use crate::gas::{conserved_from_primitive, GasSpec, State6};

pub use probe::{mep_optimality_probe, ProbeEntry, ProbeReport};
use quadrature::{adaptive_gk, gauss_hermite, gauss_laguerre, pairwise_sum};

/// Relative tolerance for constraint moments.
pub const MOMENT_TOL: f64 = 1e-10;
/// Relative tolerance for closed fluxes.
pub const FLUX_TOL: f64 = 1e-8;
/// Relative tolerance for the entropy density.
pub const ENTROPY_TOL: f64 = 1e-8;
/// Laguerre order ceiling for the escalation policy.
pub const MAX_INTERNAL_ORDER: usize = 1024;

/// Half-width of the truncated velocity domain in units of `1/sqrt(xi)`.
const VELOCITY_CUTOFF: f64 = 13.0;
/// Upper end of the truncated internal-energy domain in units of `1/zeta`.
const INTERNAL_CUTOFF: f64 = 250.0;

/// Quadrature configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss-Hermite nodes per velocity axis.
    pub velocity_order: usize,
    /// Generalized Gauss-Laguerre nodes for the internal energy.
    pub internal_order: usize,
    /// Tolerance of the adaptive cross-check (relative to the quantity, with
    /// an absolute floor on the normalized one-dimensional factors).
    pub adaptive_tol: f64,
    /// Run the adaptive cross-check on every evaluation.
    pub cross_check: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            velocity_order: 64,
            internal_order: 128,
            adaptive_tol: 1e-10,
            cross_check: true,
        }
    }
}

impl QuadratureSpec {
    pub fn new(velocity_order: usize, internal_order: usize, adaptive_tol: f64) -> Result<Self> {
        let spec = Self {
            velocity_order,
            internal_order,
            adaptive_tol,
            cross_check: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.velocity_order < 8 || self.internal_order < 8 {
            return Err(Et6Error::Oracle(format!(
                "quadrature orders must be >= 8 (got {} x {})",
                self.velocity_order, self.internal_order
            )));
        }
        if !(self.adaptive_tol > 0.0) {
            return Err(Et6Error::Oracle("adaptive tolerance must be positive".into()));
        }
        Ok(())
    }

    fn label(&self) -> String {
        format!("GH{}^3xGL{}", self.velocity_order, self.internal_order)
    }
}

/// One factor `(C_axis + shift)^power` of a separable term.
///
/// A zero shift integrates in the peculiar frame; `shift = v_axis` gives the
/// lab-frame molecular velocity `c_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFactor {
    pub power: u32,
    pub shift: f64,
}

impl AxisFactor {
    pub const ONE: Self = Self { power: 0, shift: 0.0 };

    pub fn peculiar(power: u32) -> Self {
        Self { power, shift: 0.0 }
    }

    pub fn lab(power: u32, v: f64) -> Self {
        Self { power, shift: v }
    }

    fn eval(&self, c: f64) -> f64 {
        (c + self.shift).powi(self.power as i32)
    }
}

/// `coeff * prod_axis factor(C_axis) * I^internal_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub axes: [AxisFactor; 3],
    pub internal_power: u32,
}

/// Polynomial weight over `(C, I)` written as a sum of separable terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Integrand {
    pub terms: Vec<Term>,
}

impl Integrand {
    pub fn term(mut self, coeff: f64, axes: [AxisFactor; 3], internal_power: u32) -> Self {
        self.terms.push(Term {
            coeff,
            axes,
            internal_power,
        });
        self
    }

    /// Lab-frame `c_i c_k`.
    fn lab_pair(v: [f64; 3], i: usize, k: usize) -> Self {
        let mut powers = [0u32; 3];
        powers[i] += 1;
        powers[k] += 1;
        Self::default().term(1.0, [0, 1, 2].map(|a| AxisFactor::lab(powers[a], v[a])), 0)
    }

    /// Lab-frame `c^2 c_k`.
    fn lab_energy_flux(v: [f64; 3], k: usize) -> Self {
        let mut out = Self::default();
        for j in 0..3 {
            let mut powers = [0u32; 3];
            powers[j] += 2;
            powers[k] += 1;
            out = out.term(1.0, [0, 1, 2].map(|a| AxisFactor::lab(powers[a], v[a])), 0);
        }
        out
    }
}

/// Monomial `C_x^a C_y^b C_z^c (C^2)^k I^j` in the peculiar frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Monomial {
    pub c: [u32; 3],
    pub c2: u32,
    pub i: u32,
}

impl Monomial {
    pub const ONE: Self = Self { c: [0; 3], c2: 0, i: 0 };

    /// Degree counting `C^2` and `I` as second order.
    pub fn degree(&self) -> u32 {
        self.c.iter().sum::<u32>() + 2 * self.c2 + 2 * self.i
    }

    /// Expands `(C_x^2 + C_y^2 + C_z^2)^k` multinomially.
    pub fn to_integrand(&self) -> Integrand {
        let k = self.c2;
        let mut out = Integrand::default();
        for a in 0..=k {
            for b in 0..=(k - a) {
                let c = k - a - b;
                let coeff = factorial(k) / (factorial(a) * factorial(b) * factorial(c));
                let powers = [self.c[0] + 2 * a, self.c[1] + 2 * b, self.c[2] + 2 * c];
                out = out.term(coeff, powers.map(AxisFactor::peculiar), self.i);
            }
        }
        out
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Comparison of one closed-form quantity with its quadrature value.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub closed_form: f64,
    pub quadrature: f64,
    pub rel_err: f64,
    pub rule: String,
    pub tolerance: f64,
}

impl OracleReport {
    /// `floor` is the natural magnitude of the quantity, used when both
    /// values vanish.
    pub fn new(quantity: impl Into<String>, closed_form: f64, quadrature: f64, floor: f64, rule: &str, tolerance: f64) -> Self {
        Self {
            quantity: quantity.into(),
            closed_form,
            quadrature,
            rel_err: relative_error(closed_form, quadrature, floor),
            rule: rule.to_string(),
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.rel_err <= self.tolerance
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<10} closed={:+.15e} quad={:+.15e} rel={:.2e} [{}] {}",
            self.quantity,
            self.closed_form,
            self.quadrature,
            self.rel_err,
            self.rule,
            if self.passed() { "ok" } else { "FAIL" }
        )
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(floor);
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

/// Prepared evaluation of integrals against the distribution of one state.
struct Evaluator {
    mul: Multipliers,
    alpha: f64,
    quad: QuadratureSpec,
}

impl Evaluator {
    fn new(s: &State6, gas: &GasSpec, quad: QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        Ok(Self {
            mul: multipliers_from_state(s, gas)?,
            alpha: gas.alpha(),
            quad,
        })
    }

    /// `ln(Omega xi^{-3/2} zeta^{-(1+alpha)})`: the normalization of the scaled rules.
    fn ln_prefactor(&self) -> f64 {
        self.mul.ln_omega - 1.5 * self.mul.xi.ln() - (1.0 + self.alpha) * self.mul.zeta.ln()
    }

    fn gauss_axis(&self, factor: AxisFactor) -> f64 {
        let rule = gauss_hermite(self.quad.velocity_order);
        let scale = self.mul.xi.sqrt().recip();
        rule.apply(|x| factor.eval(x * scale))
    }

    fn gauss_internal(&self, power: u32, order: usize) -> f64 {
        let rule = gauss_laguerre(order, self.alpha);
        let scale = self.mul.zeta.recip();
        rule.apply(|y| (y * scale).powi(power as i32))
    }

    fn adaptive_axis(&self, factor: AxisFactor, tol: f64) -> Result<f64> {
        let scale = self.mul.xi.sqrt().recip();
        adaptive_gk(|x| factor.eval(x * scale) * (-x * x).exp(), -VELOCITY_CUTOFF, VELOCITY_CUTOFF, tol)
    }

    /// `int_0^inf (y/zeta)^power y^alpha e^{-y} dy` without any Gamma function.
    fn adaptive_internal(&self, power: u32, tol: f64) -> Result<f64> {
        let scale = self.mul.zeta.recip();
        let alpha = self.alpha;
        let g = |y: f64| (y * scale).powi(power as i32) * (-y).exp();
        let tail = adaptive_gk(|y| g(y) * y.powf(alpha), 1.0, INTERNAL_CUTOFF, tol)?;
        // On [0, 1] substitute u = y^{1+alpha} to absorb the endpoint behaviour of y^alpha.
        let beta = 1.0 + alpha;
        let head = adaptive_gk(|u| if u > 0.0 { g(u.powf(1.0 / beta)) } else { g(0.0) }, 0.0, 1.0, tol * beta)? / beta;
        Ok(head + tail)
    }

    /// `int int integrand(C, I) f I^alpha dI dC` with the Gauss rules at a
    /// given Laguerre order.
    fn gauss(&self, integrand: &Integrand, internal_order: usize) -> f64 {
        let terms: Vec<f64> = integrand
            .terms
            .iter()
            .map(|t| {
                let vel: f64 = t.axes.iter().map(|&a| self.gauss_axis(a)).product();
                t.coeff * vel * self.gauss_internal(t.internal_power, internal_order)
            })
            .collect();
        pairwise_sum(&terms) * self.ln_prefactor().exp()
    }

    fn adaptive(&self, integrand: &Integrand) -> Result<f64> {
        let tol = 1e-3 * self.quad.adaptive_tol;
        let mut terms = Vec::with_capacity(integrand.terms.len());
        for t in &integrand.terms {
            let mut vel = 1.0;
            for &a in &t.axes {
                vel *= self.adaptive_axis(a, tol)?;
            }
            terms.push(t.coeff * vel * self.adaptive_internal(t.internal_power, tol)?);
        }
        Ok(pairwise_sum(&terms) * self.ln_prefactor().exp())
    }

    /// Natural magnitude of an integrand, used as the floor of the agreement test.
    fn magnitude(&self, integrand: &Integrand, internal_order: usize) -> f64 {
        let abs_terms: Vec<f64> = integrand
            .terms
            .iter()
            .map(|t| {
                let vel: f64 = t
                    .axes
                    .iter()
                    .map(|&a| {
                        let rule = gauss_hermite(self.quad.velocity_order);
                        let scale = self.mul.xi.sqrt().recip();
                        rule.apply(|x| a.eval(x * scale).abs())
                    })
                    .product();
                (t.coeff * vel * self.gauss_internal(t.internal_power, internal_order)).abs()
            })
            .collect();
        pairwise_sum(&abs_terms) * self.ln_prefactor().exp()
    }

    /// Gauss value, escalating the Laguerre order until it agrees with the
    /// adaptive evaluation.
    fn integrate(&self, integrand: &Integrand) -> Result<f64> {
        let value = self.gauss(integrand, self.quad.internal_order);
        if !self.quad.cross_check {
            return Ok(value);
        }
        let reference = self.adaptive(integrand)?;
        let mut order = self.quad.internal_order;
        let mut value = value;
        loop {
            let floor = self.magnitude(integrand, order);
            if relative_error(value, reference, floor) <= self.quad.adaptive_tol {
                return Ok(value);
            }
            if order >= MAX_INTERNAL_ORDER {
                return Err(Et6Error::Oracle(format!(
                    "Gauss ({value:.15e}) and adaptive ({reference:.15e}) rules disagree at Laguerre order {order}"
                )));
            }
            order = (order * 2).min(MAX_INTERNAL_ORDER);
            log::debug!("escalating Laguerre order to {order}");
            value = self.gauss(integrand, order);
        }
    }
}

/// `m int int f * weight * I^alpha dI dC` in the peculiar frame.
pub fn oracle_moment(s: &State6, weight: Monomial, gas: &GasSpec, quad: &QuadratureSpec) -> Result<f64> {
    if weight.degree() > 6 {
        return Err(Et6Error::Oracle(format!("monomial degree {} exceeds 6", weight.degree())));
    }
    let ev = Evaluator::new(s, gas, *quad)?;
    Ok(gas.mass() * ev.integrate(&weight.to_integrand())?)
}

/// Constraint densities `(F, F_i, F_ll, G_ll)` from lab-frame quadrature.
pub fn oracle_constraint_reports(s: &State6, gas: &GasSpec, quad: &QuadratureSpec) -> Result<Vec<OracleReport>> {
    let ev = Evaluator::new(s, gas, *quad)?;
    let m = gas.mass();
    let v = s.v;
    let u = conserved_from_primitive(s, gas);
    let rule = quad.label();
    let p = s.pressure(gas);
    let mom_scale = s.rho * ((p / s.rho).sqrt() + s.speed_squared().sqrt());

    let mass = m * ev.integrate(&Integrand::default().term(1.0, [AxisFactor::ONE; 3], 0))?;
    let mut out = vec![OracleReport::new("F", u.f, mass, s.rho, &rule, MOMENT_TOL)];
    for (k, name) in ["F_x", "F_y", "F_z"].into_iter().enumerate() {
        let mut axes = [AxisFactor::ONE; 3];
        axes[k] = AxisFactor::lab(1, v[k]);
        let val = m * ev.integrate(&Integrand::default().term(1.0, axes, 0))?;
        out.push(OracleReport::new(name, u.f_i[k], val, mom_scale, &rule, MOMENT_TOL));
    }
    let mut c2 = Integrand::default();
    for k in 0..3 {
        let mut axes = [AxisFactor::ONE; 3];
        axes[k] = AxisFactor::lab(2, v[k]);
        c2 = c2.term(1.0, axes, 0);
    }
    let f_ll = m * ev.integrate(&c2)?;
    out.push(OracleReport::new("F_ll", u.f_ll, f_ll, u.f_ll.abs(), &rule, MOMENT_TOL));
    let g_ll = c2.term(2.0 / m, [AxisFactor::ONE; 3], 1);
    let g_ll = m * ev.integrate(&g_ll)?;
    out.push(OracleReport::new("G_ll", u.g_ll, g_ll, u.g_ll.abs(), &rule, MOMENT_TOL));
    Ok(out)
}

/// Quadrature of every closed flux entry, without judging the result.
pub fn oracle_flux_reports(s: &State6, gas: &GasSpec, quad: &QuadratureSpec) -> Result<Vec<OracleReport>> {
    let ev = Evaluator::new(s, gas, *quad)?;
    let m = gas.mass();
    let v = s.v;
    let closed = closed_fluxes(s, gas);
    let rule = quad.label();
    let p = s.pressure(gas);
    let c_scale = (p / s.rho).sqrt() + s.speed_squared().sqrt();
    let pp = p + s.pi;
    let rv2 = s.rho * s.speed_squared();

    let mut out = Vec::with_capacity(12);
    let axis = ["x", "y", "z"];
    let momentum_floor = pp + rv2;
    for i in 0..3 {
        for k in i..3 {
            let val = m * ev.integrate(&Integrand::lab_pair(v, i, k))?;
            out.push(OracleReport::new(
                format!("F_{}{}", axis[i], axis[k]),
                closed.f_ik[i][k],
                val,
                momentum_floor,
                &rule,
                FLUX_TOL,
            ));
        }
    }
    let energy_floor = (5.0 * pp + rv2 + s.rho * s.internal_energy(gas)) * c_scale;
    for k in 0..3 {
        let flux = Integrand::lab_energy_flux(v, k);
        let f_llk = m * ev.integrate(&flux)?;
        out.push(OracleReport::new(format!("F_ll{}", axis[k]), closed.f_llk[k], f_llk, energy_floor, &rule, FLUX_TOL));
        let mut axes = [AxisFactor::ONE; 3];
        axes[k] = AxisFactor::lab(1, v[k]);
        let g_llk = flux.term(2.0 / m, axes, 1);
        let g_llk = m * ev.integrate(&g_llk)?;
        out.push(OracleReport::new(format!("G_ll{}", axis[k]), closed.g_llk[k], g_llk, energy_floor, &rule, FLUX_TOL));
    }
    Ok(out)
}

/// Flux reports, failing with the list of offending entries if any exceeds
/// the flux tolerance.
pub fn oracle_flux_check(s: &State6, gas: &GasSpec, quad: &QuadratureSpec) -> Result<Vec<OracleReport>> {
    let reports = oracle_flux_reports(s, gas, quad)?;
    ensure_passed(&reports)?;
    Ok(reports)
}

pub fn ensure_passed(reports: &[OracleReport]) -> Result<()> {
    let offending: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} (rel {:.2e})", r.quantity, r.rel_err))
        .collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Et6Error::Verification { offending })
    }
}

/// `-kB int int f ln f I^alpha dI dC`, using `ln f = ln Omega - zeta I - xi C^2`.
pub fn oracle_entropy(s: &State6, gas: &GasSpec, quad: &QuadratureSpec) -> Result<f64> {
    let ev = Evaluator::new(s, gas, *quad)?;
    let mul = ev.mul;
    let mut integrand = Integrand::default()
        .term(mul.ln_omega, [AxisFactor::ONE; 3], 0)
        .term(-mul.zeta, [AxisFactor::ONE; 3], 1);
    for k in 0..3 {
        let mut axes = [AxisFactor::ONE; 3];
        axes[k] = AxisFactor::peculiar(2);
        integrand = integrand.term(-mul.xi, axes, 0);
    }
    Ok(-gas.kb() * ev.integrate(&integrand)?)
}

/// Entropy report against the closed form.
pub fn oracle_entropy_report(s: &State6, gas: &GasSpec, quad: &QuadratureSpec) -> Result<OracleReport> {
    let closed = entropy_parts(s, gas)?.h;
    let quad_h = oracle_entropy(s, gas, quad)?;
    let floor = gas.gas_constant() * s.rho;
    Ok(OracleReport::new("h", closed, quad_h, floor, &quad.label(), ENTROPY_TOL))
}

/// Every oracle comparison for one state: constraints, fluxes and entropy.
pub fn oracle_suite(s: &State6, gas: &GasSpec, quad: &QuadratureSpec) -> Result<Vec<OracleReport>> {
    let mut out = oracle_constraint_reports(s, gas, quad)?;
    out.extend(oracle_flux_reports(s, gas, quad)?);
    out.push(oracle_entropy_report(s, gas, quad)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gas5() -> GasSpec {
        GasSpec::with_dof(5.0).unwrap()
    }

    #[test]
    fn mass_moment_recovers_density() {
        for dof in [3.5, 5.0, 12.0] {
            let g = GasSpec::with_dof(dof).unwrap();
            for z in [-0.5, 0.0, 0.8 * g.z_max()] {
                let s = State6::at_rest(1.7, 0.6, z, &g).unwrap();
                let rho = oracle_moment(&s, Monomial::ONE, &g, &QuadratureSpec::default()).unwrap();
                assert_relative_eq!(rho, 1.7, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn odd_moment_vanishes_at_rest() {
        let g = gas5();
        let s = State6::at_rest(1.0, 1.0, 0.3, &g).unwrap();
        let mx = oracle_moment(&s, Monomial { c: [1, 0, 0], ..Monomial::ONE }, &g, &QuadratureSpec::default()).unwrap();
        assert!(mx.abs() < 1e-12 * s.rho * s.temp.sqrt());
        let mxyz = oracle_moment(&s, Monomial { c: [1, 1, 1], ..Monomial::ONE }, &g, &QuadratureSpec::default()).unwrap();
        assert!(mxyz.abs() < 1e-12);
    }

    #[test]
    fn energy_moment_is_independent_of_pi() {
        let g = gas5();
        let s = State6::new(1.0, [0.0; 3], 1.0, 0.2).unwrap();
        let q = QuadratureSpec::default();
        let c2 = oracle_moment(&s, Monomial { c2: 1, ..Monomial::ONE }, &g, &q).unwrap();
        let i = oracle_moment(&s, Monomial { i: 1, ..Monomial::ONE }, &g, &q).unwrap();
        assert_relative_eq!(c2 + 2.0 * i / g.mass(), 5.0, max_relative = 1e-10);
        assert_relative_eq!(c2, 3.0 * 1.2, max_relative = 1e-10);
    }

    #[test]
    fn degree_limit() {
        let g = gas5();
        let s = State6::at_rest(1.0, 1.0, 0.0, &g).unwrap();
        let w = Monomial { c2: 2, i: 2, ..Monomial::ONE };
        assert!(oracle_moment(&s, w, &g, &QuadratureSpec::default()).is_err());
        assert!(QuadratureSpec::new(4, 128, 1e-10).is_err());
        assert!(QuadratureSpec::new(64, 128, 0.0).is_err());
    }

    #[test]
    fn multinomial_expansion() {
        let w = Monomial { c2: 2, ..Monomial::ONE }.to_integrand();
        // (x^2+y^2+z^2)^2 has 6 distinct monomials with coefficients summing to 9.
        assert_eq!(w.terms.len(), 6);
        assert_eq!(w.terms.iter().map(|t| t.coeff).sum::<f64>(), 9.0);
    }

    #[test]
    fn fluxes_at_equilibrium_and_moving() {
        let g = gas5();
        let q = QuadratureSpec::default();
        let eq = State6::at_rest(1.0, 1.0, 0.0, &g).unwrap();
        oracle_flux_check(&eq, &g, &q).unwrap();

        let moving = State6::new(1.0, [1.0, 2.0, 0.0], 1.0, 0.0).unwrap();
        let reports = oracle_flux_check(&moving, &g, &q).unwrap();
        let fxy = reports.iter().find(|r| r.quantity == "F_xy").unwrap();
        assert_eq!(fxy.closed_form, 2.0);
        assert!((fxy.quadrature - 2.0).abs() < 2e-8);
    }

    #[test]
    fn fluxes_near_the_upper_pole() {
        let g = gas5();
        let s = State6::new(1.0, [0.3, -0.1, 0.2], 1.0, 0.6).unwrap();
        let q = QuadratureSpec {
            internal_order: 256,
            ..QuadratureSpec::default()
        };
        oracle_flux_check(&s, &g, &q).unwrap();
    }

    #[test]
    fn verification_failure_lists_entries() {
        let bad = OracleReport::new("F_xx", 1.0, 1.1, 1.0, "test", FLUX_TOL);
        let good = OracleReport::new("F_yy", 1.0, 1.0, 1.0, "test", FLUX_TOL);
        match ensure_passed(&[bad, good]) {
            Err(Et6Error::Verification { offending }) => {
                assert_eq!(offending.len(), 1);
                assert!(offending[0].starts_with("F_xx"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn entropy_quadrature() {
        let g = gas5();
        let q = QuadratureSpec::default();
        let eq = State6::at_rest(1.0, 1.0, 0.0, &g).unwrap();
        let h0 = oracle_entropy(&eq, &g, &q).unwrap();
        assert!((h0 - 5.256_815_599_614_018).abs() < 1e-8);
        let report = oracle_entropy_report(&eq, &g, &q).unwrap();
        assert!(report.passed(), "{report}");

        let s = State6::new(1.0, [0.0; 3], 1.0, 0.2).unwrap();
        let h = oracle_entropy(&s, &g, &q).unwrap();
        let parts = entropy_parts(&s, &g).unwrap();
        assert_relative_eq!(h, parts.h_eq + s.rho * parts.k, max_relative = 1e-8);
        assert!(h < h0);
    }

    #[test]
    fn cross_check_can_be_disabled() {
        let g = gas5();
        let q = QuadratureSpec {
            cross_check: false,
            ..QuadratureSpec::default()
        };
        let s = State6::new(2.0, [0.1, 0.0, 0.0], 3.0, -0.5).unwrap();
        let rho = oracle_moment(&s, Monomial::ONE, &g, &q).unwrap();
        assert_relative_eq!(rho, 2.0, max_relative = 1e-10);
    }
}
