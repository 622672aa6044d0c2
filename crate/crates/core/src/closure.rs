//! Maximum-entropy closure of the six-moment system.
//!
//! The distribution maximizing the entropy under the constraints on
//! `(F, F_i, F_ll, G_ll)` is
//!
//! ```text
//! f(C, I) = Omega * exp(-zeta I) * exp(-xi C^2)
//! ```
//!
//! with `C` the peculiar velocity and `I` the internal energy of a molecule.
//! The three parameters follow in closed form from `(rho, T, Pi)`; they are
//! evaluated in log space so that states close to the edges of the Pi window
//! do not overflow.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Bound, Et6Error, Result};
use crate::gas::{
    admissibility, primitive_from_conserved, Conserved6, GasSpec, State6, IDX_F, IDX_FLL, IDX_FX,
    IDX_GLL, NVARS,
};

/// `|ln Omega|` above which the closure reports a range error.
pub const LN_OMEGA_GUARD: f64 = 500.0;

/// Parameters of the maximum-entropy distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    /// Inverse energy scale of `C^2`.
    pub xi: f64,
    /// Inverse energy scale of `I`.
    pub zeta: f64,
    /// Amplitude.
    pub omega: f64,
    /// `ln Omega`, kept separately because `Omega` itself may underflow.
    pub ln_omega: f64,
}

impl Multipliers {
    /// Builds a multiplier set from `(xi, zeta, ln Omega)`.
    pub fn from_log(xi: f64, zeta: f64, ln_omega: f64) -> Result<Self> {
        if !(xi > 0.0 && zeta > 0.0 && xi.is_finite() && zeta.is_finite()) {
            return Err(Et6Error::Domain(format!(
                "multipliers must satisfy xi > 0, zeta > 0 (got xi = {xi}, zeta = {zeta})"
            )));
        }
        if !ln_omega.is_finite() || ln_omega.abs() > LN_OMEGA_GUARD {
            return Err(Et6Error::Range(format!("|ln Omega| = {} exceeds {LN_OMEGA_GUARD}", ln_omega.abs())));
        }
        Ok(Self {
            xi,
            zeta,
            omega: ln_omega.exp(),
            ln_omega,
        })
    }
}

/// Lagrange multipliers conjugate to `(F, F_i, F_ll, G_ll)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainField {
    pub lambda: f64,
    pub lambda_i: [f64; 3],
    pub lambda_ll: f64,
    pub mu_ll: f64,
}

impl MainField {
    /// Components in the order of [`Conserved6::to_array`].
    pub fn to_array(&self) -> [f64; NVARS] {
        [
            self.lambda,
            self.lambda_i[0],
            self.lambda_i[1],
            self.lambda_i[2],
            self.lambda_ll,
            self.mu_ll,
        ]
    }

    /// Transforms multipliers of the comoving frame to a frame where the gas
    /// moves with velocity `v`.
    pub fn boosted(&self, v: [f64; 3]) -> Self {
        let sum = self.lambda_ll + self.mu_ll;
        let v2: f64 = v.iter().map(|c| c * c).sum();
        let lv: f64 = (0..3).map(|k| self.lambda_i[k] * v[k]).sum();
        Self {
            lambda: self.lambda - lv + sum * v2,
            lambda_i: [0, 1, 2].map(|k| self.lambda_i[k] - 2.0 * sum * v[k]),
            lambda_ll: self.lambda_ll,
            mu_ll: self.mu_ll,
        }
    }
}

/// Closed fluxes of the balance laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSet {
    /// Momentum flux, symmetric.
    pub f_ik: [[f64; 3]; 3],
    pub f_llk: [f64; 3],
    pub g_llk: [f64; 3],
    /// Production in the `F_ll` balance (BGK).
    pub p_ll: f64,
}

impl FluxSet {
    /// Flux of each density through a plane with unit normal `n`, in the
    /// order of [`Conserved6::to_array`].
    pub fn normal_flux(&self, rho: f64, v: [f64; 3], n: [f64; 3]) -> [f64; NVARS] {
        let vn = dot(v, n);
        let mom = [0, 1, 2].map(|i| (0..3).map(|k| self.f_ik[i][k] * n[k]).sum::<f64>());
        [rho * vn, mom[0], mom[1], mom[2], dot(self.f_llk, n), dot(self.g_llk, n)]
    }
}

/// Moments at zero velocity reconstructed from a multiplier set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComovingMoments {
    pub rho: f64,
    /// `p + Pi`
    pub p_plus_pi: f64,
    pub rho_eps: f64,
}

impl ComovingMoments {
    pub fn pressure(&self, gas: &GasSpec) -> f64 {
        2.0 * self.rho_eps / gas.dof()
    }

    pub fn dynamic_pressure(&self, gas: &GasSpec) -> f64 {
        self.p_plus_pi - self.pressure(gas)
    }
}

/// Components of the entropy density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParts {
    /// Entropy density.
    pub h: f64,
    /// Equilibrium part `rho s`.
    pub h_eq: f64,
    /// Specific nonequilibrium part, `(h - h_eq) / rho`.
    pub k: f64,
    /// Chemical potential over temperature.
    pub g_over_t: f64,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `ln Gamma((D - 3) / 2)`, the normalization of the internal-energy measure.
pub(crate) fn ln_gamma_internal(gas: &GasSpec) -> f64 {
    ln_gamma(1.0 + gas.alpha())
}

/// Multipliers of the maximum-entropy distribution for state `s`.
pub fn multipliers_from_state(s: &State6, gas: &GasSpec) -> Result<Multipliers> {
    let adm = admissibility(s, gas);
    if !adm.admissible {
        let (multiplier, bound) = if adm.lower_margin <= 0.0 {
            ("xi", Bound::Lower)
        } else {
            ("zeta", Bound::Upper)
        };
        return Err(Et6Error::MultiplierPositivity {
            multiplier,
            bound,
            ratio: adm.z,
        });
    }
    let z = adm.z;
    let dof = gas.dof();
    let p = s.pressure(gas);
    let m = gas.mass();
    // 1 - 3Z/(D-3) written through the upper margin to keep relative accuracy near the pole.
    let upper_factor = adm.upper_margin * 3.0 / (dof - 3.0);

    let ln_xi = (s.rho / (2.0 * p)).ln() - z.ln_1p();
    let ln_zeta = (s.rho / (m * p)).ln() - upper_factor.ln();
    if ln_zeta > 700.0 || ln_xi > 700.0 {
        return Err(Et6Error::Range(format!(
            "multiplier overflow near the window edge (ln xi = {ln_xi:.3}, ln zeta = {ln_zeta:.3})"
        )));
    }
    let ln_omega = s.rho.ln() - m.ln() - 1.5 * PI.ln() - ln_gamma_internal(gas)
        + 1.5 * ln_xi
        + 0.5 * (dof - 3.0) * ln_zeta;
    Multipliers::from_log(ln_xi.exp(), ln_zeta.exp(), ln_omega)
}

/// Zero-velocity moments `(rho, p + Pi, rho eps)` implied by a multiplier set.
pub fn state_from_multipliers(mul: &Multipliers, gas: &GasSpec) -> ComovingMoments {
    let a1 = 1.0 + gas.alpha();
    let m = gas.mass();
    // m pi^{3/2} Gamma(1+alpha) Omega / (xi^{3/2} zeta^{1+alpha})
    let ln_rho = m.ln() + 1.5 * PI.ln() + ln_gamma_internal(gas) + mul.ln_omega
        - 1.5 * mul.xi.ln()
        - a1 * mul.zeta.ln();
    let rho = ln_rho.exp();
    let p_plus_pi = rho / (2.0 * mul.xi);
    let rho_eps = 0.5 * p_plus_pi * (3.0 + 4.0 * a1 * mul.xi / (m * mul.zeta));
    ComovingMoments {
        rho,
        p_plus_pi,
        rho_eps,
    }
}

/// Value of the maximum-entropy distribution at peculiar velocity `c` and
/// internal energy `i`.
pub fn distribution_value(c: [f64; 3], i: f64, s: &State6, gas: &GasSpec) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Et6Error::Domain(format!("internal energy I = {i} must be non-negative")));
    }
    let mul = multipliers_from_state(s, gas)?;
    Ok((mul.ln_omega - mul.zeta * i - mul.xi * dot(c, c)).exp())
}

/// Generalized Maxwellian of a polyatomic gas in equilibrium at `(rho, T)`.
pub fn equilibrium_distribution(c: [f64; 3], i: f64, rho: f64, temp: f64, gas: &GasSpec) -> f64 {
    let kt = gas.kb() * temp;
    let m = gas.mass();
    let a1 = 1.0 + gas.alpha();
    let prefactor = rho / (m * kt.powf(a1) * ln_gamma(a1).exp()) * (m / (2.0 * PI * kt)).powf(1.5);
    prefactor * (-(0.5 * m * dot(c, c) + i) / kt).exp()
}

/// Closed fluxes of the six-field system.
pub fn closed_fluxes(s: &State6, gas: &GasSpec) -> FluxSet {
    let p = s.pressure(gas);
    let pp = p + s.pi;
    let rv2 = s.rho * s.speed_squared();
    let rho_eps = s.rho * s.internal_energy(gas);
    let mut f_ik = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            f_ik[i][k] = s.rho * s.v[i] * s.v[k] + if i == k { pp } else { 0.0 };
        }
    }
    FluxSet {
        f_ik,
        f_llk: s.v.map(|vk| (5.0 * pp + rv2) * vk),
        g_llk: s.v.map(|vk| (rv2 + 2.0 * rho_eps + 2.0 * pp) * vk),
        p_ll: production_bgk(s, gas),
    }
}

/// BGK production of the `F_ll` balance, `-3 Pi / tau`.
pub fn production_bgk(s: &State6, gas: &GasSpec) -> f64 {
    -3.0 * s.pi / gas.tau()
}

/// Specific nonequilibrium entropy `k(Z)`.
pub fn nonequilibrium_entropy(z: f64, gas: &GasSpec) -> f64 {
    let d3 = gas.dof() - 3.0;
    0.5 * gas.gas_constant() * (3.0 * z.ln_1p() + d3 * (-3.0 * z / d3).ln_1p())
}

pub fn entropy_parts(s: &State6, gas: &GasSpec) -> Result<EntropyParts> {
    let r = gas.gas_constant();
    let half_d = 0.5 * gas.dof();
    let mul = multipliers_from_state(s, gas)?;
    let mul_eq = multipliers_from_state(&s.equilibrium(), gas)?;
    Ok(EntropyParts {
        h: r * s.rho * (half_d - mul.ln_omega),
        h_eq: r * s.rho * (half_d - mul_eq.ln_omega),
        k: nonequilibrium_entropy(s.z(gas), gas),
        g_over_t: r * (1.0 + mul_eq.ln_omega),
    })
}

/// Entropy density as a function of the conserved densities.
pub fn entropy_of_conserved(u: &Conserved6, gas: &GasSpec) -> Result<f64> {
    let s = primitive_from_conserved(u, gas)?;
    let mul = multipliers_from_state(&s, gas)?;
    Ok(gas.gas_constant() * s.rho * (0.5 * gas.dof() - mul.ln_omega))
}

/// Main field in closed form.
pub fn main_field(s: &State6, gas: &GasSpec) -> Result<MainField> {
    let parts = entropy_parts(s, gas)?;
    let z = s.z(gas);
    let dof = gas.dof();
    let temp = s.temp;
    let one_z = 1.0 + z;
    let upper = 1.0 - 3.0 * z / (dof - 3.0);
    // k = -R ln(Omega / Omega_E)
    Ok(MainField {
        lambda: -parts.g_over_t + parts.k + s.speed_squared() / (2.0 * temp * one_z),
        lambda_i: s.v.map(|vi| -vi / (temp * one_z)),
        lambda_ll: -dof / (2.0 * temp * (dof - 3.0)) * z / (one_z * upper),
        mu_ll: 1.0 / (2.0 * temp * upper),
    })
}

/// Main field of the comoving frame, read off the multiplier definitions.
pub fn comoving_main_field(s: &State6, gas: &GasSpec) -> Result<MainField> {
    let mul = multipliers_from_state(&s.at_zero_velocity(), gas)?;
    let kb = gas.kb();
    let m = gas.mass();
    let mu_ll = 0.5 * kb * mul.zeta;
    Ok(MainField {
        lambda: -(kb / m) * (1.0 + mul.ln_omega),
        lambda_i: [0.0; 3],
        lambda_ll: kb / m * mul.xi - mu_ll,
        mu_ll,
    })
}

/// Scale of each conserved density, used to size finite-difference steps
/// and to normalize comparisons.
pub fn conserved_scales(s: &State6, gas: &GasSpec) -> [f64; NVARS] {
    let p = s.pressure(gas);
    let mom = (s.rho * p).sqrt() + s.rho * s.speed_squared().sqrt();
    let mut out = [0.0; NVARS];
    out[IDX_F] = s.rho;
    for k in 0..3 {
        out[IDX_FX + k] = mom;
    }
    out[IDX_FLL] = 3.0 * p + s.rho * s.speed_squared();
    out[IDX_GLL] = gas.dof() * p + s.rho * s.speed_squared();
    out
}
