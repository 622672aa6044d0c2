//! Gas model: equations of state, primitive/conserved conversions and the
//! admissibility window of the dynamic pressure.
//!
//! All formulas depend on the Boltzmann constant and the molecular mass only
//! through the gas constant `R = kB / m`. The default nondimensional gas has
//! `kB = m = 1`.

use crate::error::{Bound, Et6Error, Result};

/// Smallest accepted number of degrees of freedom. The Pi window collapses at `D = 3`.
pub const MIN_DOF: f64 = 3.0 + 1e-6;

/// Index of each density in the flat conserved vector.
pub const IDX_F: usize = 0;
pub const IDX_FX: usize = 1;
pub const IDX_FY: usize = 2;
pub const IDX_FZ: usize = 3;
pub const IDX_FLL: usize = 4;
pub const IDX_GLL: usize = 5;

/// Number of balance laws.
pub const NVARS: usize = 6;

/// Molecular model of the gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSpec {
    m: f64,
    kb: f64,
    dof: f64,
    alpha: f64,
    tau: f64,
}

impl GasSpec {
    /// Builds a gas with `dof` degrees of freedom, molecular mass `m`,
    /// Boltzmann constant `kb` and BGK relaxation time `tau`.
    pub fn new(dof: f64, m: f64, kb: f64, tau: f64) -> Result<Self> {
        if !dof.is_finite() || dof < MIN_DOF {
            return Err(Et6Error::InvalidGas(format!(
                "degrees of freedom D = {dof} must be a finite number >= 3 + 1e-6"
            )));
        }
        for (name, value) in [("m", m), ("kB", kb), ("tau", tau)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Et6Error::InvalidGas(format!("{name} = {value} must be positive and finite")));
            }
        }
        Ok(Self {
            m,
            kb,
            dof,
            alpha: (dof - 5.0) / 2.0,
            tau,
        })
    }

    /// Nondimensional gas (`kB = m = 1`, `tau = 1`).
    pub fn with_dof(dof: f64) -> Result<Self> {
        Self::new(dof, 1.0, 1.0, 1.0)
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.dof, self.m, self.kb, tau)
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    /// Exponent of the internal-energy measure `I^alpha dI`, `(D - 5) / 2`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn kb(&self) -> f64 {
        self.kb
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Gas constant `kB / m`.
    pub fn gas_constant(&self) -> f64 {
        self.kb / self.m
    }

    /// Upper end of the admissible `Pi / p` range, `(D - 3) / 3`.
    pub fn z_max(&self) -> f64 {
        (self.dof - 3.0) / 3.0
    }
}

/// Primitive nonequilibrium state at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State6 {
    pub rho: f64,
    pub v: [f64; 3],
    /// Kinetic temperature.
    pub temp: f64,
    /// Dynamic pressure.
    pub pi: f64,
}

impl State6 {
    pub fn new(rho: f64, v: [f64; 3], temp: f64, pi: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Et6Error::Domain(format!("density rho = {rho} must be positive")));
        }
        if !(temp.is_finite() && temp > 0.0) {
            return Err(Et6Error::Domain(format!("temperature T = {temp} must be positive")));
        }
        if !(pi.is_finite() && v.iter().all(|c| c.is_finite())) {
            return Err(Et6Error::Domain("velocity and Pi must be finite".into()));
        }
        Ok(Self { rho, v, temp, pi })
    }

    /// State at rest with `Pi = z * p`.
    pub fn at_rest(rho: f64, temp: f64, z: f64, gas: &GasSpec) -> Result<Self> {
        let p = gas.gas_constant() * rho * temp;
        Self::new(rho, [0.0; 3], temp, z * p)
    }

    /// State with prescribed pressure instead of temperature.
    pub fn from_pressure(rho: f64, v: [f64; 3], p: f64, pi: f64, gas: &GasSpec) -> Result<Self> {
        Self::new(rho, v, p / (gas.gas_constant() * rho), pi)
    }

    pub fn pressure(&self, gas: &GasSpec) -> f64 {
        gas.gas_constant() * self.rho * self.temp
    }

    /// Specific internal energy `eps = (D/2) R T`.
    pub fn internal_energy(&self, gas: &GasSpec) -> f64 {
        0.5 * gas.dof() * gas.gas_constant() * self.temp
    }

    /// `Z = Pi / p`.
    pub fn z(&self, gas: &GasSpec) -> f64 {
        self.pi / self.pressure(gas)
    }

    pub fn speed_squared(&self) -> f64 {
        self.v.iter().map(|c| c * c).sum()
    }

    /// Same thermodynamic state seen in the frame moving with the gas.
    pub fn at_zero_velocity(&self) -> Self {
        Self { v: [0.0; 3], ..*self }
    }

    /// Same `(rho, v, T)` with the dynamic pressure removed.
    pub fn equilibrium(&self) -> Self {
        Self { pi: 0.0, ..*self }
    }
}

/// Densities evolved by the balance laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved6 {
    /// Mass density.
    pub f: f64,
    /// Momentum density.
    pub f_i: [f64; 3],
    /// Energy moment `rho v^2 + 2 rho eps`.
    pub g_ll: f64,
    /// Momentum-flux trace `rho v^2 + 3 (p + Pi)`.
    pub f_ll: f64,
}

impl Conserved6 {
    /// Flat vector in the order `[F, F_x, F_y, F_z, F_ll, G_ll]`.
    pub fn to_array(&self) -> [f64; NVARS] {
        [self.f, self.f_i[0], self.f_i[1], self.f_i[2], self.f_ll, self.g_ll]
    }

    pub fn from_array(u: [f64; NVARS]) -> Self {
        Self {
            f: u[IDX_F],
            f_i: [u[IDX_FX], u[IDX_FY], u[IDX_FZ]],
            f_ll: u[IDX_FLL],
            g_ll: u[IDX_GLL],
        }
    }
}

/// Pressure and specific internal energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eos {
    pub p: f64,
    pub eps: f64,
}

/// Thermal and caloric equations of state.
pub fn eos_evaluate(rho: f64, temp: f64, gas: &GasSpec) -> Result<Eos> {
    if !(rho > 0.0 && temp > 0.0) {
        return Err(Et6Error::Domain(format!(
            "equation of state needs rho > 0 and T > 0 (got rho = {rho}, T = {temp})"
        )));
    }
    let r = gas.gas_constant();
    Ok(Eos {
        p: r * rho * temp,
        eps: 0.5 * gas.dof() * r * temp,
    })
}

pub fn conserved_from_primitive(s: &State6, gas: &GasSpec) -> Conserved6 {
    let rv2 = s.rho * s.speed_squared();
    let p = s.pressure(gas);
    Conserved6 {
        f: s.rho,
        f_i: s.v.map(|c| s.rho * c),
        g_ll: rv2 + 2.0 * s.rho * s.internal_energy(gas),
        f_ll: rv2 + 3.0 * (p + s.pi),
    }
}

/// Inverts the conserved densities without checking the Pi window.
///
/// Fails only when the density or the internal energy is not positive.
pub fn primitive_from_conserved_raw(u: &Conserved6, gas: &GasSpec) -> Result<State6> {
    let rho = u.f;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Et6Error::Reconstruction(format!("non-positive density F = {rho}")));
    }
    let v = u.f_i.map(|m| m / rho);
    let rv2: f64 = u.f_i.iter().map(|m| m * m).sum::<f64>() / rho;
    let rho_eps = 0.5 * (u.g_ll - rv2);
    if !(rho_eps.is_finite() && rho_eps > 0.0) {
        return Err(Et6Error::Reconstruction(format!(
            "non-positive internal energy rho*eps = {rho_eps}"
        )));
    }
    let p = 2.0 * rho_eps / gas.dof();
    let pi = (u.f_ll - rv2) / 3.0 - p;
    let temp = p / (gas.gas_constant() * rho);
    State6::new(rho, v, temp, pi).map_err(|e| Et6Error::Reconstruction(e.to_string()))
}

pub fn primitive_from_conserved(u: &Conserved6, gas: &GasSpec) -> Result<State6> {
    let s = primitive_from_conserved_raw(u, gas)?;
    admissibility(&s, gas).into_result()?;
    Ok(s)
}

/// Position of a state inside the Pi window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// `Pi / p`.
    pub z: f64,
    /// `Pi/p + 1`: distance to the lower bound in units of `p`.
    pub lower_margin: f64,
    /// `(D-3)/3 - Pi/p`: distance to the upper bound in units of `p`.
    pub upper_margin: f64,
}

impl Admissibility {
    /// Bound with the smaller margin.
    pub fn nearest_bound(&self) -> Bound {
        if self.lower_margin <= self.upper_margin {
            Bound::Lower
        } else {
            Bound::Upper
        }
    }

    pub fn into_result(self) -> Result<Self> {
        if self.admissible {
            return Ok(self);
        }
        let bound = self.nearest_bound();
        let margin = match bound {
            Bound::Lower => self.lower_margin,
            Bound::Upper => self.upper_margin,
        };
        Err(Et6Error::Inadmissible {
            bound,
            ratio: self.z,
            margin,
        })
    }
}

pub fn admissibility(s: &State6, gas: &GasSpec) -> Admissibility {
    let z = s.z(gas);
    let lower_margin = z + 1.0;
    let upper_margin = gas.z_max() - z;
    Admissibility {
        admissible: lower_margin > 0.0 && upper_margin > 0.0,
        z,
        lower_margin,
        upper_margin,
    }
}
