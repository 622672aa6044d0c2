//! One-dimensional finite-volume solver.
//!
//! The hyperbolic part uses Rusanov (local Lax-Friedrichs) fluxes, optionally
//! with MUSCL reconstruction of the primitive variables and SSP-RK2 stepping.
//! The BGK production is integrated exactly, and the two parts are combined
//! by Strang splitting in [`run_scenario`].

mod analysis;
mod run;

use std::fmt;

use crate::closure::{closed_fluxes, entropy_parts};
use crate::error::{Et6Error, Result};
use crate::gas::{
    conserved_from_primitive, primitive_from_conserved_raw, Conserved6, GasSpec, State6, IDX_FLL, NVARS,
};

pub use analysis::{bulk_viscosity, l1_difference, ns_limit_diagnostic, observed_orders, self_convergence, ConvergenceReport, NsLimitReport};
pub use run::{
    euler_reference, run_scenario, Diagnostic, InitialCondition, Scenario, Snapshot, TimeSeries, DEFAULT_CFL,
};

/// Ghost cells on each side.
const GHOSTS: usize = 2;
/// Projected states sit at this fraction of the violated bound.
pub const PROJECTION_FACTOR: f64 = 0.999;
/// Safety factor on the wave-speed bound.
pub const SPEED_SAFETY: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Outflow,
    /// Solid wall: the normal momentum changes sign in the ghost cells.
    Reflective,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Outflow => "outflow",
            Boundary::Reflective => "reflective",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// First order in space and time.
    Rusanov,
    /// Minmod-limited primitive reconstruction with SSP-RK2.
    Muscl,
}

/// Field equations advanced by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Et6,
    /// Equilibrium subsystem: `Pi` is held at zero and `F_ll` follows the
    /// other densities.
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_left: f64,
    x_right: f64,
    dx: f64,
    boundary: Boundary,
    cells: Vec<Conserved6>,
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, boundary: Boundary, cells: Vec<Conserved6>, gas: &GasSpec) -> Result<Self> {
        if cells.len() < 4 {
            return Err(Et6Error::Scenario(format!("need at least 4 cells, got {}", cells.len())));
        }
        if !(x_right > x_left) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Et6Error::Scenario(format!("empty domain [{x_left}, {x_right}]")));
        }
        for (i, u) in cells.iter().enumerate() {
            crate::gas::primitive_from_conserved(u, gas)
                .map_err(|e| Et6Error::Scenario(format!("cell {i}: {e}")))?;
        }
        let dx = (x_right - x_left) / cells.len() as f64;
        Ok(Self {
            x_left,
            x_right,
            dx,
            boundary,
            cells,
        })
    }

    pub fn from_states(x_left: f64, x_right: f64, boundary: Boundary, states: &[State6], gas: &GasSpec) -> Result<Self> {
        let cells = states.iter().map(|s| conserved_from_primitive(s, gas)).collect();
        Self::new(x_left, x_right, boundary, cells, gas)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.x_left, self.x_right)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn cells(&self) -> &[Conserved6] {
        &self.cells
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x_left + (i as f64 + 0.5) * self.dx).collect()
    }

    pub fn states(&self, gas: &GasSpec) -> Result<Vec<State6>> {
        self.cells.iter().map(|u| primitive_from_conserved_raw(u, gas)).collect()
    }

    /// `sum_i u_i dx` for each density, with a fixed summation order.
    pub fn totals(&self) -> [f64; NVARS] {
        std::array::from_fn(|k| {
            let col: Vec<f64> = self.cells.iter().map(|u| u.to_array()[k] * self.dx).collect();
            crate::oracle::quadrature::pairwise_sum(&col)
        })
    }

    /// `sum_i h_i dx`.
    pub fn total_entropy(&self, gas: &GasSpec) -> Result<f64> {
        let mut col = Vec::with_capacity(self.len());
        for s in self.states(gas)? {
            col.push(entropy_parts(&s, gas)?.h * self.dx);
        }
        Ok(crate::oracle::quadrature::pairwise_sum(&col))
    }

    fn with_cells(&self, cells: Vec<Conserved6>) -> Self {
        Self {
            cells,
            ..self.clone()
        }
    }
}

/// Bookkeeping of one hyperbolic update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Cells pulled back into the admissibility window.
    pub projections: usize,
    /// Faces where the reconstruction fell back to first order.
    pub fallback_faces: usize,
}

impl StepReport {
    fn add(&mut self, other: StepReport) {
        self.projections += other.projections;
        self.fallback_faces += other.fallback_faces;
    }
}

/// Largest signal speed in the x direction, times [`SPEED_SAFETY`].
pub fn max_wave_speed(g: &Grid1D, gas: &GasSpec, model: Model) -> Result<f64> {
    let mut smax: f64 = 0.0;
    for u in &g.cells {
        let s = primitive_from_conserved_raw(u, gas)?;
        smax = smax.max(signal_speed(&s, gas, model));
    }
    Ok(SPEED_SAFETY * smax)
}

fn signal_speed(s: &State6, gas: &GasSpec, model: Model) -> f64 {
    let p = s.pressure(gas);
    let c2 = match model {
        Model::Et6 => 5.0 * (p + s.pi) / (3.0 * s.rho),
        Model::Euler => (gas.dof() + 2.0) / gas.dof() * p / s.rho,
    };
    s.v[0].abs() + c2.sqrt()
}

/// Primitive vector `[rho, vx, vy, vz, p, Pi]`.
type Prim = [f64; NVARS];

fn to_prim(s: &State6, gas: &GasSpec) -> Prim {
    [s.rho, s.v[0], s.v[1], s.v[2], s.pressure(gas), s.pi]
}

fn from_prim(w: &Prim, gas: &GasSpec) -> Option<State6> {
    let [rho, vx, vy, vz, p, pi] = *w;
    if !(rho > 0.0 && p > 0.0) {
        return None;
    }
    let s = State6::from_pressure(rho, [vx, vy, vz], p, pi, gas).ok()?;
    crate::gas::admissibility(&s, gas).admissible.then_some(s)
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

fn ghost_index(i: isize, n: usize, boundary: Boundary) -> (usize, bool) {
    let n = n as isize;
    if (0..n).contains(&i) {
        return (i as usize, false);
    }
    match boundary {
        Boundary::Periodic => (i.rem_euclid(n) as usize, false),
        Boundary::Outflow => (i.clamp(0, n - 1) as usize, false),
        Boundary::Reflective => {
            let mirrored = if i < 0 { -i - 1 } else { 2 * n - 1 - i };
            (mirrored as usize, true)
        }
    }
}

fn x_flux(s: &State6, gas: &GasSpec) -> [f64; NVARS] {
    closed_fluxes(s, gas).normal_flux(s.rho, s.v, [1.0, 0.0, 0.0])
}

fn rusanov(ul: &Conserved6, sl: &State6, ur: &Conserved6, sr: &State6, gas: &GasSpec, model: Model) -> [f64; NVARS] {
    let fl = x_flux(sl, gas);
    let fr = x_flux(sr, gas);
    let a = signal_speed(sl, gas, model).max(signal_speed(sr, gas, model));
    let (ul, ur) = (ul.to_array(), ur.to_array());
    std::array::from_fn(|k| 0.5 * (fl[k] + fr[k]) - 0.5 * a * (ur[k] - ul[k]))
}

/// `-(F_{i+1/2} - F_{i-1/2}) / dx` for every cell.
fn residual(g: &Grid1D, gas: &GasSpec, scheme: Scheme, model: Model) -> Result<(Vec<[f64; NVARS]>, usize)> {
    let n = g.len();
    let ext = n + 2 * GHOSTS;
    let mut states = Vec::with_capacity(ext);
    let mut cons = Vec::with_capacity(ext);
    for e in 0..ext {
        let (i, mirror) = ghost_index(e as isize - GHOSTS as isize, n, g.boundary);
        let mut s = primitive_from_conserved_raw(&g.cells[i], gas)?;
        let mut u = g.cells[i];
        if mirror {
            s.v[0] = -s.v[0];
            u.f_i[0] = -u.f_i[0];
        }
        states.push(s);
        cons.push(u);
    }

    let prims: Vec<Prim> = states.iter().map(|s| to_prim(s, gas)).collect();
    let slopes: Vec<Prim> = match scheme {
        Scheme::Rusanov => vec![[0.0; NVARS]; ext],
        Scheme::Muscl => (0..ext)
            .map(|e| {
                if e == 0 || e == ext - 1 {
                    [0.0; NVARS]
                } else {
                    std::array::from_fn(|k| minmod(prims[e][k] - prims[e - 1][k], prims[e + 1][k] - prims[e][k]))
                }
            })
            .collect(),
    };

    let mut fallback = 0;
    // Face f sits between extended cells GHOSTS - 1 + f and GHOSTS + f.
    let fluxes: Vec<[f64; NVARS]> = (0..=n)
        .map(|f| {
            let l = GHOSTS - 1 + f;
            let r = GHOSTS + f;
            if scheme == Scheme::Muscl {
                let wl: Prim = std::array::from_fn(|k| prims[l][k] + 0.5 * slopes[l][k]);
                let wr: Prim = std::array::from_fn(|k| prims[r][k] - 0.5 * slopes[r][k]);
                if let (Some(sl), Some(sr)) = (from_prim(&wl, gas), from_prim(&wr, gas)) {
                    let ul = conserved_from_primitive(&sl, gas);
                    let ur = conserved_from_primitive(&sr, gas);
                    return rusanov(&ul, &sl, &ur, &sr, gas, model);
                }
                fallback += 1;
            }
            rusanov(&cons[l], &states[l], &cons[r], &states[r], gas, model)
        })
        .collect();

    let inv_dx = 1.0 / g.dx;
    let res = (0..n)
        .map(|i| std::array::from_fn(|k| -(fluxes[i + 1][k] - fluxes[i][k]) * inv_dx))
        .collect();
    Ok((res, fallback))
}

/// Rebuilds `F_ll` so that the state is admissible (or, for the equilibrium
/// subsystem, has `Pi = 0`), leaving `F`, `F_i` and `G_ll` untouched.
/// Returns whether a projection took place.
fn enforce_window(u: &mut Conserved6, gas: &GasSpec, model: Model) -> Result<bool> {
    let s = primitive_from_conserved_raw(u, gas)?;
    let p = s.pressure(gas);
    let rv2 = s.rho * s.speed_squared();
    let (pi, projected) = match model {
        Model::Euler => (0.0, false),
        Model::Et6 => {
            if s.pi <= -p {
                (-PROJECTION_FACTOR * p, true)
            } else if s.pi >= gas.z_max() * p {
                (PROJECTION_FACTOR * gas.z_max() * p, true)
            } else {
                return Ok(false);
            }
        }
    };
    u.f_ll = rv2 + 3.0 * (p + pi);
    Ok(projected)
}

fn forward_euler(g: &Grid1D, dt: f64, gas: &GasSpec, scheme: Scheme, model: Model) -> Result<(Vec<Conserved6>, StepReport)> {
    let (res, fallback_faces) = residual(g, gas, scheme, model)?;
    let mut report = StepReport {
        projections: 0,
        fallback_faces,
    };
    let mut cells = Vec::with_capacity(g.len());
    for (u, r) in g.cells.iter().zip(&res) {
        let arr = u.to_array();
        let mut next = Conserved6::from_array(std::array::from_fn(|k| arr[k] + dt * r[k]));
        if enforce_window(&mut next, gas, model)? {
            report.projections += 1;
        }
        cells.push(next);
    }
    Ok((cells, report))
}

/// Advances the flux part by `dt`.
///
/// Fails with a reconstruction error when a cell loses positive density or
/// internal energy; the caller is expected to retry with a smaller step.
pub fn hyperbolic_step(g: &Grid1D, dt: f64, gas: &GasSpec, scheme: Scheme, model: Model) -> Result<(Grid1D, StepReport)> {
    let (stage1, mut report) = forward_euler(g, dt, gas, scheme, model)?;
    match scheme {
        Scheme::Rusanov => Ok((g.with_cells(stage1), report)),
        Scheme::Muscl => {
            let g1 = g.with_cells(stage1);
            let (stage2, r2) = forward_euler(&g1, dt, gas, scheme, model)?;
            report.add(r2);
            let mut cells = Vec::with_capacity(g.len());
            for (u0, u2) in g.cells.iter().zip(&stage2) {
                let (a, b) = (u0.to_array(), u2.to_array());
                let mut next = Conserved6::from_array(std::array::from_fn(|k| 0.5 * a[k] + 0.5 * b[k]));
                if enforce_window(&mut next, gas, model)? {
                    report.projections += 1;
                }
                cells.push(next);
            }
            Ok((g.with_cells(cells), report))
        }
    }
}

/// Exact solution of `dPi/dt = -Pi / tau` with `F`, `F_i`, `G_ll` frozen.
pub fn relaxation_step_exact(g: &Grid1D, dt: f64, gas: &GasSpec) -> Result<Grid1D> {
    let decay = (-dt / gas.tau()).exp();
    let mut cells = Vec::with_capacity(g.len());
    for u in &g.cells {
        let s = primitive_from_conserved_raw(u, gas)?;
        let p = s.pressure(gas);
        let mut next = *u;
        let mut arr = next.to_array();
        arr[IDX_FLL] = s.rho * s.speed_squared() + 3.0 * (p + s.pi * decay);
        next = Conserved6::from_array(arr);
        cells.push(next);
    }
    Ok(g.with_cells(cells))
}
