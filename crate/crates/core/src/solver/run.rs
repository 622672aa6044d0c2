//! Scenarios, Strang-split time marching and recorded output.

use std::f64::consts::PI;

use super::{hyperbolic_step, max_wave_speed, relaxation_step_exact, Boundary, Grid1D, Model, Scheme, StepReport};
use crate::closure::entropy_parts;
use crate::error::{Et6Error, Result};
use crate::gas::{GasSpec, State6, IDX_FLL, NVARS};

pub const DEFAULT_CFL: f64 = 0.45;
/// Abort when more than this fraction of cells is projected in one step.
const MAX_PROJECTED_FRACTION: f64 = 0.01;
/// Give up after this many step halvings.
const MAX_HALVINGS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// Two constant states separated at `x0`.
    Riemann { left: State6, right: State6, x0: f64 },
    /// Right-running linear acoustic wave of the equilibrium subsystem on top
    /// of `background`, with `modes` wavelengths across the domain.
    /// `Pi` stays at the background value.
    AcousticWave { background: State6, amplitude: f64, modes: u32 },
    /// Constant state; only the production acts.
    Uniform { state: State6 },
}

impl InitialCondition {
    pub fn state_at(&self, x: f64, x_left: f64, x_right: f64, gas: &GasSpec) -> Result<State6> {
        match *self {
            InitialCondition::Riemann { left, right, x0 } => Ok(if x < x0 { left } else { right }),
            InitialCondition::Uniform { state } => Ok(state),
            InitialCondition::AcousticWave {
                background: b,
                amplitude,
                modes,
            } => {
                let d = gas.dof();
                let p0 = b.pressure(gas);
                let c = ((d + 2.0) / d * p0 / b.rho).sqrt();
                let phase = (2.0 * PI * modes as f64 * (x - x_left) / (x_right - x_left)).sin();
                let eta = amplitude * phase;
                let rho = b.rho * (1.0 + eta);
                let p = p0 * (1.0 + (d + 2.0) / d * eta);
                let v = [b.v[0] + c * eta, b.v[1], b.v[2]];
                State6::from_pressure(rho, v, p, b.pi, gas)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub gas: GasSpec,
    pub initial: InitialCondition,
    pub cells: usize,
    pub x_left: f64,
    pub x_right: f64,
    pub boundary: Boundary,
    pub scheme: Scheme,
    pub model: Model,
    pub cfl: f64,
    pub t_end: f64,
    /// Time between snapshots; `None` records only the initial and final states.
    pub output_interval: Option<f64>,
    /// Stop after this many steps even if `t_end` is not reached.
    pub max_steps: Option<usize>,
}

impl Scenario {
    /// Periodic MUSCL run of the six-field system on `[0, 1]` up to `t = 1`.
    pub fn new(gas: GasSpec, initial: InitialCondition, cells: usize) -> Self {
        Self {
            gas,
            initial,
            cells,
            x_left: 0.0,
            x_right: 1.0,
            boundary: Boundary::Periodic,
            scheme: Scheme::Muscl,
            model: Model::Et6,
            cfl: DEFAULT_CFL,
            t_end: 1.0,
            output_interval: None,
            max_steps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Et6Error::Scenario(format!("CFL must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Et6Error::Scenario(format!("end time must be positive, got {}", self.t_end)));
        }
        if let Some(dt) = self.output_interval {
            if !(dt > 0.0) {
                return Err(Et6Error::Scenario(format!("output interval must be positive, got {dt}")));
            }
        }
        if self.cells < 4 {
            return Err(Et6Error::Scenario(format!("need at least 4 cells, got {}", self.cells)));
        }
        Ok(())
    }

    pub fn initial_grid(&self) -> Result<Grid1D> {
        self.validate()?;
        let dx = (self.x_right - self.x_left) / self.cells as f64;
        let states = (0..self.cells)
            .map(|i| {
                let x = self.x_left + (i as f64 + 0.5) * dx;
                let mut s = self.initial.state_at(x, self.x_left, self.x_right, &self.gas)?;
                if self.model == Model::Euler {
                    s.pi = 0.0;
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Grid1D::from_states(self.x_left, self.x_right, self.boundary, &states, &self.gas)
    }
}

/// Primitive fields at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub states: Vec<State6>,
}

/// Snapshot CSV row: `x, rho, vx, T, p, Pi, Pi_over_p, h, k`.
pub type SnapshotRow = [f64; 9];

impl Snapshot {
    pub fn rows(&self, x: &[f64], gas: &GasSpec) -> Result<Vec<SnapshotRow>> {
        self.states
            .iter()
            .zip(x)
            .map(|(s, &xi)| {
                let parts = entropy_parts(s, gas)?;
                let p = s.pressure(gas);
                Ok([xi, s.rho, s.v[0], s.temp, p, s.pi, s.pi / p, parts.h, parts.k])
            })
            .collect()
    }
}

/// Per-step monitoring record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub step: usize,
    pub dt: f64,
    /// `sum_i u_i dx` in the order `[F, F_x, F_y, F_z, F_ll, G_ll]`.
    pub totals: [f64; NVARS],
    pub total_entropy: f64,
    pub max_abs_z: f64,
    /// Projections during this step.
    pub projections: usize,
    /// Cumulative change of the `F_ll` total caused by the production.
    pub production: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub gas: GasSpec,
    pub model: Model,
    pub x: Vec<f64>,
    pub dx: f64,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostic>,
    pub total_projections: usize,
    pub fallback_faces: usize,
    pub final_grid: Grid1D,
}

impl TimeSeries {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("initial snapshot is always recorded")
    }
}

fn diagnostic(g: &Grid1D, gas: &GasSpec, t: f64, step: usize, dt: f64, projections: usize, production: f64) -> Result<Diagnostic> {
    let states = g.states(gas)?;
    let max_abs_z = states.iter().map(|s| s.z(gas).abs()).fold(0.0, f64::max);
    Ok(Diagnostic {
        t,
        step,
        dt,
        totals: g.totals(),
        total_entropy: g.total_entropy(gas)?,
        max_abs_z,
        projections,
        production,
    })
}

fn strang_step(g: &Grid1D, dt: f64, sc: &Scenario) -> Result<(Grid1D, StepReport, f64)> {
    let gas = &sc.gas;
    match sc.model {
        Model::Euler => {
            let (next, rep) = hyperbolic_step(g, dt, gas, sc.scheme, sc.model)?;
            Ok((next, rep, 0.0))
        }
        Model::Et6 => {
            let a = relaxation_step_exact(g, 0.5 * dt, gas)?;
            let (b, rep) = hyperbolic_step(&a, dt, gas, sc.scheme, sc.model)?;
            let c = relaxation_step_exact(&b, 0.5 * dt, gas)?;
            let production = (a.totals()[IDX_FLL] - g.totals()[IDX_FLL]) + (c.totals()[IDX_FLL] - b.totals()[IDX_FLL]);
            Ok((c, rep, production))
        }
    }
}

/// Marches a scenario to its end time, recording diagnostics at every step
/// and snapshots at the output cadence.
pub fn run_scenario(sc: &Scenario) -> Result<TimeSeries> {
    let gas = &sc.gas;
    let mut grid = sc.initial_grid()?;
    let x = grid.centers();
    let dx = grid.dx();
    let mut t = 0.0;
    let mut step = 0;
    let mut production = 0.0;
    let mut total_projections = 0;
    let mut fallback_faces = 0;
    let mut snapshots = vec![Snapshot {
        t,
        states: grid.states(gas)?,
    }];
    let mut diagnostics = vec![diagnostic(&grid, gas, t, 0, 0.0, 0, 0.0)?];
    let mut next_output = sc.output_interval.unwrap_or(sc.t_end).min(sc.t_end);
    let time_eps = 1e-12 * sc.t_end;

    while t < sc.t_end - time_eps && sc.max_steps.map_or(true, |m| step < m) {
        let speed = max_wave_speed(&grid, gas, sc.model)?;
        let mut dt = (sc.cfl * dx / speed).min(next_output - t);
        let mut halvings = 0;
        let (next, report, prod) = loop {
            match strang_step(&grid, dt, sc) {
                Ok(out) => break out,
                Err(Et6Error::Reconstruction(msg)) if halvings < MAX_HALVINGS => {
                    log::debug!("t = {t:.6e}: {msg}; halving dt");
                    dt *= 0.5;
                    halvings += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if report.projections as f64 > MAX_PROJECTED_FRACTION * grid.len() as f64 {
            let states = next.states(gas)?;
            let worst = states
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.z(gas).abs().total_cmp(&b.1.z(gas).abs()))
                .map(|(i, s)| format!("cell {i} at x = {:.6}: rho = {:.6e}, T = {:.6e}, Pi/p = {:.6e}", x[i], s.rho, s.temp, s.z(gas)))
                .unwrap_or_default();
            return Err(Et6Error::SolverAbort(format!(
                "{} of {} cells projected into the admissibility window at t = {t:.6e} (dt = {dt:.3e}); {worst}",
                report.projections,
                grid.len()
            )));
        }
        if report.projections > 0 {
            log::info!("t = {t:.6e}: {} cells projected", report.projections);
        }
        grid = next;
        t = if (next_output - (t + dt)).abs() <= time_eps { next_output } else { t + dt };
        step += 1;
        production += prod;
        total_projections += report.projections;
        fallback_faces += report.fallback_faces;
        diagnostics.push(diagnostic(&grid, gas, t, step, dt, report.projections, production)?);
        if t >= next_output - time_eps {
            snapshots.push(Snapshot {
                t,
                states: grid.states(gas)?,
            });
            next_output = match sc.output_interval {
                Some(iv) => (next_output + iv).min(sc.t_end),
                None => sc.t_end,
            };
        }
    }
    if snapshots.last().is_some_and(|s| s.t != t) {
        snapshots.push(Snapshot {
            t,
            states: grid.states(gas)?,
        });
    }
    Ok(TimeSeries {
        gas: *gas,
        model: sc.model,
        x,
        dx,
        snapshots,
        diagnostics,
        total_projections,
        fallback_faces,
        final_grid: grid,
    })
}

/// The same scenario for the equilibrium subsystem (`Pi` ignored).
pub fn euler_reference(sc: &Scenario) -> Result<TimeSeries> {
    let euler = Scenario {
        model: Model::Euler,
        ..sc.clone()
    };
    run_scenario(&euler)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas5() -> GasSpec {
        GasSpec::with_dof(5.0).unwrap()
    }

    #[test]
    fn scenario_validation() {
        let g = gas5();
        let ic = InitialCondition::Uniform {
            state: State6::at_rest(1.0, 1.0, 0.0, &g).unwrap(),
        };
        let mut sc = Scenario::new(g, ic, 8);
        assert!(sc.validate().is_ok());
        sc.cfl = 1.5;
        assert!(sc.validate().is_err());
        sc.cfl = 0.5;
        sc.t_end = 0.0;
        assert!(sc.validate().is_err());
        sc.t_end = 1.0;
        sc.cells = 2;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn homogeneous_relaxation_is_exact() {
        let g = gas5().with_tau(0.1).unwrap();
        let s = State6::at_rest(1.0, 1.0, 0.3, &g).unwrap();
        let mut sc = Scenario::new(g, InitialCondition::Uniform { state: s }, 8);
        sc.output_interval = Some(0.1);
        let ts = run_scenario(&sc).unwrap();
        assert_eq!(ts.snapshots.len(), 11);
        for snap in &ts.snapshots {
            let exact = 0.3 * (-snap.t / 0.1).exp();
            for cell in &snap.states {
                assert!((cell.pi - exact).abs() <= 1e-12, "t = {}: {} vs {exact}", snap.t, cell.pi);
            }
        }
        let last = ts.diagnostics.last().unwrap();
        assert!((last.production - 3.0 * (0.3 * (-10f64).exp() - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn output_cadence_hits_requested_times() {
        let g = gas5();
        let bg = State6::at_rest(1.0, 1.0, 0.0, &g).unwrap();
        let mut sc = Scenario::new(
            g,
            InitialCondition::AcousticWave {
                background: bg,
                amplitude: 1e-3,
                modes: 1,
            },
            32,
        );
        sc.t_end = 0.3;
        sc.output_interval = Some(0.1);
        let ts = run_scenario(&sc).unwrap();
        let times: Vec<f64> = ts.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 4);
        for (t, want) in times.iter().zip([0.0, 0.1, 0.2, 0.3]) {
            assert!((t - want).abs() < 1e-12);
        }
    }

    #[test]
    fn max_steps_stops_early() {
        let g = gas5();
        let bg = State6::at_rest(1.0, 1.0, 0.0, &g).unwrap();
        let mut sc = Scenario::new(
            g,
            InitialCondition::AcousticWave {
                background: bg,
                amplitude: 1e-2,
                modes: 1,
            },
            16,
        );
        sc.max_steps = Some(5);
        let ts = run_scenario(&sc).unwrap();
        assert_eq!(ts.diagnostics.len(), 6);
        assert_eq!(ts.snapshots.len(), 2);
    }

    #[test]
    fn euler_mode_keeps_pi_zero() {
        let g = gas5();
        let left = State6::from_pressure(1.0, [0.0; 3], 1.0, 0.0, &g).unwrap();
        let right = State6::from_pressure(0.125, [0.0; 3], 0.1, 0.0, &g).unwrap();
        let mut sc = Scenario::new(g, InitialCondition::Riemann { left, right, x0: 0.5 }, 50);
        sc.boundary = Boundary::Outflow;
        sc.t_end = 0.1;
        let ts = euler_reference(&sc).unwrap();
        assert!(ts.last().states.iter().all(|s| s.pi.abs() < 1e-14));
    }
}
