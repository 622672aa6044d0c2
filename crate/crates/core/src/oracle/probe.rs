//! Entropy-optimality probe.
//!
//! The closure distribution is perturbed inside the family
//! `Omega' exp(-zeta' I - xi' C^2 - beta C^4)`. For each `beta` the three
//! constraints (mass, translational trace, total energy) are re-imposed by a
//! damped Newton iteration on `(ln Omega', xi', zeta')`, and the entropy of the
//! constrained trial is compared with the unperturbed one.

use nalgebra::{Matrix3, Vector3};

use super::quadrature::{gauss_laguerre, gauss_legendre, pairwise_sum};
use crate::closure::multipliers_from_state;
use crate::error::{Et6Error, Result};
use crate::gas::{GasSpec, State6};

const PANEL_ORDER: usize = 20;
const RADIAL_PANELS: usize = 200;
const RADIAL_DECAY: f64 = 800.0;
const INTERNAL_ORDER: usize = 128;
const MAX_ITER: usize = 80;
const NEWTON_TOL: f64 = 1e-13;

/// Result for one trial amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEntry {
    pub beta: f64,
    /// Entropy density of the constrained trial; `NaN` if Newton failed.
    pub h: f64,
    pub ln_omega: f64,
    pub xi: f64,
    pub zeta: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// Closed-form entropy density of the state.
    pub h_closure: f64,
    pub entries: Vec<ProbeEntry>,
}

impl ProbeReport {
    /// Some Newton solve failed; the remaining entries are still meaningful.
    pub fn inconclusive(&self) -> bool {
        self.entries.iter().any(|e| !e.converged)
    }

    /// Entropy of `beta = 0` (or the closure value when not sampled).
    pub fn h_reference(&self) -> f64 {
        self.entries
            .iter()
            .find(|e| e.beta == 0.0 && e.converged)
            .map_or(self.h_closure, |e| e.h)
    }

    /// `h(beta) < h(0)` for every converged `beta > 0`.
    pub fn optimal(&self) -> bool {
        let h0 = self.h_reference();
        self.entries
            .iter()
            .filter(|e| e.converged && e.beta > 0.0)
            .all(|e| e.h < h0)
    }

    /// Entropy non-increasing along the sweep sorted by `beta`.
    pub fn monotone(&self) -> bool {
        let mut sorted: Vec<&ProbeEntry> = self.entries.iter().filter(|e| e.converged).collect();
        sorted.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        sorted.windows(2).all(|w| w[1].h <= w[0].h)
    }
}

/// Moments `N[C^{2a} I^b] / Omega` of the trial family, for `a <= 3`, `b <= 2`.
struct TrialMoments {
    vel: [f64; 4],
    int: [f64; 3],
}

impl TrialMoments {
    /// `xi` may be negative when `beta > 0`; the radial integral
    /// `4 pi int r^{2+2a} e^{-xi r^2 - beta r^4} dr` is then taken with
    /// composite Gauss-Legendre panels up to where the exponent falls below
    /// its maximum by `RADIAL_DECAY`.
    fn new(xi: f64, zeta: f64, beta: f64, alpha: f64) -> Self {
        let peak = if xi < 0.0 { xi * xi / (4.0 * beta) } else { 0.0 };
        let k = RADIAL_DECAY + peak;
        let u_max = if beta > 0.0 {
            (-xi + (xi * xi + 4.0 * beta * k).sqrt()) / (2.0 * beta)
        } else {
            k / xi
        };
        let r_max = u_max.sqrt();
        let rule = gauss_legendre(PANEL_ORDER);
        let h = r_max / RADIAL_PANELS as f64;
        let mut samples = [const { Vec::new() }; 4];
        for panel in 0..RADIAL_PANELS {
            let mid = (panel as f64 + 0.5) * h;
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let r = mid + 0.5 * h * x;
                let r2 = r * r;
                let base = 0.5 * h * w * r2 * (-xi * r2 - beta * r2 * r2).exp();
                for (a, col) in samples.iter_mut().enumerate() {
                    col.push(base * r2.powi(a as i32));
                }
            }
        }
        let vel = samples.map(|col| 4.0 * std::f64::consts::PI * pairwise_sum(&col));
        let internal = gauss_laguerre(INTERNAL_ORDER, alpha);
        let ipref = zeta.powf(-(1.0 + alpha));
        let int = [0, 1, 2].map(|b| ipref * internal.apply(|y| (y / zeta).powi(b)));
        Self { vel, int }
    }

    fn n(&self, a: usize, b: usize) -> f64 {
        self.vel[a] * self.int[b]
    }
}

struct Targets {
    /// `rho / m`
    n0: f64,
    /// `3 (p + Pi) / m`
    nc2: f64,
    /// `rho eps_int / m`, the internal part of the energy.
    ni: f64,
}

fn residual(x: &Vector3<f64>, beta: f64, alpha: f64, t: &Targets) -> (Vector3<f64>, Matrix3<f64>, TrialMoments) {
    let (ln_omega, xi, zeta) = (x[0], x[1], x[2]);
    let mo = TrialMoments::new(xi, zeta, beta, alpha);
    let om = ln_omega.exp();
    // Rows are relative residuals of (N0, N[C^2], N[I]).
    let rows = [(0, 0, t.n0), (1, 0, t.nc2), (0, 1, t.ni)];
    let mut r = Vector3::zeros();
    let mut jac = Matrix3::zeros();
    for (row, &(a, b, target)) in rows.iter().enumerate() {
        let val = om * mo.n(a, b);
        r[row] = val / target - 1.0;
        jac[(row, 0)] = val / target;
        jac[(row, 1)] = -om * mo.n(a + 1, b) / target;
        jac[(row, 2)] = -om * mo.n(a, b + 1) / target;
    }
    (r, jac, mo)
}

fn solve_trial(x0: Vector3<f64>, beta: f64, alpha: f64, t: &Targets) -> (Vector3<f64>, usize, bool) {
    let mut x = x0;
    let (mut r, mut jac, _) = residual(&x, beta, alpha, t);
    for it in 0..MAX_ITER {
        if r.amax() < NEWTON_TOL {
            return (x, it, true);
        }
        let Some(dx) = jac.lu().solve(&(-r)) else {
            return (x, it, false);
        };
        let mut step = 1.0;
        loop {
            let trial = x + dx * step;
            if trial[2] > 0.0 && (beta > 0.0 || trial[1] > 0.0) {
                let (rt, jt, _) = residual(&trial, beta, alpha, t);
                if rt.norm() < r.norm() || step < 1e-6 {
                    x = trial;
                    r = rt;
                    jac = jt;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-8 {
                return (x, it, false);
            }
        }
    }
    (x, MAX_ITER, r.amax() < NEWTON_TOL)
}

/// Constrained entropy of the trial family over a sweep of `beta >= 0`.
///
/// Newton failures are recorded per entry and do not abort the sweep.
pub fn mep_optimality_probe(s: &State6, gas: &GasSpec, betas: &[f64]) -> Result<ProbeReport> {
    if let Some(b) = betas.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
        return Err(Et6Error::Domain(format!("trial amplitude must be finite and >= 0, got {b}")));
    }
    let mul = multipliers_from_state(s, gas)?;
    let alpha = gas.alpha();
    let m = gas.mass();
    let p = s.pressure(gas);
    let targets = Targets {
        n0: s.rho / m,
        nc2: 3.0 * (p + s.pi) / m,
        ni: s.rho * (1.0 + alpha) / (m * m * mul.zeta),
    };
    let h_closure = crate::closure::entropy_parts(s, gas)?.h;

    let x0 = Vector3::new(mul.ln_omega, mul.xi, mul.zeta);
    let entries = betas
        .iter()
        .map(|&beta| {
            let (x, iterations, converged) = solve_trial(x0, beta, alpha, &targets);
            let (_, _, mo) = residual(&x, beta, alpha, &targets);
            let om = x[0].exp();
            let h = if converged {
                -gas.kb() * om * (x[0] * mo.n(0, 0) - x[1] * mo.n(1, 0) - x[2] * mo.n(0, 1) - beta * mo.n(2, 0))
            } else {
                log::warn!("optimality probe: Newton did not converge at beta = {beta}");
                f64::NAN
            };
            ProbeEntry {
                beta,
                h,
                ln_omega: x[0],
                xi: x[1],
                zeta: x[2],
                iterations,
                converged,
            }
        })
        .collect();
    Ok(ProbeReport { h_closure, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_recovers_closure() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let s = State6::new(1.3, [0.0; 3], 0.8, 0.25).unwrap();
        let rep = mep_optimality_probe(&s, &g, &[0.0]).unwrap();
        let e = &rep.entries[0];
        let mul = multipliers_from_state(&s, &g).unwrap();
        assert!(e.converged);
        assert!(e.iterations <= 1);
        assert!((e.xi / mul.xi - 1.0).abs() < 1e-12);
        assert!((e.zeta / mul.zeta - 1.0).abs() < 1e-12);
        assert!((e.h - rep.h_closure).abs() < 1e-11 * rep.h_closure.abs());
    }

    #[test]
    fn perturbation_lowers_entropy_at_equilibrium() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let s = State6::at_rest(1.0, 1.0, 0.0, &g).unwrap();
        let rep = mep_optimality_probe(&s, &g, &[0.0, 0.01]).unwrap();
        assert!(!rep.inconclusive());
        assert!(rep.entries[1].h < rep.entries[0].h);
        assert!(rep.optimal());
    }

    #[test]
    fn sweep_is_monotone_off_equilibrium() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let s = State6::at_rest(1.0, 1.0, 0.3, &g).unwrap();
        let rep = mep_optimality_probe(&s, &g, &[0.0, 0.001, 0.01, 0.05]).unwrap();
        assert!(!rep.inconclusive());
        assert!(rep.optimal());
        assert!(rep.monotone());
    }

    #[test]
    fn negative_amplitude_rejected() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let s = State6::at_rest(1.0, 1.0, 0.0, &g).unwrap();
        assert!(mep_optimality_probe(&s, &g, &[-0.1]).is_err());
    }
}
