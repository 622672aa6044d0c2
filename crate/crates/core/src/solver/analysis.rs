//! Post-processing of solver output: first-order relaxation limit and
//! grid self-convergence.

use super::run::{run_scenario, Scenario, Snapshot, TimeSeries};
use crate::error::{Et6Error, Result};
use crate::gas::GasSpec;

/// Second differences of `v` larger than this fraction of the first
/// differences mark the data as not smooth.
const SMOOTHNESS_LIMIT: f64 = 0.25;

/// Comparison of `Pi` with the bulk-viscosity law `Pi = -nu dv/dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct NsLimitReport {
    pub t: f64,
    /// `nu` at the mean pressure of the compared cells.
    pub nu_mean: f64,
    /// `max_i |Pi_i - Pi_NS,i| / max_j |Pi_NS,j|`.
    pub max_deviation: f64,
    /// `||Pi - Pi_NS||_2 / ||Pi_NS||_2`.
    pub l2_deviation: f64,
    pub cells_compared: usize,
    /// Ratio of second to first differences of `v`.
    pub smoothness: f64,
    pub reduced_confidence: bool,
}

/// Bulk viscosity `(2/3) ((D - 3) / D) p tau`.
pub fn bulk_viscosity(p: f64, gas: &GasSpec) -> f64 {
    let d = gas.dof();
    2.0 / 3.0 * (d - 3.0) / d * p * gas.tau()
}

/// Compares the last snapshot of `ts` with `-nu dv/dx`, skipping `margin`
/// cells at each end.
pub fn ns_limit_diagnostic(ts: &TimeSeries, margin: usize) -> Result<NsLimitReport> {
    let snap: &Snapshot = ts.last();
    let gas = &ts.gas;
    let n = snap.states.len();
    let lo = margin.max(1);
    let hi = n.saturating_sub(margin.max(1));
    if hi <= lo + 2 {
        return Err(Et6Error::Scenario(format!("margin {margin} leaves no cells out of {n}")));
    }
    let v: Vec<f64> = snap.states.iter().map(|s| s.v[0]).collect();
    let mut pi = Vec::new();
    let mut pi_ns = Vec::new();
    let mut p_sum = 0.0;
    for i in lo..hi {
        let s = &snap.states[i];
        let p = s.pressure(gas);
        let dvdx = (v[i + 1] - v[i - 1]) / (2.0 * ts.dx);
        pi.push(s.pi);
        pi_ns.push(-bulk_viscosity(p, gas) * dvdx);
        p_sum += p;
    }
    let max_ns = pi_ns.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max_dev = pi.iter().zip(&pi_ns).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let l2_ns = pi_ns.iter().map(|x| x * x).sum::<f64>().sqrt();
    let l2_dev = pi.iter().zip(&pi_ns).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();

    let d1 = (1..n).map(|i| (v[i] - v[i - 1]).abs()).fold(0.0f64, f64::max);
    let d2 = (1..n - 1).map(|i| (v[i + 1] - 2.0 * v[i] + v[i - 1]).abs()).fold(0.0f64, f64::max);
    let smoothness = if d1 > 0.0 { d2 / d1 } else { 0.0 };
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a == 0.0 { 0.0 } else { f64::INFINITY };

    Ok(NsLimitReport {
        t: snap.t,
        nu_mean: bulk_viscosity(p_sum / pi.len() as f64, gas),
        max_deviation: ratio(max_dev, max_ns),
        l2_deviation: ratio(l2_dev, l2_ns),
        cells_compared: pi.len(),
        smoothness,
        reduced_confidence: smoothness > SMOOTHNESS_LIMIT || ts.fallback_faces > 0,
    })
}

/// `sum_i |a_i - b_i| dx` over density, velocity and pressure of two
/// snapshots on the same grid.
pub fn l1_difference(a: &Snapshot, b: &Snapshot, dx: f64, gas: &GasSpec) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            (x.rho - y.rho).abs() + (x.v[0] - y.v[0]).abs() + (x.pressure(gas) - y.pressure(gas)).abs()
        })
        .sum::<f64>()
        * dx
}

/// Averages pairs of cells of a fine snapshot onto the grid with half as many cells.
fn restrict_density(fine: &[f64]) -> Vec<f64> {
    fine.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub cells: Vec<usize>,
    /// L1 density difference between consecutive resolutions.
    pub differences: Vec<f64>,
    pub orders: Vec<f64>,
}

/// `log2(e_k / e_{k+1})` for consecutive entries.
pub fn observed_orders(differences: &[f64]) -> Vec<f64> {
    differences.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Runs `make(n)` for each resolution (each twice the previous) and measures
/// the observed order from the density of the final snapshots.
pub fn self_convergence(make: impl Fn(usize) -> Scenario, cells: &[usize]) -> Result<ConvergenceReport> {
    if cells.len() < 3 || cells.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Et6Error::Scenario("need at least three resolutions, each doubling the previous".into()));
    }
    let mut finals = Vec::new();
    for &n in cells {
        let sc = make(n);
        let ts = run_scenario(&sc)?;
        let len = sc.x_right - sc.x_left;
        let rho: Vec<f64> = ts.last().states.iter().map(|s| s.rho).collect();
        finals.push((rho, len / n as f64));
    }
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| {
            let coarse = &w[0].0;
            let fine = restrict_density(&w[1].0);
            coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).sum::<f64>() * w[0].1
        })
        .collect();
    Ok(ConvergenceReport {
        cells: cells.to_vec(),
        orders: observed_orders(&differences),
        differences,
    })
}
