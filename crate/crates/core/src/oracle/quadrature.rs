//! Gaussian quadrature rules and an adaptive Gauss-Kronrod integrator.
//!
//! Nodes are the eigenvalues of the Jacobi matrix of the three-term
//! recurrence, located by Sturm-sequence bisection and polished with Newton
//! steps on the orthonormal polynomial. Weights come from the Christoffel
//! formula `w_j = mu0 / sum_k p_k(x_j)^2`, which is a sum of squares and stays
//! accurate for the tiny weights in the tails. Recurrences are rescaled on the
//! fly so that high orders (1024 Laguerre nodes) neither overflow nor lose the
//! tail weights to cancellation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

use crate::error::{Et6Error, Result};

/// Nodes and weights of an `n`-point rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_j w_j g(x_j)` with pairwise summation.
    pub fn apply(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).collect();
        pairwise_sum(&terms)
    }
}

/// Sum in a fixed pairwise order; deterministic and `O(log n)` error growth.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Recurrence coefficients of the orthonormal polynomials.
struct Jacobi {
    diag: Vec<f64>,
    /// `off[k]` couples rows `k` and `k + 1`; one extra entry gives `p_n`.
    off: Vec<f64>,
    ln_mu0: f64,
}

impl Jacobi {
    fn hermite(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: (1..=n).map(|k| (k as f64 / 2.0).sqrt()).collect(),
            ln_mu0: 0.5 * std::f64::consts::PI.ln(),
        }
    }

    fn laguerre(n: usize, alpha: f64) -> Self {
        Self {
            diag: (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect(),
            off: (1..=n).map(|k| (k as f64 * (k as f64 + alpha)).sqrt()).collect(),
            ln_mu0: ln_gamma(alpha + 1.0),
        }
    }

    fn legendre(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: (1..=n)
                .map(|k| {
                    let k = k as f64;
                    k / (4.0 * k * k - 1.0).sqrt()
                })
                .collect(),
            ln_mu0: 2f64.ln(),
        }
    }

    fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.n() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = (self.diag[i] - x) - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::MIN_POSITIVE.sqrt();
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue by bisection.
    fn eigenvalue(&self, k: usize, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.sturm_count(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
            if (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
        }
        0.5 * (a + b)
    }

    /// Ratio `p_n(x) / p_n'(x)` for the Newton step.
    fn newton_ratio(&self, x: f64) -> f64 {
        let (mut pm1, mut p, mut dpm1, mut dp) = (0.0, 1.0, 0.0, 0.0);
        for k in 0..self.n() {
            let bk = if k == 0 { 0.0 } else { self.off[k - 1] };
            let t = x - self.diag[k];
            let pn = (t * p - bk * pm1) / self.off[k];
            let dpn = (p + t * dp - bk * dpm1) / self.off[k];
            pm1 = p;
            p = pn;
            dpm1 = dp;
            dp = dpn;
            let big = p.abs().max(dp.abs());
            if big > 1e100 {
                pm1 /= big;
                p /= big;
                dpm1 /= big;
                dp /= big;
            }
        }
        p / dp
    }

    /// Christoffel weight at node `x`.
    fn weight(&self, x: f64) -> f64 {
        let (mut pm1, mut p) = (0.0, 1.0);
        let mut sum = 1.0;
        let mut ln_scale = 0.0;
        for k in 0..self.n() - 1 {
            let bk = if k == 0 { 0.0 } else { self.off[k - 1] };
            let pn = ((x - self.diag[k]) * p - bk * pm1) / self.off[k];
            pm1 = p;
            p = pn;
            sum += p * p;
            if p.abs() > 1e100 {
                pm1 *= 1e-100;
                p *= 1e-100;
                sum *= 1e-200;
                ln_scale += 100.0 * std::f64::consts::LN_10;
            }
        }
        (self.ln_mu0 - sum.ln() - 2.0 * ln_scale).exp()
    }

    fn rule(&self) -> GaussRule {
        let n = self.n();
        let (lo, hi) = self.gershgorin();
        let mut nodes = Vec::with_capacity(n);
        for k in 0..n {
            let mut x = self.eigenvalue(k, lo, hi);
            for _ in 0..3 {
                let step = self.newton_ratio(x);
                if !step.is_finite() || step.abs() > 1e-6 * (1.0 + x.abs()) {
                    break;
                }
                x -= step;
                if step.abs() <= f64::EPSILON * x.abs() {
                    break;
                }
            }
            nodes.push(x);
        }
        let weights = nodes.iter().map(|&x| self.weight(x)).collect();
        GaussRule { nodes, weights }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RuleKey {
    Hermite(usize),
    Laguerre(usize, u64),
    Legendre(usize),
}

fn cached(key: RuleKey, build: impl FnOnce() -> GaussRule) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build());
    cache
        .lock()
        .expect("rule cache poisoned")
        .entry(key)
        .or_insert(rule)
        .clone()
}

/// Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
pub fn gauss_hermite(n: usize) -> Arc<GaussRule> {
    cached(RuleKey::Hermite(n), || Jacobi::hermite(n).rule())
}

/// Generalized Gauss-Laguerre rule for the weight `x^alpha exp(-x)` on `[0, inf)`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Arc<GaussRule> {
    assert!(alpha > -1.0, "Laguerre exponent must exceed -1");
    cached(RuleKey::Laguerre(n, alpha.to_bits()), || Jacobi::laguerre(n, alpha).rule())
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    cached(RuleKey::Legendre(n), || Jacobi::legendre(n).rule())
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, (kron - gauss).abs() * h)
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The piece with the largest Kronrod-Gauss difference is bisected until the
/// summed difference is below `abs_tol` (or below rounding of the total).
pub fn adaptive_gk(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    const MAX_PIECES: usize = 20_000;
    let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (val, err) = gk15(&mut f, a, b);
    pieces.push((a, b, val, err));
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        let total: f64 = pieces.iter().map(|p| p.2.abs()).sum();
        if total_err <= abs_tol.max(8.0 * f64::EPSILON * total) {
            break;
        }
        let (worst, &(lo, hi, _, err)) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let mid = 0.5 * (lo + hi);
        if pieces.len() >= MAX_PIECES || !(mid > lo && mid < hi) || !err.is_finite() {
            return Err(Et6Error::Oracle(format!(
                "adaptive quadrature did not converge on [{a:.6e}, {b:.6e}] (error estimate {total_err:.3e})"
            )));
        }
        let (vl, el) = gk15(&mut f, lo, mid);
        let (vr, er) = gk15(&mut f, mid, hi);
        pieces[worst] = (lo, mid, vl, el);
        pieces.push((mid, hi, vr, er));
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = pieces.iter().map(|p| p.2).collect();
    Ok(pairwise_sum(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn double_factorial_odd(k: u32) -> f64 {
        (1..=k).step_by(2).map(f64::from).product()
    }

    #[test]
    fn hermite_integrates_gaussian_moments() {
        let rule = gauss_hermite(64);
        assert_eq!(rule.len(), 64);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        for k in 0..=20u32 {
            let got = rule.apply(|x| x.powi(k as i32));
            let exact = if k % 2 == 1 {
                0.0
            } else {
                sqrt_pi * double_factorial_odd(k.saturating_sub(1)) / 2f64.powi(k as i32 / 2)
            };
            let scale = rule.apply(|x| x.abs().powi(k as i32));
            assert!((got - exact).abs() <= 1e-13 * scale, "k = {k}: {got} vs {exact}");
        }
        for (x, y) in rule.nodes.iter().zip(rule.nodes.iter().rev()) {
            assert!((x + y).abs() < 1e-13);
        }
    }

    #[test]
    fn laguerre_integrates_gamma_moments() {
        for &alpha in &[-0.75, -0.5, 0.0, 0.5, 1.0, 3.5] {
            for &n in &[8usize, 128] {
                let rule = gauss_laguerre(n, alpha);
                for k in 0..8 {
                    let got = rule.apply(|x| x.powi(k));
                    let exact = ln_gamma(alpha + 1.0 + k as f64).exp();
                    assert_relative_eq!(got, exact, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn laguerre_near_minus_one_and_high_order() {
        let alpha = -1.0 + 5e-7;
        let rule = gauss_laguerre(64, alpha);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), ln_gamma(alpha + 1.0).exp(), max_relative = 1e-12);
        assert_relative_eq!(rule.apply(|x| x), (alpha + 1.0) * ln_gamma(alpha + 1.0).exp(), max_relative = 1e-12);

        let rule = gauss_laguerre(1024, 0.5);
        assert!(rule.weights.iter().all(|w| w.is_finite() && *w >= 0.0));
        assert_relative_eq!(rule.apply(|x| x * x), ln_gamma(3.5).exp(), max_relative = 1e-11);
    }

    #[test]
    fn legendre_is_exact_for_polynomials() {
        let rule = gauss_legendre(10);
        for k in 0..20 {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((rule.apply(|x| x.powi(k)) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2
        let got = adaptive_gk(|x| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, 1e-10).unwrap();
        assert!((got - 2.0).abs() < 1e-8);
        let got = adaptive_gk(|x| (-x * x).exp(), -13.0, 13.0, 1e-13).unwrap();
        assert_relative_eq!(got, std::f64::consts::PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn pairwise_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..100).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 4950.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
