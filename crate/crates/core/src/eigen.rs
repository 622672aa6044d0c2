//! Characteristic structure of the six-field system.
//!
//! The normal flux depends on the conserved densities only through
//! `rho`, `m = F_i`, `S = F_ll`, `E = G_ll`, `q = |m|^2 / rho` and
//! `P = (S - q) / 3 = p + Pi`, which makes the Jacobian short to write down
//! and independent of `D`. Eigenpairs are computed numerically on a
//! diagonally scaled matrix; the four-fold contact eigenspace is expressed in
//! a fixed primitive basis by projection.

use std::fmt;

use nalgebra::{DMatrix, Matrix6, SVector, Schur, SymmetricEigen};

use crate::closure::{closed_fluxes, conserved_scales, entropy_of_conserved, main_field};
use crate::error::{Et6Error, Result};
use crate::gas::{
    admissibility, primitive_from_conserved, Conserved6, GasSpec, State6, IDX_F, IDX_FLL, IDX_FX, IDX_GLL, NVARS,
};

type Vec6 = SVector<f64, NVARS>;

/// `|Im lambda|` above this fraction of the wave-speed scale is a loss of hyperbolicity.
pub const HYPERBOLICITY_TOL: f64 = 1e-7;
/// Iteration cap of the real Schur decomposition.
const SCHUR_MAX_ITER: usize = 10_000;
/// Eigenvalues closer than this fraction of the speed scale form one cluster.
const CLUSTER_TOL: f64 = 1e-6;
/// `|dPi| > K_TOL * p` counts as outside the null space of the production.
pub const K_TOL: f64 = 1e-10;
/// Passing vectors with `|dPi| < MARGINAL_TOL * p` are flagged as marginal.
pub const MARGINAL_TOL: f64 = 1e-4;
/// Gradient tolerance of the convexity check.
pub const GRADIENT_TOL: f64 = 1e-6;

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn check_direction(n: [f64; 3]) -> Result<()> {
    let norm = dot(n, n).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Et6Error::Domain(format!("direction must be a unit vector (|n| = {norm})")));
    }
    Ok(())
}

/// Two unit vectors completing `n` to an orthonormal triad.
pub fn tangent_basis(n: [f64; 3]) -> [[f64; 3]; 2] {
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .expect("three axes");
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let proj = dot(e, n);
    let t1 = [0, 1, 2].map(|i| e[i] - proj * n[i]);
    let norm = dot(t1, t1).sqrt();
    let t1 = t1.map(|c| c / norm);
    let t2 = [
        n[1] * t1[2] - n[2] * t1[1],
        n[2] * t1[0] - n[0] * t1[2],
        n[0] * t1[1] - n[1] * t1[0],
    ];
    [t1, t2]
}

/// Normal flux written directly in conserved variables.
pub fn physical_flux(u: &Conserved6, n: [f64; 3], gas: &GasSpec) -> Result<[f64; NVARS]> {
    check_direction(n)?;
    primitive_from_conserved(u, gas)?;
    let rho = u.f;
    let m = u.f_i;
    let w = dot(m, n) / rho;
    let q = dot(m, m) / rho;
    let pp = (u.f_ll - q) / 3.0;
    Ok([
        rho * w,
        m[0] * w + pp * n[0],
        m[1] * w + pp * n[1],
        m[2] * w + pp * n[2],
        (5.0 * u.f_ll - 2.0 * q) / 3.0 * w,
        (u.g_ll + 2.0 * (u.f_ll - q) / 3.0) * w,
    ])
}

/// `d(F^k n_k) / du`, assembled analytically.
pub fn flux_jacobian(u: &Conserved6, n: [f64; 3], gas: &GasSpec) -> Result<Matrix6<f64>> {
    check_direction(n)?;
    primitive_from_conserved(u, gas)?;
    let rho = u.f;
    let v = u.f_i.map(|m| m / rho);
    let w = dot(v, n);
    let v2 = dot(v, v);
    let q = rho * v2;
    let s_flux = (5.0 * u.f_ll - 2.0 * q) / 3.0;
    let e_flux = u.g_ll + 2.0 * (u.f_ll - q) / 3.0;

    let mut a = Matrix6::zeros();
    for k in 0..3 {
        a[(IDX_F, IDX_FX + k)] = n[k];
    }
    for i in 0..3 {
        let row = IDX_FX + i;
        a[(row, IDX_F)] = -v[i] * w + n[i] * v2 / 3.0;
        for k in 0..3 {
            let delta = if i == k { w } else { 0.0 };
            a[(row, IDX_FX + k)] = delta + v[i] * n[k] - 2.0 / 3.0 * n[i] * v[k];
        }
        a[(row, IDX_FLL)] = n[i] / 3.0;
    }
    a[(IDX_FLL, IDX_F)] = 2.0 / 3.0 * v2 * w - s_flux * w / rho;
    a[(IDX_GLL, IDX_F)] = 2.0 / 3.0 * v2 * w - e_flux * w / rho;
    for k in 0..3 {
        a[(IDX_FLL, IDX_FX + k)] = -4.0 / 3.0 * v[k] * w + s_flux * n[k] / rho;
        a[(IDX_GLL, IDX_FX + k)] = -4.0 / 3.0 * v[k] * w + e_flux * n[k] / rho;
    }
    a[(IDX_FLL, IDX_FLL)] = 5.0 * w / 3.0;
    a[(IDX_GLL, IDX_FLL)] = 2.0 * w / 3.0;
    a[(IDX_GLL, IDX_GLL)] = w;
    Ok(a)
}

/// Jacobian of the closed normal flux by central differences, going through
/// the primitive variables and the closure.
pub fn flux_jacobian_fd(u: &Conserved6, n: [f64; 3], gas: &GasSpec) -> Result<Matrix6<f64>> {
    check_direction(n)?;
    let s = primitive_from_conserved(u, gas)?;
    let scales = conserved_scales(&s, gas);
    let base = u.to_array();
    let flux = |arr: [f64; NVARS]| -> Result<[f64; NVARS]> {
        let st = primitive_from_conserved(&Conserved6::from_array(arr), gas)?;
        Ok(closed_fluxes(&st, gas).normal_flux(st.rho, st.v, n))
    };
    let mut a = Matrix6::zeros();
    for j in 0..NVARS {
        let h = 1e-5 * scales[j];
        let mut plus = base;
        let mut minus = base;
        plus[j] += h;
        minus[j] -= h;
        let (fp, fm) = (flux(plus)?, flux(minus)?);
        for i in 0..NVARS {
            a[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(a)
}

/// `dPi / du`.
pub fn dynamic_pressure_gradient(u: &Conserved6, gas: &GasSpec) -> [f64; NVARS] {
    let rho = u.f;
    let v = u.f_i.map(|m| m / rho);
    let v2 = dot(v, v);
    let d = gas.dof();
    let mut g = [0.0; NVARS];
    g[IDX_F] = v2 / 3.0 - v2 / d;
    for k in 0..3 {
        g[IDX_FX + k] = -2.0 * v[k] / 3.0 + 2.0 * v[k] / d;
    }
    g[IDX_FLL] = 1.0 / 3.0;
    g[IDX_GLL] = -1.0 / d;
    g
}

/// Jacobian of the production vector; only the `F_ll` row is nonzero.
pub fn production_jacobian(u: &Conserved6, gas: &GasSpec) -> Matrix6<f64> {
    let g = dynamic_pressure_gradient(u, gas);
    let mut j = Matrix6::zeros();
    for k in 0..NVARS {
        j[(IDX_FLL, k)] = -3.0 / gas.tau() * g[k];
    }
    j
}

/// Conserved jump produced by a primitive jump `(drho, dv, dp, dPi)`.
pub fn conserved_jump(s: &State6, drho: f64, dv: [f64; 3], dp: f64, dpi: f64, gas: &GasSpec) -> [f64; NVARS] {
    let v2 = s.speed_squared();
    let vdv = dot(s.v, dv);
    let mut du = [0.0; NVARS];
    du[IDX_F] = drho;
    for k in 0..3 {
        du[IDX_FX + k] = s.v[k] * drho + s.rho * dv[k];
    }
    du[IDX_FLL] = v2 * drho + 2.0 * s.rho * vdv + 3.0 * (dp + dpi);
    du[IDX_GLL] = v2 * drho + 2.0 * s.rho * vdv + gas.dof() * dp;
    du
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveTag {
    Contact,
    Sound,
    Other,
}

impl fmt::Display for WaveTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveTag::Contact => "contact",
            WaveTag::Sound => "sound",
            WaveTag::Other => "other",
        })
    }
}

/// Labels of the wave-fan columns, in ascending speed order.
pub const WAVE_LABELS: [&str; NVARS] = [
    "sound-",
    "contact:density",
    "contact:shear-1",
    "contact:shear-2",
    "contact:pressure",
    "sound+",
];

/// Eigenvalues and right eigenvectors of the normal flux Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFan {
    pub n: [f64; 3],
    /// Ascending.
    pub speeds: [f64; NVARS],
    /// Right eigenvectors in conserved variables, one per speed, scaled to
    /// unit density jump when that component is nonzero and to unit norm
    /// otherwise.
    pub vectors: [[f64; NVARS]; NVARS],
    pub tags: [WaveTag; NVARS],
    /// Largest `|Im lambda|` of the numerical eigenvalues.
    pub max_imag: f64,
    /// Relative distance of the primitive contact basis from the numerical
    /// contact eigenspace.
    pub contact_residual: f64,
}

fn normalize(mut r: [f64; NVARS], scales: &[f64; NVARS]) -> [f64; NVARS] {
    let scaled_norm = (0..NVARS).map(|k| (r[k] / scales[k]).powi(2)).sum::<f64>().sqrt();
    let density = r[IDX_F] / scales[IDX_F];
    if density.abs() > 1e-9 * scaled_norm {
        let d = r[IDX_F];
        r.iter_mut().for_each(|c| *c /= d);
    } else {
        let norm = r.iter().map(|c| c * c).sum::<f64>().sqrt();
        r.iter_mut().for_each(|c| *c /= norm);
    }
    r
}

/// Orthonormal basis (in scaled coordinates) of the approximate null space
/// of `a_hat - lambda I`, of dimension `dim`.
fn eigenspace(a_hat: &Matrix6<f64>, lambda: f64, dim: usize) -> Vec<Vec6> {
    let shifted = a_hat - Matrix6::identity() * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..NVARS).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    order[..dim].iter().map(|&k| v_t.row(k).transpose()).collect()
}

/// Eigendecomposition of the normal flux Jacobian.
pub fn wave_fan(u: &Conserved6, n: [f64; 3], gas: &GasSpec) -> Result<WaveFan> {
    let s = primitive_from_conserved(u, gas)?;
    let a = flux_jacobian(u, n, gas)?;
    let scales = conserved_scales(&s, gas);
    let sc = Vec6::from_column_slice(&scales);
    // a_hat = S^{-1} A S
    let a_hat = Matrix6::from_fn(|i, j| a[(i, j)] * scales[j] / scales[i]);

    let w = dot(s.v, n);
    let speed_scale = w.abs() + (s.pressure(gas) / s.rho).sqrt();
    // Shifting by v_n centres the contact cluster on zero.
    let shifted = a_hat - Matrix6::identity() * w;
    let eig = Schur::try_new(shifted, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Et6Error::Domain("Schur iteration did not converge".into()))?
        .complex_eigenvalues()
        .map(|z| z + w);
    let max_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > HYPERBOLICITY_TOL * speed_scale {
        let adm = admissibility(&s, gas);
        return Err(Et6Error::HyperbolicityLoss {
            max_imag,
            margin: adm.lower_margin.min(adm.upper_margin),
        });
    }
    let mut speeds: Vec<f64> = eig.iter().map(|z| z.re).collect();
    speeds.sort_by(f64::total_cmp);

    let is_contact = |lam: f64| (lam - w).abs() <= CLUSTER_TOL * speed_scale;
    let n_contact = speeds.iter().filter(|&&l| is_contact(l)).count();
    let mut tags = [WaveTag::Other; NVARS];
    let mut vectors = [[0.0; NVARS]; NVARS];
    let mut contact_residual = f64::NAN;

    let to_conserved = |r_hat: &Vec6| -> [f64; NVARS] { std::array::from_fn(|k| r_hat[k] * sc[k]) };

    if n_contact == 4 && !is_contact(speeds[0]) && !is_contact(speeds[5]) {
        let lam_c = speeds[1..5].iter().sum::<f64>() / 4.0;
        let basis = eigenspace(&a_hat, lam_c, 4);
        let [t1, t2] = tangent_basis(n);
        let canonical = [
            conserved_jump(&s, 1.0, [0.0; 3], 0.0, 0.0, gas),
            conserved_jump(&s, 0.0, t1, 0.0, 0.0, gas),
            conserved_jump(&s, 0.0, t2, 0.0, 0.0, gas),
            conserved_jump(&s, 0.0, [0.0; 3], 1.0, -1.0, gas),
        ];
        let mut worst: f64 = 0.0;
        for (slot, d) in canonical.iter().enumerate() {
            let d_hat = Vec6::from_fn(|k, _| d[k] / scales[k]);
            let proj = basis.iter().fold(Vec6::zeros(), |acc, q| acc + q * q.dot(&d_hat));
            worst = worst.max((d_hat - proj).norm() / d_hat.norm());
            vectors[slot + 1] = normalize(to_conserved(&proj), &scales);
            tags[slot + 1] = WaveTag::Contact;
            speeds[slot + 1] = lam_c;
        }
        contact_residual = worst;
        for slot in [0, 5] {
            let r_hat = eigenspace(&a_hat, speeds[slot], 1)[0];
            vectors[slot] = normalize(to_conserved(&r_hat), &scales);
            tags[slot] = WaveTag::Sound;
        }
    } else {
        log::warn!("unexpected eigenvalue structure ({n_contact} contact speeds)");
        for slot in 0..NVARS {
            let r_hat = eigenspace(&a_hat, speeds[slot], 1)[0];
            vectors[slot] = normalize(to_conserved(&r_hat), &scales);
        }
    }

    Ok(WaveFan {
        n,
        speeds: speeds.try_into().expect("six eigenvalues"),
        vectors,
        tags,
        max_imag,
        contact_residual,
    })
}

/// Closed-form speeds `{v_n (x4), v_n +- sqrt(5 (p + Pi) / (3 rho))}`.
pub fn analytic_speeds(s: &State6, n: [f64; 3], gas: &GasSpec) -> [f64; NVARS] {
    let w = dot(s.v, n);
    let c = (5.0 * (s.pressure(gas) + s.pi) / (3.0 * s.rho)).sqrt();
    [w - c, w, w, w, w, w + c]
}

/// Sound speed of the equilibrium (Euler) subsystem.
pub fn euler_sound_speed(rho: f64, p: f64, gas: &GasSpec) -> f64 {
    let d = gas.dof();
    ((d + 2.0) / d * p / rho).sqrt()
}

/// Jump amplitudes carried by an acceleration wave on one sound branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelerationWave {
    /// Speed relative to the fluid, `V`.
    pub relative_speed: f64,
    pub speed: f64,
    pub d_rho: f64,
    pub d_v: [f64; 3],
    pub d_eps: f64,
    pub d_pi: f64,
    /// Implied conserved jump.
    pub jump: [f64; NVARS],
}

fn require_equilibrium(s: &State6, gas: &GasSpec) -> Result<()> {
    let p = s.pressure(gas);
    if s.pi.abs() > 1e-12 * p {
        return Err(Et6Error::Domain(format!(
            "state is not on the equilibrium manifold (Pi/p = {:e})",
            s.pi / p
        )));
    }
    Ok(())
}

/// Amplitudes on the `[-, +]` sound branches at an equilibrium state.
pub fn acceleration_wave(u_eq: &Conserved6, n: [f64; 3], delta_rho: f64, gas: &GasSpec) -> Result<[AccelerationWave; 2]> {
    check_direction(n)?;
    let s = primitive_from_conserved(u_eq, gas)?;
    require_equilibrium(&s, gas)?;
    let d = gas.dof();
    let eps = s.internal_energy(gas);
    let c = (5.0 / 3.0 * s.pressure(gas) / s.rho).sqrt();
    let w = dot(s.v, n);
    let d_eps = 2.0 / d * eps / s.rho * delta_rho;
    let d_pi = 4.0 / (3.0 * d * d) * (d - 3.0) * eps * delta_rho;
    // p = (2/D) rho eps
    let d_p = 2.0 / d * (eps * delta_rho + s.rho * d_eps);
    Ok([-c, c].map(|rel| {
        let d_v = n.map(|nk| nk * rel * delta_rho / s.rho);
        AccelerationWave {
            relative_speed: rel,
            speed: w + rel,
            d_rho: delta_rho,
            d_v,
            d_eps,
            d_pi,
            jump: conserved_jump(&s, delta_rho, d_v, d_p, d_pi, gas),
        }
    }))
}

/// `1 - |cos|` between two vectors after scaling each component.
pub fn misalignment(a: &[f64; NVARS], b: &[f64; NVARS], scales: &[f64; NVARS]) -> f64 {
    let a = Vec6::from_fn(|k, _| a[k] / scales[k]);
    let b = Vec6::from_fn(|k, _| b[k] / scales[k]);
    1.0 - (a.dot(&b) / (a.norm() * b.norm())).abs()
}

/// Production check for one eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct KVector {
    pub label: &'static str,
    pub tag: WaveTag,
    pub speed: f64,
    /// `dPi` implied by the eigenvector.
    pub delta_pi: f64,
    /// Production Jacobian applied to the eigenvector.
    pub production: [f64; NVARS],
    pub pass: bool,
    pub marginal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KConditionReport {
    pub vectors: Vec<KVector>,
    /// Every listed eigenvector lies outside the null space of the production.
    pub overall_pass: bool,
    /// The sound (genuinely nonlinear) eigenvectors pass.
    pub weak_pass: bool,
    /// Some passing eigenvector does so only by a small margin.
    pub marginal: bool,
    /// Dimension of the intersection of the eigenspaces with the null space
    /// of the production Jacobian; zero when the coupling condition holds.
    pub null_dim: usize,
    pub tolerance: f64,
}

impl KConditionReport {
    pub fn failing(&self) -> Vec<&'static str> {
        self.vectors.iter().filter(|v| !v.pass).map(|v| v.label).collect()
    }
}

/// Coupling between the characteristic fields and the BGK production at an
/// equilibrium state.
pub fn k_condition(u_eq: &Conserved6, n: [f64; 3], gas: &GasSpec) -> Result<KConditionReport> {
    let s = primitive_from_conserved(u_eq, gas)?;
    require_equilibrium(&s, gas)?;
    let fan = wave_fan(u_eq, n, gas)?;
    let grad = dynamic_pressure_gradient(u_eq, gas);
    let jac = production_jacobian(u_eq, gas);
    let p = s.pressure(gas);

    let vectors: Vec<KVector> = (0..NVARS)
        .map(|k| {
            let r = fan.vectors[k];
            let delta_pi: f64 = (0..NVARS).map(|j| grad[j] * r[j]).sum();
            let prod = jac * Vec6::from_column_slice(&r);
            let pass = delta_pi.abs() > K_TOL * p;
            KVector {
                label: WAVE_LABELS[k],
                tag: fan.tags[k],
                speed: fan.speeds[k],
                delta_pi,
                production: std::array::from_fn(|j| prod[j]),
                pass,
                marginal: pass && delta_pi.abs() < MARGINAL_TOL * p,
            }
        })
        .collect();

    // Rank of grad(Pi) restricted to each eigenspace.
    let scales = conserved_scales(&s, gas);
    let mut null_dim = 0;
    for group in [&[0usize][..], &[1, 2, 3, 4][..], &[5][..]] {
        let block = DMatrix::from_fn(1, group.len(), |_, c| {
            let r = fan.vectors[group[c]];
            let norm = (0..NVARS).map(|j| (r[j] / scales[j]).powi(2)).sum::<f64>().sqrt();
            (0..NVARS).map(|j| grad[j] * r[j]).sum::<f64>() / (p * norm)
        });
        let rank = block.rank(K_TOL);
        null_dim += group.len() - rank;
    }

    let weak_pass = vectors.iter().filter(|v| v.tag == WaveTag::Sound).all(|v| v.pass);
    Ok(KConditionReport {
        overall_pass: vectors.iter().all(|v| v.pass),
        weak_pass,
        marginal: vectors.iter().any(|v| v.marginal),
        null_dim,
        vectors,
        tolerance: K_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    /// Largest deviation of the numerical gradient from the main field,
    /// relative to the largest scaled main-field component.
    pub gradient_mismatch: f64,
    /// Eigenvalue range of the Hessian of `h(u)` on the scaled basis.
    pub max_hessian_eigenvalue: f64,
    pub min_hessian_eigenvalue: f64,
    pub gradient_pass: bool,
    pub hessian_pass: bool,
    /// The finite-difference step had to be shrunk to stay inside the
    /// admissibility window.
    pub reduced_confidence: bool,
}

impl ConvexityReport {
    pub fn pass(&self) -> bool {
        self.gradient_pass && self.hessian_pass
    }
}

/// Largest step (relative to the scales) keeping every probe admissible.
fn admissible_step(base: &[f64; NVARS], scales: &[f64; NVARS], start: f64, gas: &GasSpec) -> f64 {
    let mut step = start;
    while step > 1e-9 {
        let ok = (0..NVARS).all(|j| {
            [-1.0, 1.0].iter().all(|&sign| {
                let mut arr = *base;
                arr[j] += sign * step * scales[j];
                primitive_from_conserved(&Conserved6::from_array(arr), gas).is_ok()
            })
        });
        if ok {
            return step;
        }
        step *= 0.5;
    }
    step
}

/// Gradient identity `dh/du = main field` and concavity of `h(u)`.
pub fn convexity_check(u: &Conserved6, gas: &GasSpec) -> Result<ConvexityReport> {
    const START: f64 = 1e-3;
    let s = primitive_from_conserved(u, gas)?;
    let scales = conserved_scales(&s, gas);
    let base = u.to_array();
    // Keep the probes well inside the window, where k(Z) is singular.
    let adm = admissibility(&s, gas);
    let margin = adm.lower_margin.min(adm.upper_margin);
    let start = START * (margin / 0.1).min(1.0);
    let step = admissible_step(&base, &scales, start, gas);
    let reduced_confidence = step < START / 16.0;

    let h_at = |arr: [f64; NVARS]| entropy_of_conserved(&Conserved6::from_array(arr), gas);
    let mf_at = |arr: [f64; NVARS]| -> Result<[f64; NVARS]> {
        Ok(main_field(&primitive_from_conserved(&Conserved6::from_array(arr), gas)?, gas)?.to_array())
    };
    let central = |j: usize, rel: f64| -> Result<f64> {
        let h = rel * scales[j];
        let mut plus = base;
        let mut minus = base;
        plus[j] += h;
        minus[j] -= h;
        Ok((h_at(plus)? - h_at(minus)?) / (2.0 * h))
    };

    let field = main_field(&s, gas)?.to_array();
    let field_scale = (0..NVARS).map(|j| (field[j] * scales[j]).abs()).fold(0.0, f64::max);
    let mut mismatch: f64 = 0.0;
    for j in 0..NVARS {
        // Richardson extrapolation of two central differences.
        let coarse = central(j, step)?;
        let fine = central(j, 0.5 * step)?;
        let grad = (4.0 * fine - coarse) / 3.0;
        mismatch = mismatch.max((grad - field[j]).abs() * scales[j] / field_scale);
    }

    let hessian = |rel: f64| -> Result<DMatrix<f64>> {
        let mut hess = DMatrix::zeros(NVARS, NVARS);
        for k in 0..NVARS {
            let h = rel * scales[k];
            let mut plus = base;
            let mut minus = base;
            plus[k] += h;
            minus[k] -= h;
            let (fp, fm) = (mf_at(plus)?, mf_at(minus)?);
            for j in 0..NVARS {
                hess[(j, k)] = (fp[j] - fm[j]) / (2.0 * h) * scales[j] * scales[k];
            }
        }
        Ok(hess)
    };
    let hess = (hessian(0.5 * step)? * 4.0 - hessian(step)?) / 3.0;
    let sym = (&hess + hess.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let max_eig = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(ConvexityReport {
        gradient_mismatch: mismatch,
        max_hessian_eigenvalue: max_eig,
        min_hessian_eigenvalue: min_eig,
        gradient_pass: mismatch <= GRADIENT_TOL,
        hessian_pass: max_eig < 0.0,
        reduced_confidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::conserved_from_primitive;
    use approx::assert_relative_eq;

    const NX: [f64; 3] = [1.0, 0.0, 0.0];

    fn cons(rho: f64, v: [f64; 3], p: f64, pi: f64, g: &GasSpec) -> Conserved6 {
        conserved_from_primitive(&State6::from_pressure(rho, v, p, pi, g).unwrap(), g)
    }

    #[test]
    fn physical_flux_matches_closure() {
        let g = GasSpec::with_dof(6.0).unwrap();
        let s = State6::from_pressure(1.3, [0.4, -0.2, 0.7], 0.9, 0.15, &g).unwrap();
        let u = conserved_from_primitive(&s, &g);
        let n = [0.6, 0.0, 0.8];
        let a = physical_flux(&u, n, &g).unwrap();
        let b = closed_fluxes(&s, &g).normal_flux(s.rho, s.v, n);
        for k in 0..NVARS {
            assert_relative_eq!(a[k], b[k], max_relative = 1e-14, epsilon = 1e-15);
        }
    }

    #[test]
    fn jacobian_at_rest_decouples_tangential_momenta() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let a = flux_jacobian(&cons(1.0, [0.0; 3], 1.0, 0.0, &g), NX, &g).unwrap();
        for k in 0..NVARS {
            assert_eq!(a[(IDX_FX + 1, k)], 0.0);
            assert_eq!(a[(IDX_FX + 2, k)], 0.0);
        }
        assert_eq!(a.trace(), 0.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = GasSpec::with_dof(7.0).unwrap();
        let u = cons(0.8, [0.3, 0.5, -0.4], 1.7, -0.6, &g);
        for n in [NX, [0.0, 0.6, 0.8]] {
            let a = flux_jacobian(&u, n, &g).unwrap();
            let b = flux_jacobian_fd(&u, n, &g).unwrap();
            let scale = a.abs().max();
            assert!((a - b).abs().max() < 1e-7 * scale, "{}", (a - b).abs().max());
        }
    }

    #[test]
    fn equilibrium_fan() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let u = cons(1.0, [0.0; 3], 1.0, 0.0, &g);
        let fan = wave_fan(&u, NX, &g).unwrap();
        let c = (5.0f64 / 3.0).sqrt();
        assert!((c - 1.290_994_4).abs() < 1e-7);
        let expect = [-c, 0.0, 0.0, 0.0, 0.0, c];
        for k in 0..NVARS {
            assert!((fan.speeds[k] - expect[k]).abs() < 1e-10 * c);
        }
        assert!(fan.contact_residual < 1e-10);
        assert_eq!(fan.tags[0], WaveTag::Sound);
        assert_eq!(fan.tags[3], WaveTag::Contact);
        let trace = flux_jacobian(&u, NX, &g).unwrap().trace();
        assert!((fan.speeds.iter().sum::<f64>() - trace).abs() < 1e-10);
        // Each vector is a right eigenvector.
        let a = flux_jacobian(&u, NX, &g).unwrap();
        for k in 0..NVARS {
            let r = Vec6::from_column_slice(&fan.vectors[k]);
            assert!((a * r - r * fan.speeds[k]).norm() < 1e-9 * r.norm());
        }
    }

    #[test]
    fn sound_speed_does_not_depend_on_dof() {
        for dof in [4.0, 5.0, 7.0, 12.0] {
            let g = GasSpec::with_dof(dof).unwrap();
            let fan = wave_fan(&cons(1.0, [0.0; 3], 1.0, 0.0, &g), NX, &g).unwrap();
            assert!((fan.speeds[5] - (5.0f64 / 3.0).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn nonequilibrium_speeds_are_real() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let u = cons(1.0, [0.0; 3], 1.0, 0.3, &g);
        let fan = wave_fan(&u, NX, &g).unwrap();
        let c = (5.0f64 * 1.3 / 3.0).sqrt();
        assert!((fan.speeds[5] - c).abs() < 1e-10);
        assert!(fan.contact_residual < 1e-10);
    }

    #[test]
    fn galilean_shift() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let n = [0.0, 0.6, 0.8];
        let rest = wave_fan(&cons(1.2, [0.0; 3], 0.7, -0.2, &g), n, &g).unwrap();
        let v = [0.3, 1.1, -0.4];
        let moving = wave_fan(&cons(1.2, v, 0.7, -0.2, &g), n, &g).unwrap();
        let vn = dot(v, n);
        for k in 0..NVARS {
            assert!((moving.speeds[k] - rest.speeds[k] - vn).abs() < 1e-10);
        }
    }

    #[test]
    fn subcharacteristic() {
        for dof in [3.0 + 1e-6, 3.5, 5.0, 9.0] {
            let g = GasSpec::with_dof(dof).unwrap();
            let euler = euler_sound_speed(1.0, 1.0, &g);
            assert!(euler <= (5.0f64 / 3.0).sqrt() + 1e-15);
        }
    }

    #[test]
    fn acceleration_wave_amplitudes() {
        let g = GasSpec::with_dof(5.0).unwrap();
        // eps = 2.5 at rho = p = 1
        let u = cons(1.0, [0.0; 3], 1.0, 0.0, &g);
        let [minus, plus] = acceleration_wave(&u, NX, 1.0, &g).unwrap();
        assert!((plus.d_pi - 4.0 / 15.0).abs() < 1e-15);
        assert!((plus.d_eps - 1.0).abs() < 1e-15);
        assert_eq!(minus.d_v[0], -plus.d_v[0]);

        let zero = acceleration_wave(&u, NX, 0.0, &g).unwrap();
        assert!(zero.iter().all(|w| w.d_pi == 0.0 && w.d_eps == 0.0 && w.jump.iter().all(|c| *c == 0.0)));

        let s = primitive_from_conserved(&u, &g).unwrap();
        let scales = conserved_scales(&s, &g);
        let fan = wave_fan(&u, NX, &g).unwrap();
        assert!(misalignment(&minus.jump, &fan.vectors[0], &scales) < 1e-8);
        assert!(misalignment(&plus.jump, &fan.vectors[5], &scales) < 1e-8);

        let noneq = cons(1.0, [0.0; 3], 1.0, 0.1, &g);
        assert!(acceleration_wave(&noneq, NX, 1.0, &g).is_err());
    }

    #[test]
    fn k_condition_structure() {
        let g = GasSpec::with_dof(5.0).unwrap();
        let u = cons(1.0, [0.0; 3], 1.0, 0.0, &g);
        let rep = k_condition(&u, NX, &g).unwrap();
        // Sound waves and the pressure contact mode carry dPi; the density and
        // shear contact modes do not.
        assert!(rep.weak_pass);
        assert!(!rep.overall_pass);
        assert_eq!(rep.failing(), vec!["contact:density", "contact:shear-1", "contact:shear-2"]);
        assert_eq!(rep.null_dim, 3);
        let pressure = &rep.vectors[4];
        assert!(pressure.pass);
        assert!(pressure.production.iter().enumerate().all(|(j, c)| (j == IDX_FLL) || *c == 0.0));
        assert!(!rep.marginal);
    }

    #[test]
    fn k_condition_near_monatomic_is_marginal() {
        let g = GasSpec::with_dof(3.0 + 1e-6).unwrap();
        let u = cons(1.0, [0.0; 3], 1.0, 0.0, &g);
        let rep = k_condition(&u, NX, &g).unwrap();
        assert!(rep.weak_pass);
        assert!(rep.marginal);
    }

    #[test]
    fn convexity_at_sample_states() {
        let g = GasSpec::with_dof(5.0).unwrap();
        for z in [-0.5, 0.0, 0.3] {
            let rep = convexity_check(&cons(1.0, [0.2, 0.0, -0.1], 1.0, z, &g), &g).unwrap();
            assert!(rep.pass(), "{z}: {rep:?}");
            assert!(!rep.reduced_confidence);
        }
        let near = convexity_check(&cons(1.0, [0.0; 3], 1.0, 0.99 * g.z_max(), &g), &g).unwrap();
        assert!(near.hessian_pass, "{near:?}");
        assert!(near.gradient_pass || near.reduced_confidence);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        for n in [NX, [0.0, 0.0, 1.0], [0.48, 0.6, 0.64]] {
            let [t1, t2] = tangent_basis(n);
            assert!(dot(t1, n).abs() < 1e-15 && dot(t2, n).abs() < 1e-15 && dot(t1, t2).abs() < 1e-15);
            assert!((dot(t1, t1) - 1.0).abs() < 1e-15 && (dot(t2, t2) - 1.0).abs() < 1e-15);
        }
    }
}
