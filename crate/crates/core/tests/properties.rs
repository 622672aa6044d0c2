//! Randomized structural properties of the closure and its characteristic
//! structure.

use et6_core::closure::{conserved_scales, distribution_value};
use et6_core::eigen::analytic_speeds;
use et6_core::*;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Admissible state described by `(D, rho, T, v, s)` with `s` in (0, 1)
/// placing `Pi/p` across the window.
fn state_strategy() -> impl Strategy<Value = (GasSpec, State6)> {
    (3.2f64..12.0, 0.2f64..5.0, 0.2f64..5.0, prop::array::uniform3(-2.0f64..2.0), 0.02f64..0.98).prop_map(
        |(d, rho, temp, v, s)| {
            let g = GasSpec::with_dof(d).unwrap();
            let z = -1.0 + s * (1.0 + g.z_max());
            let p = rho * temp;
            (g, State6::new(rho, v, temp, z * p).unwrap())
        },
    )
}

fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

fn apply(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|k| r[i][k] * v[k]).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conversion_round_trip((g, s) in state_strategy()) {
        let u = conserved_from_primitive(&s, &g);
        let back = primitive_from_conserved(&u, &g).unwrap();
        prop_assert!(rel(back.rho, s.rho) < 1e-12);
        prop_assert!(rel(back.temp, s.temp) < 1e-12);
        prop_assert!((back.pi - s.pi).abs() < 1e-12 * s.pressure(&g));
        for k in 0..3 {
            prop_assert!((back.v[k] - s.v[k]).abs() < 1e-12 * (1.0 + s.v[k].abs()));
        }
    }

    #[test]
    fn multipliers_reproduce_the_state((g, s) in state_strategy()) {
        let m = multipliers_from_state(&s, &g).unwrap();
        let c = state_from_multipliers(&m, &g);
        let p = s.pressure(&g);
        prop_assert!(rel(c.rho, s.rho) < 1e-12);
        prop_assert!(rel(c.p_plus_pi, p + s.pi) < 1e-12);
        prop_assert!(rel(c.pressure(&g), p) < 1e-12);
    }

    #[test]
    fn distribution_is_positive((g, s) in state_strategy(), w in prop::array::uniform3(-6.0f64..6.0), j in 1e-3f64..20.0) {
        // Sample points in units of the local thermal scales so that the
        // exponential stays above the underflow threshold.
        let p = s.pressure(&g);
        let c = w.map(|x| x * ((p + s.pi) / s.rho).sqrt());
        let i = j * p / s.rho;
        let f = distribution_value(c, i, &s, &g).unwrap();
        prop_assert!(f > 0.0 && f.is_finite());
    }

    #[test]
    fn nonequilibrium_entropy_is_nonpositive((g, s) in state_strategy()) {
        let parts = entropy_parts(&s, &g).unwrap();
        prop_assert!(parts.k <= 0.0);
        prop_assert!(parts.h <= parts.h_eq);
        prop_assert!((parts.h - parts.h_eq - s.rho * parts.k).abs() <= 1e-10 * parts.h.abs().max(1.0));
    }

    #[test]
    fn production_opposes_dynamic_pressure((g, s) in state_strategy()) {
        let p_ll = production_bgk(&s, &g);
        prop_assert!(p_ll * s.pi <= 0.0);
    }

    #[test]
    fn fluxes_rotate_with_the_frame((g, s) in state_strategy(), axis in prop::array::uniform3(0.1f64..1.0), angle in 0.0f64..6.28) {
        let r = rotation(axis, angle);
        let base = closed_fluxes(&s, &g);
        let turned = State6::new(s.rho, apply(&r, s.v), s.temp, s.pi).unwrap();
        let rot = closed_fluxes(&turned, &g);
        let scale = s.pressure(&g) + s.rho * s.speed_squared();
        for i in 0..3 {
            for k in 0..3 {
                let expect: f64 = (0..3).flat_map(|a| (0..3).map(move |b| (a, b)))
                    .map(|(a, b)| r[i][a] * r[k][b] * base.f_ik[a][b]).sum();
                prop_assert!((rot.f_ik[i][k] - expect).abs() <= 1e-12 * scale);
            }
        }
        let fl = apply(&r, base.f_llk);
        let gl = apply(&r, base.g_llk);
        let vscale = scale * (1.0 + s.speed_squared()).sqrt() * (1.0 + s.temp);
        for k in 0..3 {
            prop_assert!((rot.f_llk[k] - fl[k]).abs() <= 1e-12 * vscale);
            prop_assert!((rot.g_llk[k] - gl[k]).abs() <= 1e-11 * vscale * (1.0 + s.speed_squared() + s.temp));
        }
    }

    #[test]
    fn speeds_are_real_and_shift_with_velocity((g, s) in state_strategy(), n in prop::array::uniform3(-1.0f64..1.0)) {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        prop_assume!(norm > 0.1);
        let n = n.map(|x| x / norm);
        let fan = wave_fan(&conserved_from_primitive(&s, &g), n, &g).unwrap();
        let rest = wave_fan(&conserved_from_primitive(&s.at_zero_velocity(), &g), n, &g).unwrap();
        let vn: f64 = (0..3).map(|k| s.v[k] * n[k]).sum();
        let c = (5.0 * (s.pressure(&g) + s.pi) / (3.0 * s.rho)).sqrt();
        let exact = analytic_speeds(&s, n, &g);
        for k in 0..6 {
            prop_assert!((fan.speeds[k] - (rest.speeds[k] + vn)).abs() <= 1e-10 * (c + vn.abs()));
            prop_assert!((fan.speeds[k] - exact[k]).abs() <= 1e-10 * (c + vn.abs()));
        }
    }

    #[test]
    fn main_field_is_galilean((g, s) in state_strategy()) {
        let moving = main_field(&s, &g).unwrap().to_array();
        let rest = main_field(&s.at_zero_velocity(), &g).unwrap().boosted(s.v).to_array();
        let scales = conserved_scales(&s, &g);
        let dual: f64 = (0..6).map(|k| (moving[k] * scales[k]).abs()).fold(0.0, f64::max);
        for k in 0..6 {
            prop_assert!((moving[k] - rest[k]).abs() * scales[k] <= 1e-12 * dual.max(1.0));
        }
    }
}

#[test]
fn admissibility_window_edges() {
    let g = GasSpec::with_dof(5.0).unwrap();
    let at = |pi| admissibility(&State6::from_pressure(1.0, [0.0; 3], 1.0, pi, &g).unwrap(), &g);
    let inside = at(0.5);
    assert!(inside.admissible);
    assert!((inside.lower_margin - 1.5).abs() < 1e-15 && (inside.upper_margin - 1.0 / 6.0).abs() < 1e-15);
    assert!(!at(0.7).admissible);
    assert!(!at(-1.0).admissible);
}
