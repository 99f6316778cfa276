use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qkr_core::classical::*;

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

proptest! {
    #[test]
    fn jacobian_determinant_is_one(x in 0.0f64..TAU, k in 0.0f64..20.0) {
        let [[a, b], [c, d]] = jacobian(x, k);
        prop_assert!((a * d - b * c - 1.0).abs() < 1e-12 * (1.0 + k));
    }

    #[test]
    fn inverse_undoes_one_step(x in 0.0f64..TAU, p in -10.0f64..10.0, k in 0.0f64..2.0) {
        let s = ClassicalState::new(x, p);
        let back = inverse_map_step(map_step(s, k), k);
        prop_assert!(angle_gap(back.x, x) < 1e-12 && (back.p - p).abs() < 1e-12);
    }

    #[test]
    fn tangent_step_matches_finite_difference(x in 0.0f64..TAU, p in -3.0f64..3.0, k in 0.0f64..5.0, ang in 0.0f64..TAU) {
        let h = 1e-7;
        let s = ClassicalState::new(x, p);
        let t = TangentState::new(ang.cos(), ang.sin());
        let a = map_step(ClassicalState::new(x + h * t.dx, p + h * t.dp), k);
        let b = map_step(ClassicalState::new(x - h * t.dx, p - h * t.dp), k);
        let mut ddx = a.x - b.x;
        if ddx > PI { ddx -= TAU } else if ddx < -PI { ddx += TAU }
        let lin = tangent_step(s, t, k);
        prop_assert!((ddx / (2.0 * h) - lin.dx).abs() < 1e-5);
        prop_assert!(((a.p - b.p) / (2.0 * h) - lin.dp).abs() < 1e-5 * (1.0 + k));
    }
}

#[test]
fn island_orbits_reverse_over_100_kicks() {
    for k in [0.3, 0.8, 1.5, 2.0] {
        for s0 in [
            ClassicalState::new(0.2, 0.0),
            ClassicalState::new(0.0, 0.3),
            ClassicalState::new(6.0, -0.2),
        ] {
            let mut s = s0;
            for _ in 0..100 {
                s = map_step(s, k);
            }
            for _ in 0..100 {
                s = inverse_map_step(s, k);
            }
            assert!(
                angle_gap(s.x, s0.x) < 1e-9 && (s.p - s0.p).abs() < 1e-9,
                "K={k} {s0:?} -> {s:?}"
            );
        }
    }
}

#[test]
fn chaotic_round_trip_error_tracks_the_exponent() {
    // reversal of a chaotic orbit amplifies round-off by about exp(λ n)
    let k = 6.0;
    let s0 = ClassicalState::new(1.0, 0.5);
    let err_after = |n: usize| {
        let mut s = s0;
        for _ in 0..n {
            s = map_step(s, k);
        }
        for _ in 0..n {
            s = inverse_map_step(s, k);
        }
        angle_gap(s.x, s0.x).max((s.p - s0.p).abs())
    };
    assert!(err_after(5) < 1e-9);
    assert!(err_after(40) > 1e-6);
}

#[test]
fn parallelogram_area_is_preserved() {
    for k in [0.8, 2.0, 10.0] {
        let mut s = ClassicalState::new(2.0, 0.1);
        let mut drift = 0.0;
        for _ in 0..10_000 {
            let e1 = tangent_step(s, TangentState::new(1.0, 0.0), k);
            let e2 = tangent_step(s, TangentState::new(0.0, 1.0), k);
            drift += (e1.dx * e2.dp - e1.dp * e2.dx - 1.0).abs();
            s = map_step(s, k);
        }
        assert!(drift < 1e-10, "K={k}: {drift:e}");
    }
}

#[test]
fn fixed_point_stability_from_orbits() {
    let excursion = |x0: f64, k: f64| {
        let mut s = ClassicalState::new(x0 + 1e-6, 0.0);
        let mut far: f64 = 0.0;
        for _ in 0..2000 {
            s = map_step(s, k);
            far = far.max(angle_gap(s.x, x0)).max(s.p.abs());
        }
        far
    };
    for k in [0.5, 2.0, 3.8] {
        assert_eq!(classify_fixed_point(0.0, k), FixedPointKind::Elliptic);
        assert!(excursion(0.0, k) < 1e-4, "K={k}");
    }
    for k in [4.2, 6.0] {
        assert_eq!(classify_fixed_point(0.0, k), FixedPointKind::Hyperbolic);
        assert!(excursion(0.0, k) > 1e-2, "K={k}");
    }
    for k in [0.1, 1.0, 5.0] {
        assert_eq!(classify_fixed_point(PI, k), FixedPointKind::Hyperbolic);
        assert!(excursion(PI, k) > 1e-2, "K={k}");
    }
}

#[test]
fn lyapunov_follows_log_half_k_at_strong_chaos() {
    for k in [6.0, 10.0] {
        let est = lyapunov(k, 10_000, 16, 7);
        let target = (k / 2.0f64).ln();
        assert!(
            (est.lambda - target).abs() < 0.1 * target,
            "K={k}: {}",
            est.lambda
        );
        assert!(!est.regular);
    }
}

#[test]
fn lyapunov_is_reproducible() {
    assert_eq!(lyapunov(4.0, 2000, 12, 3), lyapunov(4.0, 2000, 12, 3));
}

#[test]
fn strong_chaos_dcl_slope() {
    let est: Vec<f64> = (0..16)
        .map(|i| {
            let s0 = ClassicalState::new(0.3 + 0.37 * i as f64, -1.0 + 0.13 * i as f64);
            let d = dcl_series(s0, TangentState::new(1.0, 0.0), 10.0, 40);
            (d[40] / d[0]).ln() / 40.0
        })
        .collect();
    let mean = est.iter().sum::<f64>() / est.len() as f64;
    assert!((mean - 5f64.ln()).abs() < 0.15 * 5f64.ln(), "{mean}");
}

#[test]
fn separatrix_layer_in_portrait() {
    // orbits started next to the hyperbolic point wander in P but stay near the separatrix
    let seeds = [
        ClassicalState::new(PI + 1e-3, 0.0),
        ClassicalState::new(PI - 1e-3, 1e-3),
    ];
    let orbits = phase_portrait(0.8, &seeds, 2000);
    for orbit in &orbits {
        let p_max = orbit.iter().map(|&(_, p)| p.abs()).fold(0.0, f64::max);
        assert!(p_max > 0.5 && p_max < 2.5, "{p_max}");
    }
}
