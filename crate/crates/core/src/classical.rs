//! Classical standard map in the after-kick convention:
//! `x' = x + P (mod 2π)`, then `P' = P − K sin x'`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::Window;

/// Tangent vectors are renormalized this often in long runs.
pub const RENORMALIZE_EVERY: usize = 10;

/// A point of the map; `p` is the scaled momentum `P = β p_phys`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub x: f64,
    pub p: f64,
}

impl ClassicalState {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }
}

/// Infinitesimal displacement `(Δx, ΔP)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentState {
    pub dx: f64,
    pub dp: f64,
}

impl TangentState {
    pub fn new(dx: f64, dp: f64) -> Self {
        Self { dx, dp }
    }

    pub fn norm(&self) -> f64 {
        self.dx.hypot(self.dp)
    }

    fn scaled(self, s: f64) -> Self {
        Self::new(self.dx * s, self.dp * s)
    }
}

pub fn map_step(s: ClassicalState, k: f64) -> ClassicalState {
    let x = Window::ZeroToTwoPi.reduce(s.x + s.p);
    ClassicalState {
        x,
        p: s.p - k * x.sin(),
    }
}

/// Exact inverse of [`map_step`]: `P = P' + K sin x'`, `x = x' − P`.
pub fn inverse_map_step(s: ClassicalState, k: f64) -> ClassicalState {
    let p = s.p + k * s.x.sin();
    ClassicalState {
        x: Window::ZeroToTwoPi.reduce(s.x - p),
        p,
    }
}

/// Jacobian `∂(x', P')/∂(x, P)` given the post-step angle `x'`.
pub fn jacobian(x_next: f64, k: f64) -> [[f64; 2]; 2] {
    let c = k * x_next.cos();
    [[1.0, 1.0], [-c, 1.0 - c]]
}

/// Linearized step along the orbit through `s` (the state before the step).
pub fn tangent_step(s: ClassicalState, t: TangentState, k: f64) -> TangentState {
    let x_next = Window::ZeroToTwoPi.reduce(s.x + s.p);
    let dx = t.dx + t.dp;
    TangentState {
        dx,
        dp: t.dp - k * x_next.cos() * dx,
    }
}

/// Orbit and tangent vectors for `n` steps, both including the initial entry.
pub fn tangent_trajectory(
    s0: ClassicalState,
    t0: TangentState,
    k: f64,
    n: usize,
) -> (Vec<ClassicalState>, Vec<TangentState>) {
    let mut states = Vec::with_capacity(n + 1);
    let mut tangents = Vec::with_capacity(n + 1);
    let (mut s, mut t) = (s0, t0);
    states.push(s);
    tangents.push(t);
    for _ in 0..n {
        t = tangent_step(s, t, k);
        s = map_step(s, k);
        states.push(s);
        tangents.push(t);
    }
    (states, tangents)
}

/// `d_cl(j) = |(Δx, ΔP)|` for `j = 0..=n`; the first entry is `|t0|`.
pub fn dcl_series(s0: ClassicalState, t0: TangentState, k: f64, n: usize) -> Vec<f64> {
    assert!(t0.norm() > 0.0, "initial displacement must be nonzero");
    tangent_trajectory(s0, t0, k, n)
        .1
        .iter()
        .map(TangentState::norm)
        .collect()
}

/// Finite-time exponent `h = ln(d_cl(n) / d_cl(0)) / n` for displacement `t0`.
pub fn local_exponent_along(s0: ClassicalState, t0: TangentState, k: f64, n: usize) -> f64 {
    assert!(n >= 1);
    let mut s = s0;
    let mut t = t0.scaled(1.0 / t0.norm());
    let mut log_growth = 0.0;
    for step in 1..=n {
        t = tangent_step(s, t, k);
        s = map_step(s, k);
        if step % RENORMALIZE_EVERY == 0 {
            let r = t.norm();
            log_growth += r.ln();
            t = t.scaled(1.0 / r);
        }
    }
    (log_growth + t.norm().ln()) / n as f64
}

/// Finite-time exponent starting from a displacement along `x`.
pub fn local_exponent(s0: ClassicalState, k: f64, n: usize) -> f64 {
    local_exponent_along(s0, TangentState::new(1.0, 0.0), k, n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// Median of the per-seed estimates.
    pub lambda: f64,
    pub per_seed: Vec<f64>,
    /// Every seed looked regular at `K < 1`; `lambda` is then not a chaos rate.
    pub regular: bool,
}

/// Per-seed exponents below this count as regular.
const REGULAR_BELOW: f64 = 0.02;

/// Largest Lyapunov exponent as the median over `ensemble` random seeds.
pub fn lyapunov(k: f64, n: usize, ensemble: usize, seed: u64) -> LyapunovEstimate {
    assert!(n >= 1 && ensemble >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<ClassicalState> = (0..ensemble)
        .map(|_| ClassicalState::new(rng.gen_range(0.0..TAU), rng.gen_range(-PI..PI)))
        .collect();
    let per_seed: Vec<f64> = seeds
        .par_iter()
        .map(|&s| local_exponent_along(s, TangentState::new(1.0, 1.0), k, n))
        .collect();
    let lambda = median(&per_seed);
    let regular = k < 1.0 && per_seed.iter().all(|&l| l < REGULAR_BELOW);
    LyapunovEstimate {
        lambda,
        per_seed,
        regular,
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Linear stability of the fixed point `(x, 0)` from the Jacobian trace `2 − K cos x`.
pub fn classify_fixed_point(x: f64, k: f64) -> FixedPointKind {
    let [[a, _], [_, d]] = jacobian(x, k);
    let trace = a + d;
    if (trace.abs() - 2.0).abs() < 1e-12 {
        FixedPointKind::Parabolic
    } else if trace.abs() < 2.0 {
        FixedPointKind::Elliptic
    } else {
        FixedPointKind::Hyperbolic
    }
}

/// Orbits of each seed for plotting, `(x, P)` with `P` folded onto `[−π, π)`.
pub fn phase_portrait(k: f64, seeds: &[ClassicalState], n: usize) -> Vec<Vec<(f64, f64)>> {
    seeds
        .par_iter()
        .map(|&s0| {
            let mut s = s0;
            let mut orbit = Vec::with_capacity(n + 1);
            for i in 0..=n {
                if i > 0 {
                    s = map_step(s, k);
                }
                orbit.push((
                    Window::ZeroToTwoPi.reduce(s.x),
                    Window::MinusPiToPi.reduce(s.p),
                ));
            }
            orbit
        })
        .collect()
}
