//! Moments, principal squeezing and the spread diagnostic.
//!
//! Everything here is a function of the [`CumulantSet`]. With
//! `δa = (γ δx + i δp) / sqrt(2ħγ)`:
//!
//! ```text
//! ⟨δa²⟩    = (γ var_x − var_p/γ + 2ic) / 2ħ
//! 1 + 2⟨δa†δa⟩ = (γ var_x + var_p/γ) / ħ
//! ⟨δX_θ²⟩  = 1 + 2⟨δa†δa⟩ + 2 Re(e^{−2iθ} ⟨δa²⟩)
//! ```
//!
//! so the minimum over `θ` is `S` and the maximum is `S̄`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{QuantumState, SimParams};
use crate::propagator::{
    delocalization_report, DelocalizationReport, MomentumAmplitudes, Spectral, DEFAULT_EPSILON,
};

/// Below this `|⟨δa²⟩|` every phase is optimal.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("moments undefined for a delocalized state: {0}")]
    Delocalized(DelocalizationReport),
}

/// First and second cumulants of `x` and `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub var_p: f64,
    /// `½⟨xp + px⟩ − ⟨x⟩⟨p⟩`.
    pub c: f64,
}

impl CumulantSet {
    /// `var_x var_p − c²`, bounded below by `ħ²/4`.
    pub fn uncertainty_product(&self) -> f64 {
        self.var_x * self.var_p - self.c * self.c
    }
}

/// Cumulants from a state and its momentum amplitudes.
///
/// `c` is `Re⟨Ψ| δx F⁻¹ δp F |Ψ⟩` with centred operators, which avoids the
/// cancellation in `⟨xp⟩ − ⟨x⟩⟨p⟩` when `⟨p⟩` is large.
pub fn cumulants_from(
    spectral: &mut Spectral,
    state: &QuantumState,
    amps: &MomentumAmplitudes,
    hbar: f64,
) -> CumulantSet {
    let grid = state.grid;
    let dx = grid.dx();
    let xs = grid.coordinates();

    let weights: Vec<f64> = state.amplitudes.iter().map(|a| a.norm_sqr() * dx).collect();
    let total_x: f64 = weights.iter().sum();
    let mean_x = xs.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / total_x;
    let var_x = xs
        .iter()
        .zip(&weights)
        .map(|(x, w)| (x - mean_x).powi(2) * w)
        .sum::<f64>()
        / total_x;

    let probs: Vec<f64> = amps.amps.iter().map(|a| a.norm_sqr()).collect();
    let total_p: f64 = probs.iter().sum();
    // Mean label relative to the window centre keeps the sums small.
    let centre = state.k_offset + (grid.n_points() / 2) as i64;
    let rel = |i: usize| (amps.label(i) - centre) as f64;
    let mean_rel = probs
        .iter()
        .enumerate()
        .map(|(i, w)| rel(i) * w)
        .sum::<f64>()
        / total_p;
    let var_k = probs
        .iter()
        .enumerate()
        .map(|(i, w)| (rel(i) - mean_rel).powi(2) * w)
        .sum::<f64>()
        / total_p;
    let mean_k = centre as f64 + mean_rel;

    let shifted = MomentumAmplitudes {
        amps: amps
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| a * (rel(i) - mean_rel))
            .collect(),
        k_offset: amps.k_offset,
    };
    let dp_psi = spectral.inverse_vec(&shifted);
    let cross: f64 = state
        .amplitudes
        .iter()
        .zip(&dp_psi)
        .zip(&xs)
        .map(|((psi, phi), x)| (psi.conj() * phi).re * (x - mean_x))
        .sum::<f64>()
        * dx
        / total_x;

    CumulantSet {
        mean_x,
        var_x,
        mean_p: hbar * mean_k,
        var_p: hbar * hbar * var_k,
        c: hbar * cross,
    }
}

/// Cumulants without a localization check.
pub fn cumulants_unchecked(state: &QuantumState, hbar: f64) -> CumulantSet {
    let mut spectral = Spectral::new(state.grid.n_points());
    let amps = spectral.forward(state);
    cumulants_from(&mut spectral, state, &amps, hbar)
}

/// Cumulants of a localized state (default cutoff).
pub fn cumulants(state: &QuantumState, hbar: f64) -> Result<CumulantSet, ObservableError> {
    let mut spectral = Spectral::new(state.grid.n_points());
    let amps = spectral.forward(state);
    let report = delocalization_report(state, &amps, DEFAULT_EPSILON);
    if !report.is_localized() {
        return Err(ObservableError::Delocalized(report));
    }
    Ok(cumulants_from(&mut spectral, state, &amps, hbar))
}

/// `⟨δa²⟩`.
pub fn delta_a_squared(cums: &CumulantSet, params: &SimParams) -> Complex64 {
    let g = params.gamma();
    Complex64::new(g * cums.var_x - cums.var_p / g, 2.0 * cums.c) / (2.0 * params.hbar())
}

/// `1 + 2⟨δa†δa⟩`, the phase average of `⟨δX_θ²⟩`.
pub fn mean_quadrature_variance(cums: &CumulantSet, params: &SimParams) -> f64 {
    let g = params.gamma();
    (g * cums.var_x + cums.var_p / g) / params.hbar()
}

/// Principal squeezing `S` and dilation `S̄`.
pub fn principal_squeezing(cums: &CumulantSet, params: &SimParams) -> (f64, f64) {
    let g = params.gamma();
    let a = g * cums.var_x;
    let b = cums.var_p / g;
    let root = ((a - b).powi(2) + 4.0 * cums.c * cums.c).sqrt();
    let s = ((a + b - root) / params.hbar()).max(0.0);
    let s_bar = (a + b + root) / params.hbar();
    (s, s_bar)
}

/// `⟨δX_θ²⟩` for `X_θ = a e^{−iθ} + a† e^{iθ}`.
pub fn quadrature_variance(cums: &CumulantSet, params: &SimParams, theta: f64) -> f64 {
    let m = delta_a_squared(cums, params);
    mean_quadrature_variance(cums, params) + 2.0 * (Complex64::from_polar(1.0, -2.0 * theta) * m).re
}

/// Phase minimizing `⟨δX_θ²⟩`, reduced to `[0, π)`, and whether it is
/// degenerate (`⟨δa²⟩ ≈ 0`, reported as `θ* = 0`).
pub fn optimal_phase(cums: &CumulantSet, params: &SimParams) -> (f64, bool) {
    let m = delta_a_squared(cums, params);
    if m.norm() < DEGENERACY_THRESHOLD {
        return (0.0, true);
    }
    // e^{2iθ*} = −(⟨δa²⟩/⟨δa†²⟩)^{1/2}; the principal root is e^{i arg m}.
    let mut theta = reduce_phase(0.5 * (m.arg() + PI));
    let at = quadrature_variance(cums, params, theta);
    let quarter = quadrature_variance(cums, params, theta + FRAC_PI_2);
    if quarter < at {
        theta = reduce_phase(theta + FRAC_PI_2);
    }
    (theta, false)
}

fn reduce_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// `(var_x + var_p)^{1/2}`.
pub fn spread_distance(cums: &CumulantSet) -> f64 {
    (cums.var_x + cums.var_p).sqrt()
}

/// All squeezing diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingRecord {
    pub s: f64,
    pub s_bar: f64,
    pub theta_star: f64,
    /// `⟨δX₁²⟩`.
    pub quad_var_0: f64,
    /// `⟨δX₂²⟩`.
    pub quad_var_half_pi: f64,
    pub d: f64,
    pub degenerate_phase: bool,
}

impl SqueezingRecord {
    pub fn from_cumulants(cums: &CumulantSet, params: &SimParams) -> Self {
        let (s, s_bar) = principal_squeezing(cums, params);
        let (theta_star, degenerate_phase) = optimal_phase(cums, params);
        Self {
            s,
            s_bar,
            theta_star,
            quad_var_0: quadrature_variance(cums, params, 0.0),
            quad_var_half_pi: quadrature_variance(cums, params, FRAC_PI_2),
            d: spread_distance(cums),
            degenerate_phase,
        }
    }

    /// Ordinary quadrature squeezing, `min(⟨δX₁²⟩, ⟨δX₂²⟩) < 1`.
    pub fn quadrature_squeezed(&self) -> bool {
        self.quad_var_0.min(self.quad_var_half_pi) < 1.0
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::model::{derive_params, gaussian_packet, GaussianSpec, Grid, Window};

    fn params() -> SimParams {
        derive_params(0.8, 0.05, 1e-3).unwrap()
    }

    #[test]
    fn coherent_cumulants_give_unit_squeezing() {
        let p = params();
        let s2 = p.sigma() * p.sigma();
        let c = CumulantSet {
            mean_x: 1.0,
            var_x: s2,
            mean_p: 0.0,
            var_p: p.hbar() * p.hbar() / (4.0 * s2),
            c: 0.0,
        };
        let (s, sb) = principal_squeezing(&c, &p);
        assert!((s - 1.0).abs() < 1e-12 && (sb - 1.0).abs() < 1e-12);
        assert!(optimal_phase(&c, &p).1);
        for th in [0.0, 0.4, 2.0] {
            assert!((quadrature_variance(&c, &p, th) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_gaussian_uses_smaller_branch() {
        let p = params();
        for scale in [0.5, 2.0, 3.7] {
            let var_x = scale * p.sigma() * p.sigma();
            let c = CumulantSet {
                mean_x: 0.0,
                var_x,
                mean_p: 0.0,
                var_p: p.hbar() * p.hbar() / (4.0 * var_x),
                c: 0.0,
            };
            let (s, _) = principal_squeezing(&c, &p);
            let g = p.gamma();
            let expect = 2.0 * (var_x * g).min(p.hbar() * p.hbar() / (4.0 * var_x * g)) / p.hbar();
            assert!((s - expect).abs() < 1e-12);
            // the closed form ħ/(2σ²γ) only holds on the wide side
            if scale > 1.0 {
                assert!((s - p.hbar() / (2.0 * var_x * g)).abs() < 1e-12);
            } else {
                assert!((s - p.hbar() / (2.0 * var_x * g)).abs() > 0.1);
            }
        }
    }

    #[test]
    fn optimal_phase_minimizes() {
        let p = params();
        let c = CumulantSet {
            mean_x: 0.0,
            var_x: 3e-3,
            mean_p: 0.0,
            var_p: 1e-4,
            c: -4e-4,
        };
        let (theta, deg) = optimal_phase(&c, &p);
        assert!(!deg);
        assert!((0.0..PI).contains(&theta));
        let (s, sb) = principal_squeezing(&c, &p);
        assert!((quadrature_variance(&c, &p, theta) - s).abs() < 1e-9);
        assert!((quadrature_variance(&c, &p, theta + FRAC_PI_2) - sb).abs() < 1e-9 * sb);
        assert!((quadrature_variance(&c, &p, theta + PI) - s).abs() < 1e-9);
    }

    #[test]
    fn packet_moments() {
        let sigma = 0.05;
        let hbar = 1e-3;
        let grid = Grid::new(1 << 12, Window::ZeroToTwoPi).unwrap();
        let s = gaussian_packet(grid, GaussianSpec::new(2.5, 120, sigma)).unwrap();
        let c = cumulants(&s, hbar).unwrap();
        assert!((c.mean_x - 2.5).abs() < 1e-12);
        assert!((c.var_x / (sigma * sigma) - 1.0).abs() < 1e-10);
        assert!((c.mean_p / (hbar * 120.0) - 1.0).abs() < 1e-12);
        assert!((c.var_p / (hbar * hbar / (4.0 * sigma * sigma)) - 1.0).abs() < 1e-10);
        assert!(c.c.abs() < 1e-15);
        assert!((spread_distance(&c) - (sigma * sigma + c.var_p).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn plane_wave_has_no_momentum_spread() {
        let grid = Grid::new(64, Window::ZeroToTwoPi).unwrap();
        let s = QuantumState {
            amplitudes: (0..64)
                .map(|l| Complex64::from_polar(1.0 / TAU.sqrt(), 9.0 * grid.coordinate(l)))
                .collect(),
            grid,
            k_offset: -20,
            kick_count: 0,
        };
        let c = cumulants_unchecked(&s, 0.5);
        assert!(c.var_p.abs() < 1e-20);
        assert!((c.mean_p - 4.5).abs() < 1e-12);
        assert!(matches!(
            cumulants(&s, 0.5),
            Err(ObservableError::Delocalized(_))
        ));
    }

    #[test]
    fn spread_is_monotone() {
        let a = CumulantSet {
            mean_x: 0.0,
            var_x: 1e-4,
            mean_p: 0.0,
            var_p: 1e-6,
            c: 0.0,
        };
        let b = CumulantSet {
            var_x: 2e-4,
            var_p: 3e-6,
            ..a
        };
        assert!(spread_distance(&b) > spread_distance(&a));
        assert!((spread_distance(&a) - (1e-4f64 + 1e-6).sqrt()).abs() < 1e-18);
    }
}
