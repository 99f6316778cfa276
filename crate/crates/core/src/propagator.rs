//! One-kick map `Ψ ← U_x F⁻¹ U_p F Ψ` and the bookkeeping around it.
//!
//! Momentum amplitudes follow `A_k = (2π)^{-1/2} ∫ Ψ(x) e^{-ikx} dx`,
//! discretized so that `Σ |A_k|² = Σ |Ψ_l|² dx`. On the grid the label `k` and
//! `k + N` are indistinguishable, so every state carries `k_offset`, the
//! absolute label of the first slot of its momentum window. The window is
//! re-centred on the momentum peak after every kick, and the position window
//! flips between `[0, 2π)` and `[-π, π)` whenever the density peak gets within
//! `π/2` of an edge.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::bessel::bessel_j_band;
use crate::model::{argmax, Grid, KickStrengths, QuantumState};

/// Delocalization cutoff used unless configured otherwise.
pub const DEFAULT_EPSILON: f64 = 0.002;

/// Extra Bessel orders kept beyond the turning point `α/ħ`.
pub const BAND_MARGIN: usize = 40;

/// Relative norm drift above which a truncated Bessel propagation is rejected.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagatorError {
    #[error("evolution terminated: {0}")]
    EvolutionTerminated(DelocalizationReport),
    #[error("Bessel band {band} too small: relative norm drift {drift:e}")]
    Truncation { band: usize, drift: f64 },
}

/// `A_k` for `k = k_offset .. k_offset + amps.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAmplitudes {
    pub amps: Vec<Complex64>,
    pub k_offset: i64,
}

impl MomentumAmplitudes {
    pub fn label(&self, index: usize) -> i64 {
        self.k_offset + index as i64
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.amps.len()).map(|i| self.label(i))
    }

    /// `Σ |A_k|²`.
    pub fn total_probability(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude at absolute label `k`, zero outside the window.
    pub fn get(&self, k: i64) -> Complex64 {
        let i = k - self.k_offset;
        if i >= 0 && (i as usize) < self.amps.len() {
            self.amps[i as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Localization {
    Localized,
    EdgeInMomentum,
    EdgeInPosition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelocalizationReport {
    pub status: Localization,
    /// `max(|A_left|, |A_right|) / max_k |A_k|`.
    pub edge_ratio_p: f64,
    /// `|Ψ(z)| / max_x |Ψ|` at the window boundary `z`.
    pub edge_ratio_x: f64,
    pub epsilon: f64,
}

impl DelocalizationReport {
    pub fn is_localized(&self) -> bool {
        self.status == Localization::Localized
    }
}

impl fmt::Display for DelocalizationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} (momentum edge ratio {:.3e}, position edge ratio {:.3e}, epsilon {})",
            self.status, self.edge_ratio_p, self.edge_ratio_x, self.epsilon
        )
    }
}

/// FFT plans and scratch for one grid size. Not shared between runs.
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    fn rotation(&self, k_offset: i64) -> usize {
        k_offset.rem_euclid(self.n as i64) as usize
    }

    /// Position samples to momentum amplitudes on the window starting at `k_offset`.
    pub fn forward_slice(&mut self, psi: &[Complex64], k_offset: i64) -> MomentumAmplitudes {
        assert_eq!(psi.len(), self.n);
        let mut buf = psi.to_vec();
        self.forward
            .process_with_scratch(&mut buf, &mut self.scratch);
        // A_k = dx / sqrt(2π) * DFT_k = sqrt(2π) / N * DFT_k
        let scale = TAU.sqrt() / self.n as f64;
        buf.iter_mut().for_each(|a| *a *= scale);
        buf.rotate_left(self.rotation(k_offset));
        MomentumAmplitudes {
            amps: buf,
            k_offset,
        }
    }

    pub fn forward(&mut self, state: &QuantumState) -> MomentumAmplitudes {
        self.forward_slice(&state.amplitudes, state.k_offset)
    }

    /// Momentum amplitudes back to position samples, `Ψ_l = (2π)^{-1/2} Σ_k A_k e^{ik x_l}`.
    pub fn inverse_vec(&mut self, amps: &MomentumAmplitudes) -> Vec<Complex64> {
        assert_eq!(amps.amps.len(), self.n);
        let mut buf = amps.amps.clone();
        buf.rotate_right(self.rotation(amps.k_offset));
        self.inverse
            .process_with_scratch(&mut buf, &mut self.scratch);
        let scale = 1.0 / TAU.sqrt();
        buf.iter_mut().for_each(|a| *a *= scale);
        buf
    }

    pub fn inverse(&mut self, amps: &MomentumAmplitudes, grid: Grid) -> QuantumState {
        QuantumState {
            amplitudes: self.inverse_vec(amps),
            grid,
            k_offset: amps.k_offset,
            kick_count: 0,
        }
    }

    /// Moves the momentum window so its largest amplitude sits at the centre.
    /// Returns the label shift applied.
    pub fn recenter(&mut self, state: &mut QuantumState) -> i64 {
        let amps = self.forward(state);
        recenter_with(state, &amps)
    }
}

fn recenter_with(state: &mut QuantumState, amps: &MomentumAmplitudes) -> i64 {
    let peak = argmax(amps.amps.iter().map(|a| a.norm_sqr()));
    let shift = peak as i64 - (state.grid.n_points() / 2) as i64;
    state.k_offset += shift;
    shift
}

/// Unitary transform of the state onto its current momentum window.
pub fn forward_transform(state: &QuantumState) -> MomentumAmplitudes {
    Spectral::new(state.grid.n_points()).forward(state)
}

/// Inverse of [`forward_transform`]; the result has `kick_count = 0`.
pub fn inverse_transform(amps: &MomentumAmplitudes, grid: Grid) -> QuantumState {
    Spectral::new(grid.n_points()).inverse(amps, grid)
}

/// Relabels the momentum window around its peak; no amplitude changes.
pub fn recenter_momentum(state: &QuantumState) -> QuantumState {
    let mut out = state.clone();
    Spectral::new(state.grid.n_points()).recenter(&mut out);
    out
}

/// Flips to the other position window if the density peak lies within `π/2`
/// of the active window's boundary. Returns whether a flip happened.
pub fn switch_position_window_in_place(state: &mut QuantumState) -> bool {
    let x = state.grid.coordinate(state.peak_index());
    if state.grid.window().distance_to_edge(x) < FRAC_PI_2 {
        toggle_window(state);
        true
    } else {
        false
    }
}

pub fn switch_position_window(state: &QuantumState) -> QuantumState {
    let mut out = state.clone();
    switch_position_window_in_place(&mut out);
    out
}

/// Re-expresses the state on the other position window unconditionally.
/// Samples are untouched; only the coordinates assigned to them change.
pub fn toggle_window(state: &mut QuantumState) {
    state.grid = state.grid.with_window(state.grid.window().other());
}

/// Edge test using already computed momentum amplitudes.
pub fn delocalization_report(
    state: &QuantumState,
    amps: &MomentumAmplitudes,
    epsilon: f64,
) -> DelocalizationReport {
    let chi = amps.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let xi = state
        .amplitudes
        .iter()
        .map(|a| a.norm())
        .fold(0.0, f64::max);
    let edge_p = amps.amps[0]
        .norm()
        .max(amps.amps[amps.amps.len() - 1].norm());
    let edge_x = state.amplitudes[state.grid.boundary_index()].norm();
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 1.0 };
    let edge_ratio_p = ratio(edge_p, chi);
    let edge_ratio_x = ratio(edge_x, xi);
    let status = if edge_ratio_p > epsilon {
        Localization::EdgeInMomentum
    } else if edge_ratio_x > epsilon {
        Localization::EdgeInPosition
    } else {
        Localization::Localized
    };
    DelocalizationReport {
        status,
        edge_ratio_p,
        edge_ratio_x,
        epsilon,
    }
}

pub fn check_delocalization(state: &QuantumState, epsilon: f64) -> DelocalizationReport {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
    let amps = forward_transform(state);
    delocalization_report(state, &amps, epsilon)
}

/// `exp(-i β ħ k² / 2)` with the exact integer square.
fn free_phase(kick: &KickStrengths, k: i64) -> Complex64 {
    let k2 = (k as i128 * k as i128) as f64;
    Complex64::from_polar(1.0, -0.5 * kick.beta * kick.hbar * k2)
}

/// Split-operator propagator for one run.
///
/// With an `epsilon` set, [`KickPropagator::step`] refuses to kick a state
/// whose support already touches a window edge.
#[derive(Debug)]
pub struct KickPropagator {
    kick: KickStrengths,
    spectral: Spectral,
    kick_phase: Vec<Complex64>,
    epsilon: Option<f64>,
}

/// What one kick did besides evolving the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Localization of the state the kick was applied to.
    pub input_report: DelocalizationReport,
    pub label_shift: i64,
    pub window_switched: bool,
}

impl KickPropagator {
    pub fn new(n_points: usize, kick: impl Into<KickStrengths>) -> Self {
        let kick = kick.into();
        let dx = TAU / n_points as f64;
        let strength = kick.alpha / kick.hbar;
        let kick_phase = (0..n_points)
            .map(|l| Complex64::from_polar(1.0, strength * (l as f64 * dx).cos()))
            .collect();
        Self {
            kick,
            spectral: Spectral::new(n_points),
            kick_phase,
            epsilon: Some(DEFAULT_EPSILON),
        }
    }

    /// `None` disables termination on delocalization.
    pub fn with_epsilon(mut self, epsilon: Option<f64>) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn spectral(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    /// Applies `U_p` then `U_x` without any window bookkeeping.
    pub fn bare_kick(&mut self, state: &mut QuantumState) {
        let mut amps = self.spectral.forward(state);
        self.apply_free_rotation(&mut amps);
        state.amplitudes = self.spectral.inverse_vec(&amps);
        self.apply_kick_phase(state);
        state.kick_count += 1;
    }

    fn apply_free_rotation(&self, amps: &mut MomentumAmplitudes) {
        let k_offset = amps.k_offset;
        for (i, a) in amps.amps.iter_mut().enumerate() {
            *a *= free_phase(&self.kick, k_offset + i as i64);
        }
    }

    fn apply_kick_phase(&self, state: &mut QuantumState) {
        for (a, u) in state.amplitudes.iter_mut().zip(&self.kick_phase) {
            *a *= u;
        }
    }

    /// One full map step: localization check, kick, momentum recentring and
    /// position-window switching.
    pub fn step(&mut self, state: &mut QuantumState) -> Result<StepInfo, PropagatorError> {
        let mut amps = self.spectral.forward(state);
        let input_report =
            delocalization_report(state, &amps, self.epsilon.unwrap_or(DEFAULT_EPSILON));
        if self.epsilon.is_some() && !input_report.is_localized() {
            return Err(PropagatorError::EvolutionTerminated(input_report));
        }
        self.apply_free_rotation(&mut amps);
        state.amplitudes = self.spectral.inverse_vec(&amps);
        self.apply_kick_phase(state);
        state.kick_count += 1;

        let label_shift = self.spectral.recenter(state);
        let window_switched = switch_position_window_in_place(state);
        Ok(StepInfo {
            input_report,
            label_shift,
            window_switched,
        })
    }
}

/// Single map step with a fresh workspace and the default cutoff.
pub fn kick_step(
    state: &QuantumState,
    kick: impl Into<KickStrengths>,
) -> Result<QuantumState, PropagatorError> {
    let mut out = state.clone();
    KickPropagator::new(state.grid.n_points(), kick).step(&mut out)?;
    Ok(out)
}

/// `ceil(α/ħ) + 40`.
pub fn default_band(kick: &KickStrengths) -> usize {
    (kick.alpha / kick.hbar).ceil() as usize + BAND_MARGIN
}

/// `i^l`.
fn i_pow(l: i64) -> Complex64 {
    match l.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Column `m` of the one-kick matrix,
/// `F_{km} = i^{k-m} exp(-iħβm²/2) J_{k-m}(α/ħ)` for `|k - m| <= band`,
/// indexed by `k - m + band`.
pub fn kick_matrix_column(m: i64, kick: &KickStrengths, band: usize) -> Vec<Complex64> {
    let bessel = bessel_j_band(band, kick.alpha / kick.hbar);
    let phase = free_phase(kick, m);
    bessel
        .iter()
        .enumerate()
        .map(|(j, &jl)| i_pow(j as i64 - band as i64) * phase * jl)
        .collect()
}

/// One kick applied directly in the momentum basis through the Bessel
/// matrix, keeping only couplings `|k - m| <= band` inside the window.
pub fn bessel_propagate(
    amps: &MomentumAmplitudes,
    kick: impl Into<KickStrengths>,
    band: usize,
) -> Result<MomentumAmplitudes, PropagatorError> {
    let kick = kick.into();
    let n = amps.amps.len();
    let bessel = bessel_j_band(band, kick.alpha / kick.hbar);
    let coupling: Vec<Complex64> = bessel
        .iter()
        .enumerate()
        .map(|(j, &jl)| i_pow(j as i64 - band as i64) * jl)
        .collect();
    let rotated: Vec<Complex64> = amps
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| a * free_phase(&kick, amps.label(i)))
        .collect();

    let out: Vec<Complex64> = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(band);
            let hi = (k + band).min(n - 1);
            (lo..=hi).map(|m| coupling[k + band - m] * rotated[m]).sum()
        })
        .collect();

    let result = MomentumAmplitudes {
        amps: out,
        k_offset: amps.k_offset,
    };
    let before = amps.total_probability();
    let drift = if before > 0.0 {
        (result.total_probability() - before).abs() / before
    } else {
        0.0
    };
    if drift > TRUNCATION_TOLERANCE {
        return Err(PropagatorError::Truncation { band, drift });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::model::{
        derive_params, discrete_norm, gaussian_packet, GaussianSpec, SimParams, Window,
    };

    fn packet(n: usize, x0: f64, k0: i64, sigma: f64) -> QuantumState {
        gaussian_packet(
            Grid::new(n, Window::ZeroToTwoPi).unwrap(),
            GaussianSpec::new(x0, k0, sigma),
        )
        .unwrap()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn plane_wave_is_single_mode() {
        let grid = Grid::new(64, Window::ZeroToTwoPi).unwrap();
        let k0 = 37i64;
        let amp = 1.0 / TAU.sqrt();
        let state = QuantumState {
            amplitudes: (0..64)
                .map(|l| Complex64::from_polar(amp, k0 as f64 * grid.coordinate(l)))
                .collect(),
            grid,
            k_offset: 10,
            kick_count: 0,
        };
        let a = forward_transform(&state);
        for (k, v) in a.labels().zip(&a.amps) {
            let expect = if k == k0 { 1.0 } else { 0.0 };
            assert!((v.norm() - expect).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn single_mode_is_uniform_plane_wave() {
        let grid = Grid::new(32, Window::ZeroToTwoPi).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 32];
        amps[5] = Complex64::new(1.0, 0.0);
        let a = MomentumAmplitudes { amps, k_offset: -3 };
        let s = inverse_transform(&a, grid);
        for (l, v) in s.amplitudes.iter().enumerate() {
            assert!((v.norm() - 1.0 / TAU.sqrt()).abs() < 1e-14);
            let expect = Complex64::from_polar(1.0 / TAU.sqrt(), 2.0 * grid.coordinate(l));
            assert!((v - expect).norm() < 1e-13);
        }
        assert!((discrete_norm(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_spectrum() {
        let sigma = 0.05;
        let k0 = 300;
        let s = packet(1 << 12, 2.0, k0, sigma);
        let a = forward_transform(&s);
        // |A_k|² ∝ exp(-2σ²(k-k0)²), centred at k0 by construction
        let peak = a.get(k0).norm();
        for dk in [1i64, 5, 10, 20] {
            let expect = peak * (-sigma * sigma * (dk * dk) as f64).exp();
            assert!((a.get(k0 + dk).norm() - expect).abs() < 1e-12);
            assert!((a.get(k0 - dk).norm() - expect).abs() < 1e-12);
        }
        assert!((a.total_probability() - 1.0).abs() < 1e-12);
        assert_eq!(a.label(s.grid.n_points() / 2), k0);
    }

    #[test]
    fn round_trip() {
        let s = packet(1 << 10, 1.0, -40, 0.1);
        let back = inverse_transform(&forward_transform(&s), s.grid);
        assert!(max_diff(&s.amplitudes, &back.amplitudes) < 1e-12);
    }

    #[test]
    fn free_rotation_keeps_momentum_distribution() {
        let s = packet(1 << 10, PI, 20, 0.1);
        let kick = KickStrengths {
            alpha: 0.0,
            beta: 0.7,
            hbar: 0.01,
        };
        let before = forward_transform(&s);
        let after = forward_transform(&kick_step(&s, kick).unwrap());
        for k in before.labels() {
            assert!((before.get(k).norm() - after.get(k).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_kick_keeps_density() {
        let s = packet(1 << 10, PI, 20, 0.1);
        let kick = KickStrengths {
            alpha: 0.3,
            beta: 0.0,
            hbar: 0.01,
        };
        let out = kick_step(&s, kick).unwrap();
        let d0 = s.density();
        let d1 = out.density();
        assert!(d0.iter().zip(&d1).all(|(a, b)| (a - b).abs() < 1e-12));
        assert_eq!(out.kick_count, 1);
    }

    #[test]
    fn norm_is_preserved() {
        let p = derive_params(1.5, 0.05, 1e-3).unwrap();
        let mut s = packet(1 << 12, PI, 30, 0.05);
        let mut prop = KickPropagator::new(1 << 12, p).with_epsilon(None);
        for _ in 0..20 {
            prop.step(&mut s).unwrap();
            assert!((discrete_norm(&s) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn recenter_is_identity_when_centered_and_undoes_shifts() {
        let s = packet(1 << 10, PI, 55, 0.1);
        assert_eq!(recenter_momentum(&s), s);
        let mut shifted = s.clone();
        shifted.k_offset += 17;
        assert_eq!(recenter_momentum(&shifted).k_offset, s.k_offset);
        shifted.k_offset -= 40;
        assert_eq!(recenter_momentum(&shifted).k_offset, s.k_offset);
    }

    #[test]
    fn window_switch_rules() {
        let s = packet(1 << 10, PI, 0, 0.1);
        assert_eq!(
            switch_position_window(&s).grid.window(),
            Window::ZeroToTwoPi
        );
        let near = packet(1 << 10, 0.1, 0, 0.1);
        let switched = switch_position_window(&near);
        assert_eq!(switched.grid.window(), Window::MinusPiToPi);
        // stable once switched
        assert_eq!(switch_position_window(&switched), switched);
        let mut twice = near.clone();
        toggle_window(&mut twice);
        toggle_window(&mut twice);
        assert_eq!(twice, near);
    }

    #[test]
    fn fresh_packet_is_localized_and_flat_state_is_not() {
        let s = packet(1 << 12, PI, 0, 0.05);
        let r = check_delocalization(&s, DEFAULT_EPSILON);
        assert!(r.is_localized(), "{r}");
        let grid = Grid::new(64, Window::ZeroToTwoPi).unwrap();
        let flat = QuantumState {
            amplitudes: vec![Complex64::new(1.0 / TAU.sqrt(), 0.0); 64],
            grid,
            k_offset: -32,
            kick_count: 0,
        };
        for eps in [0.002, 0.5, 0.999] {
            assert!(!check_delocalization(&flat, eps).is_localized());
        }
        assert_eq!(
            check_delocalization(&flat, 0.5).status,
            Localization::EdgeInPosition
        );
    }

    #[test]
    fn terminated_step_carries_report() {
        let grid = Grid::new(64, Window::ZeroToTwoPi).unwrap();
        let flat = QuantumState {
            amplitudes: vec![Complex64::new(1.0 / TAU.sqrt(), 0.0); 64],
            grid,
            k_offset: -32,
            kick_count: 0,
        };
        let p = SimParams::from_strengths(1.0, 1.0, 1.0, 0.1).unwrap();
        match kick_step(&flat, p) {
            Err(PropagatorError::EvolutionTerminated(r)) => assert!(!r.is_localized()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bessel_without_kick_is_free_rotation() {
        let s = packet(256, PI, 3, 0.2);
        let a = forward_transform(&s);
        let kick = KickStrengths {
            alpha: 0.0,
            beta: 0.5,
            hbar: 1.0,
        };
        let out = bessel_propagate(&a, kick, 0).unwrap();
        for (i, k) in a.labels().enumerate() {
            let expect = a.amps[i] * Complex64::from_polar(1.0, -0.25 * (k * k) as f64);
            assert!((out.amps[i] - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn kick_matrix_columns_are_unit() {
        let kick = KickStrengths {
            alpha: 2.0,
            beta: 0.5,
            hbar: 1.0,
        };
        let band = default_band(&kick);
        assert_eq!(band, 42);
        for m in [-7, 0, 3, 1000] {
            let col = kick_matrix_column(m, &kick, band);
            let s: f64 = col.iter().map(|v| v.norm_sqr()).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bessel_matches_split_operator() {
        let kick = KickStrengths {
            alpha: 2.0,
            beta: 0.5,
            hbar: 1.0,
        };
        let s = packet(256, PI, 4, 0.25);
        let mut prop = KickPropagator::new(256, kick).with_epsilon(None);
        let mut split = s.clone();
        let mut amps = forward_transform(&s);
        for _ in 0..5 {
            prop.bare_kick(&mut split);
            amps = bessel_propagate(&amps, kick, default_band(&kick)).unwrap();
        }
        let via_fft = forward_transform(&split);
        assert!(max_diff(&via_fft.amps, &amps.amps) < 1e-10);
    }

    #[test]
    fn truncated_band_is_rejected() {
        let kick = KickStrengths {
            alpha: 20.0,
            beta: 0.5,
            hbar: 1.0,
        };
        let a = forward_transform(&packet(256, PI, 0, 0.25));
        let err = bessel_propagate(&a, kick, 3).unwrap_err();
        assert!(matches!(err, PropagatorError::Truncation { band: 3, .. }));
    }
}
