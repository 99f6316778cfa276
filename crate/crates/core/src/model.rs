//! Parameters, position grid and the initial Gaussian packet.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

/// Largest packet width accepted; beyond it the periodic images of the
/// Gaussian tail are no longer below round-off.
pub const MAX_SIGMA: f64 = 0.3;

/// Minimum number of grid spacings per packet width.
pub const MIN_POINTS_PER_SIGMA: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("packet width sigma={0} must be below {MAX_SIGMA}")]
    WidthTooLarge(f64),
    #[error("packet width sigma={sigma} is under-resolved: need sigma >= {MIN_POINTS_PER_SIGMA}*dx = {min}")]
    Underresolved { sigma: f64, min: f64 },
    #[error("grid size {0} is not a power of two >= 8")]
    GridSize(usize),
    #[error("packet center x0={x0} lies outside the {window:?} window")]
    OutsideWindow { x0: f64, window: Window },
}

fn positive(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonPositive { name, value })
    }
}

/// Physical parameters of one run.
///
/// `alpha` is the kick strength and `beta` the inverse inertia, so that the
/// classical limit is the standard map with `K = alpha * beta`. `gamma` is the
/// oscillator scale entering the annihilation operator
/// `a = (sqrt(gamma) x + i p / sqrt(gamma)) / sqrt(2 hbar)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    k: f64,
    alpha: f64,
    beta: f64,
    hbar: f64,
    gamma: f64,
    sigma: f64,
}

impl SimParams {
    /// Builds parameters from explicit kick strength and inverse inertia.
    /// `gamma = sqrt(alpha / beta)`; `sigma` is only carried along.
    pub fn from_strengths(
        alpha: f64,
        beta: f64,
        hbar: f64,
        sigma: f64,
    ) -> Result<Self, ModelError> {
        let alpha = positive("alpha", alpha)?;
        let beta = positive("beta", beta)?;
        let hbar = positive("hbar", hbar)?;
        let sigma = positive("sigma", sigma)?;
        Ok(Self {
            k: alpha * beta,
            alpha,
            beta,
            hbar,
            gamma: (alpha / beta).sqrt(),
            sigma,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of unperturbed levels coupled by one kick, `2 alpha / hbar`.
    pub fn levels_per_kick(&self) -> f64 {
        2.0 * self.alpha / self.hbar
    }

    /// The two numbers the quantum map actually depends on.
    pub fn kick(&self) -> KickStrengths {
        KickStrengths {
            alpha: self.alpha,
            beta: self.beta,
            hbar: self.hbar,
        }
    }
}

/// The map `U_x U_p` depends only on `alpha / hbar` and `beta * hbar`.
///
/// Unlike [`SimParams`] either strength may be zero, which gives the pure
/// free-rotation and pure-kick limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickStrengths {
    pub alpha: f64,
    pub beta: f64,
    pub hbar: f64,
}

impl From<SimParams> for KickStrengths {
    fn from(p: SimParams) -> Self {
        p.kick()
    }
}

/// Chooses `alpha` and `beta` so that `alpha * beta = K` and the Gaussian of
/// width `sigma` is a coherent state, `sigma^2 = hbar / (2 gamma)`.
pub fn derive_params(k: f64, sigma: f64, hbar: f64) -> Result<SimParams, ModelError> {
    let k = positive("K", k)?;
    let sigma = positive("sigma", sigma)?;
    let hbar = positive("hbar", hbar)?;
    if sigma >= MAX_SIGMA {
        return Err(ModelError::WidthTooLarge(sigma));
    }
    let two_var = 2.0 * sigma * sigma;
    let root_k = k.sqrt();
    Ok(SimParams {
        k,
        alpha: root_k * hbar / two_var,
        beta: root_k * two_var / hbar,
        hbar,
        gamma: hbar / two_var,
        sigma,
    })
}

/// Which representative interval position coordinates are reported on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    /// `[0, 2π)`, boundary point `0`.
    ZeroToTwoPi,
    /// `[-π, π)`, boundary point `π`.
    MinusPiToPi,
}

impl Window {
    pub fn other(self) -> Self {
        match self {
            Window::ZeroToTwoPi => Window::MinusPiToPi,
            Window::MinusPiToPi => Window::ZeroToTwoPi,
        }
    }

    /// Lower end of the interval.
    pub fn start(self) -> f64 {
        match self {
            Window::ZeroToTwoPi => 0.0,
            Window::MinusPiToPi => -PI,
        }
    }

    pub fn contains(self, x: f64) -> bool {
        let s = self.start();
        x >= s && x < s + TAU
    }

    /// Maps any angle onto this window.
    pub fn reduce(self, x: f64) -> f64 {
        let s = self.start();
        let r = (x - s).rem_euclid(TAU) + s;
        // rem_euclid can return exactly TAU for tiny negative inputs
        if r >= s + TAU {
            s
        } else {
            r
        }
    }

    /// Distance from `x` (already on this window) to the nearest boundary.
    pub fn distance_to_edge(self, x: f64) -> f64 {
        let s = self.start();
        (x - s).min(s + TAU - x)
    }
}

/// Uniform periodic position grid, `x_l = l * dx` modulo `2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    window: Window,
}

impl Grid {
    pub fn new(n_points: usize, window: Window) -> Result<Self, ModelError> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(ModelError::GridSize(n_points));
        }
        Ok(Self { n_points, window })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        TAU / self.n_points as f64
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn with_window(self, window: Window) -> Self {
        Self { window, ..self }
    }

    /// Coordinate of sample `l` on the active window. On `[-π, π)` the upper
    /// half of the samples carries `l * dx - 2π`.
    pub fn coordinate(&self, l: usize) -> f64 {
        let x = l as f64 * self.dx();
        match self.window {
            Window::ZeroToTwoPi => x,
            Window::MinusPiToPi if 2 * l < self.n_points => x,
            Window::MinusPiToPi => x - TAU,
        }
    }

    /// Sample index sitting on the window boundary.
    pub fn boundary_index(&self) -> usize {
        match self.window {
            Window::ZeroToTwoPi => 0,
            Window::MinusPiToPi => self.n_points / 2,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points).map(|l| self.coordinate(l)).collect()
    }
}

/// Initial packet `(2πσ²)^{-1/4} exp(-(x-x0)²/4σ² + i k0 (x-x0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub x0: f64,
    pub k0: i64,
    pub sigma: f64,
}

impl GaussianSpec {
    pub fn new(x0: f64, k0: i64, sigma: f64) -> Self {
        Self { x0, k0, sigma }
    }
}

/// Position-space amplitudes plus momentum-window bookkeeping.
///
/// `amplitudes[l]` is `Ψ(l * dx)`; the sample order never changes; the grid's
/// window only decides which coordinate each sample is reported at. Momentum
/// labels run over `k_offset .. k_offset + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
    pub grid: Grid,
    pub k_offset: i64,
    pub kick_count: u32,
}

impl QuantumState {
    /// Position density `|Ψ_l|²` (per unit length).
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Index of the largest `|Ψ_l|`.
    pub fn peak_index(&self) -> usize {
        argmax(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }

    /// Momentum label sitting at the centre of the current window.
    pub fn center_label(&self) -> i64 {
        self.k_offset + (self.grid.n_points() / 2) as i64
    }

    /// Scales amplitudes so that [`discrete_norm`] is one.
    pub fn normalize(&mut self) {
        let n = discrete_norm(self);
        if n > 0.0 {
            let s = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= s);
        }
    }
}

pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// `(Σ |Ψ_l|² dx)^{1/2}`.
pub fn discrete_norm(state: &QuantumState) -> f64 {
    let sum: f64 = state.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    (sum * state.grid.dx()).sqrt()
}

/// Samples the Gaussian on the grid and renormalizes it discretely.
///
/// Each sample uses the displacement from `x0` reduced to `[-π, π)`, which is
/// the nearest periodic image; with integer `k0` the phase factor is
/// `2π`-periodic so no seam is introduced.
pub fn gaussian_packet(grid: Grid, spec: GaussianSpec) -> Result<QuantumState, ModelError> {
    let sigma = positive("sigma", spec.sigma)?;
    if sigma >= MAX_SIGMA {
        return Err(ModelError::WidthTooLarge(sigma));
    }
    let min = MIN_POINTS_PER_SIGMA * grid.dx();
    if sigma < min {
        return Err(ModelError::Underresolved { sigma, min });
    }
    if !spec.x0.is_finite() || !grid.window().contains(spec.x0) {
        return Err(ModelError::OutsideWindow {
            x0: spec.x0,
            window: grid.window(),
        });
    }

    let prefactor = (TAU * sigma * sigma).powf(-0.25);
    let inv_4var = 1.0 / (4.0 * sigma * sigma);
    let k0 = spec.k0 as f64;
    let amplitudes = (0..grid.n_points())
        .map(|l| {
            let u = Window::MinusPiToPi.reduce(l as f64 * grid.dx() - spec.x0);
            Complex64::from_polar(prefactor * (-u * u * inv_4var).exp(), k0 * u)
        })
        .collect();

    let mut state = QuantumState {
        amplitudes,
        grid,
        k_offset: spec.k0 - (grid.n_points() / 2) as i64,
        kick_count: 0,
    };
    state.normalize();
    Ok(state)
}
