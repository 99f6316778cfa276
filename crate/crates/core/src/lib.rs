//! Gaussian wave packets in the quantum kicked rotator.
//!
//! The crate evolves a packet under the one-kick map `U_x U_p` with a pair of
//! FFTs per kick, measures principal squeezing of the generalized quadrature
//! `X_θ = a e^{-iθ} + a† e^{iθ}`, and compares it with the local instability of
//! the classical standard map.
//!
//! Modules, bottom up:
//!
//! * [`model`]: parameters, grid, initial packet and the state container.
//! * [`bessel`]: integer-order Bessel functions used by the matrix propagator.
//! * [`propagator`]: spectral kick map, Bessel-matrix oracle, window bookkeeping
//!   and delocalization detection.
//! * [`observables`]: cumulants, principal squeezing, optimal phase, spread.
//! * [`classical`]: standard map, tangent map, Lyapunov and local exponents.
//! * [`experiments`]: scenario drivers, sweep engine, CSV and profile output.

pub mod bessel;
pub mod classical;
pub mod experiments;
pub mod model;
pub mod observables;
pub mod propagator;

pub use model::{
    derive_params, discrete_norm, gaussian_packet, GaussianSpec, Grid, ModelError, QuantumState,
    SimParams, Window,
};
pub use num_complex::Complex64;
