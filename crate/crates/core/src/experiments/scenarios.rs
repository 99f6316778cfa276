use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ExperimentConfig, OracleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{
    lyapunov, phase_portrait, tangent_trajectory, ClassicalState, LyapunovEstimate, TangentState,
};
use crate::model::{
    derive_params, gaussian_packet, GaussianSpec, Grid, ModelError, QuantumState, SimParams, Window,
};
use crate::observables::{cumulants_from, CumulantSet, SqueezingRecord};
use crate::propagator::{
    bessel_propagate, default_band, delocalization_report, DelocalizationReport, KickPropagator,
    PropagatorError, Spectral,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error("invalid scenario input: {0}")]
    Invalid(String),
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub n: u32,
    pub k: f64,
    pub sigma: f64,
    /// Absent on the row that reports delocalization.
    pub squeezing: Option<SqueezingRecord>,
    pub cumulants: Option<CumulantSet>,
    pub delocalized: bool,
}

impl ExperimentRecord {
    pub fn s(&self) -> Option<f64> {
        self.squeezing.map(|r| r.s)
    }

    pub fn d(&self) -> Option<f64> {
        self.squeezing.map(|r| r.d)
    }

    pub fn ln_s(&self) -> Option<f64> {
        self.s().map(f64::ln)
    }

    pub fn ln_d(&self) -> Option<f64> {
        self.d().map(f64::ln)
    }
}

/// `|Ψ(x)|` and `|A_k|` at one kick.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub n: u32,
    pub k: f64,
    pub x: Vec<f64>,
    pub abs_psi: Vec<f64>,
    pub labels: Vec<i64>,
    pub abs_a: Vec<f64>,
}

/// Builds the coherent initial state and its parameters for one `(K, σ, x0)`.
pub fn initial_state(
    k: f64,
    sigma: f64,
    x0: f64,
    cfg: &ExperimentConfig,
) -> Result<(SimParams, QuantumState), ExperimentError> {
    let params = derive_params(k, sigma, cfg.hbar)?;
    let window = if Window::ZeroToTwoPi.distance_to_edge(Window::ZeroToTwoPi.reduce(x0)) < PI / 2.0
    {
        Window::MinusPiToPi
    } else {
        Window::ZeroToTwoPi
    };
    let grid = Grid::new(cfg.n_points, window)?;
    let state = gaussian_packet(grid, GaussianSpec::new(window.reduce(x0), cfg.k0, sigma))?;
    Ok((params, state))
}

/// Evolves one packet for `n_kicks`, recording the state after every kick
/// (and before the first). Stops at the first delocalized state, which gets
/// a flag-only row.
pub fn evolve_packet(
    k: f64,
    sigma: f64,
    x0: f64,
    n_kicks: u32,
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let (params, mut state) = initial_state(k, sigma, x0, cfg)?;
    let mut prop = KickPropagator::new(cfg.n_points, params).with_epsilon(Some(cfg.epsilon));
    let mut records = Vec::with_capacity(n_kicks as usize + 1);
    loop {
        let amps = prop.spectral().forward(&state);
        let report = delocalization_report(&state, &amps, cfg.epsilon);
        if !report.is_localized() {
            records.push(ExperimentRecord {
                n: state.kick_count,
                k,
                sigma,
                squeezing: None,
                cumulants: None,
                delocalized: true,
            });
            break;
        }
        let cums = cumulants_from(prop.spectral(), &state, &amps, params.hbar());
        records.push(ExperimentRecord {
            n: state.kick_count,
            k,
            sigma,
            squeezing: Some(SqueezingRecord::from_cumulants(&cums, &params)),
            cumulants: Some(cums),
            delocalized: false,
        });
        if state.kick_count >= n_kicks {
            break;
        }
        prop.step(&mut state)?;
    }
    Ok(records)
}

fn run_over_k<T: Send>(
    cfg: &ExperimentConfig,
    f: impl Fn(f64) -> Result<T, ExperimentError> + Sync,
) -> Result<Vec<T>, ExperimentError> {
    // collect() on an indexed parallel iterator keeps K order
    cfg.k_grid.values().par_iter().map(|&k| f(k)).collect()
}

/// Classical companion of a time series row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPoint {
    pub n: u32,
    pub k: f64,
    /// Classical angle and physical momentum `P / β`.
    pub x: f64,
    pub p: f64,
    /// `[(Δx)² + (Δp)²]^{1/2}` with `Δp = ΔP / β`.
    pub d_cl: f64,
}

/// Initial tangent vector `(σ, ħ/2σ)` in `(x, p)` units, scaled to unit length
/// and converted to map units `(Δx, β Δp)`.
pub fn initial_tangent(params: &SimParams) -> TangentState {
    let dx = params.sigma();
    let dp = params.hbar() / (2.0 * params.sigma());
    let norm = dx.hypot(dp);
    TangentState::new(dx / norm, params.beta() * dp / norm)
}

pub fn classical_companion(
    params: &SimParams,
    x0: f64,
    p0: f64,
    n_kicks: u32,
) -> Vec<ClassicalPoint> {
    let beta = params.beta();
    let s0 = ClassicalState::new(x0, beta * p0);
    let (states, tangents) =
        tangent_trajectory(s0, initial_tangent(params), params.k(), n_kicks as usize);
    states
        .iter()
        .zip(&tangents)
        .enumerate()
        .map(|(n, (s, t))| ClassicalPoint {
            n: n as u32,
            k: params.k(),
            x: s.x,
            p: s.p / beta,
            d_cl: t.dx.hypot(t.dp / beta),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub records: Vec<ExperimentRecord>,
    pub classical: Vec<ClassicalPoint>,
}

/// S, d and θ* after every kick for each K, plus the matched classical orbit.
pub fn run_time_series(cfg: &ExperimentConfig) -> Result<TimeSeries, ExperimentError> {
    let per_k = run_over_k(cfg, |k| {
        let records = evolve_packet(k, cfg.sigma, cfg.x0, cfg.n_kicks, cfg)?;
        let params = derive_params(k, cfg.sigma, cfg.hbar)?;
        let p0 = cfg.hbar * cfg.k0 as f64;
        Ok((
            records,
            classical_companion(&params, cfg.x0, p0, cfg.n_kicks),
        ))
    })?;
    let mut out = TimeSeries {
        records: Vec::new(),
        classical: Vec::new(),
    };
    for (r, c) in per_k {
        out.records.extend(r);
        out.classical.extend(c);
    }
    Ok(out)
}

/// One row per K at kick `n_fixed`; a flag-only row if the packet
/// delocalized earlier.
pub fn run_k_sweep(
    cfg: &ExperimentConfig,
    n_fixed: u32,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    if n_fixed < 1 {
        return Err(ExperimentError::Invalid(
            "n_fixed must be at least 1".into(),
        ));
    }
    run_over_k(cfg, |k| {
        let records = evolve_packet(k, cfg.sigma, cfg.x0, n_fixed, cfg)?;
        Ok(records
            .into_iter()
            .last()
            .expect("at least the initial row"))
    })
}

/// Per K: `S_min` over kicks `1..=n_window` and `d_max` over the same kicks.
/// The sweep ends at the first K whose packet delocalizes before `n_window`;
/// that K and every larger one are left out.
pub fn run_extrema_sweep(
    cfg: &ExperimentConfig,
    n_window: u32,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    if n_window < 1 {
        return Err(ExperimentError::Invalid(
            "n_window must be at least 1".into(),
        ));
    }
    let rows = run_over_k(cfg, |k| {
        let records = evolve_packet(k, cfg.sigma, cfg.x0, n_window, cfg)?;
        if records.iter().any(|r| r.delocalized) {
            return Ok(None);
        }
        let kicked: Vec<SqueezingRecord> = records
            .iter()
            .filter(|r| r.n >= 1)
            .filter_map(|r| r.squeezing)
            .collect();
        let min_s = kicked
            .iter()
            .min_by(|a, b| a.s.total_cmp(&b.s))
            .copied()
            .expect("n_window >= 1");
        let d_max = kicked.iter().map(|r| r.d).fold(f64::NEG_INFINITY, f64::max);
        Ok(Some(ExperimentRecord {
            n: n_window,
            k,
            sigma: cfg.sigma,
            squeezing: Some(SqueezingRecord { d: d_max, ..min_s }),
            cumulants: None,
            delocalized: false,
        }))
    })?;
    Ok(rows.into_iter().map_while(|r| r).collect())
}

/// Time series of S for each width at `cfg.sigma_sweep_k`.
pub fn run_sigma_sweep(
    cfg: &ExperimentConfig,
    sigma_list: &[f64],
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let min = crate::model::MIN_POINTS_PER_SIGMA * std::f64::consts::TAU / cfg.n_points as f64;
    if let Some(s) = sigma_list.iter().find(|&&s| s < min) {
        return Err(ExperimentError::Model(ModelError::Underresolved {
            sigma: *s,
            min,
        }));
    }
    let per_sigma: Result<Vec<_>, _> = sigma_list
        .par_iter()
        .map(|&sigma| evolve_packet(cfg.sigma_sweep_k, sigma, cfg.x0, cfg.n_kicks, cfg))
        .collect();
    Ok(per_sigma?.into_iter().flatten().collect())
}

/// Optimal phases of two packets started `perturbation_dx` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseStabilityRecord {
    pub n: u32,
    pub k: f64,
    pub sigma: f64,
    pub theta_1: f64,
    pub theta_2: f64,
    /// `θ₁* − θ₂*`.
    pub d: f64,
    pub sin_2d: f64,
    /// Either phase was degenerate (any θ optimal).
    pub degenerate: bool,
}

/// Per K and kick: `D = θ*(x0) − θ*(x0 − perturbation_dx)` and `sin 2D`,
/// while both packets stay localized.
pub fn run_phase_stability(
    cfg: &ExperimentConfig,
) -> Result<Vec<PhaseStabilityRecord>, ExperimentError> {
    if cfg.perturbation_dx < 0.0 {
        return Err(ExperimentError::Invalid(
            "perturbation_dx must be non-negative".into(),
        ));
    }
    let rows = run_over_k(cfg, |k| {
        let a = evolve_packet(k, cfg.sigma, cfg.x0, cfg.n_kicks, cfg)?;
        let b = evolve_packet(k, cfg.sigma, cfg.x0 - cfg.perturbation_dx, cfg.n_kicks, cfg)?;
        Ok(a.iter()
            .zip(&b)
            .filter_map(|(ra, rb)| {
                let (sa, sb) = (ra.squeezing?, rb.squeezing?);
                let d = sa.theta_star - sb.theta_star;
                Some(PhaseStabilityRecord {
                    n: ra.n,
                    k,
                    sigma: cfg.sigma,
                    theta_1: sa.theta_star,
                    theta_2: sb.theta_star,
                    d,
                    sin_2d: (2.0 * d).sin(),
                    degenerate: sa.degenerate_phase || sb.degenerate_phase,
                })
            })
            .collect::<Vec<_>>())
    })?;
    Ok(rows.into_iter().flatten().collect())
}

/// Local maxima of `values` above `threshold * max`, at least `min_separation`
/// samples apart, on a periodic axis.
pub fn count_subpackets(values: &[f64], threshold: f64, min_separation: usize) -> usize {
    let n = values.len();
    let peak = values.iter().copied().fold(0.0, f64::max);
    if n < 3 || peak <= 0.0 {
        return 0;
    }
    let cut = threshold * peak;
    let mut maxima: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = values[i];
            v >= cut && v > values[(i + n - 1) % n] && v >= values[(i + 1) % n]
        })
        .collect();
    // drop weaker maxima closer than min_separation to a stronger one
    maxima.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut kept: Vec<usize> = Vec::new();
    for i in maxima {
        let clear = kept.iter().all(|&j| {
            let gap = i.abs_diff(j);
            gap.min(n - gap) >= min_separation
        });
        if clear {
            kept.push(i);
        }
    }
    kept.len()
}

/// Relative height for [`count_subpackets`] in the disintegration scenario.
pub const SUBPACKET_THRESHOLD: f64 = 0.1;
/// Minimum separation, in grid points, between counted subpackets.
pub const SUBPACKET_SEPARATION: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct DisintegrationKick {
    pub n: u32,
    pub report: DelocalizationReport,
    pub subpackets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disintegration {
    pub k: f64,
    pub kicks: Vec<DisintegrationKick>,
    pub profiles: Vec<Profile>,
    /// First kick at which the packet reaches the edge of either grid.
    pub spectral_overflow_at: Option<u32>,
}

/// Evolves without terminating on delocalization, emitting profiles at the
/// requested kicks and per-kick subpacket counts.
pub fn run_disintegration(
    cfg: &ExperimentConfig,
    snapshot_kicks: &[u32],
) -> Result<Disintegration, ExperimentError> {
    let k = cfg.disintegration_k;
    let (params, mut state) = initial_state(k, cfg.sigma, cfg.x0, cfg)?;
    let mut prop = KickPropagator::new(cfg.n_points, params).with_epsilon(None);
    let last = snapshot_kicks
        .iter()
        .copied()
        .max()
        .unwrap_or(0)
        .max(cfg.n_kicks);
    let mut out = Disintegration {
        k,
        kicks: Vec::new(),
        profiles: Vec::new(),
        spectral_overflow_at: None,
    };
    loop {
        let amps = prop.spectral().forward(&state);
        let report = delocalization_report(&state, &amps, cfg.epsilon);
        let abs_psi: Vec<f64> = state.amplitudes.iter().map(|a| a.norm()).collect();
        let n = state.kick_count;
        if out.spectral_overflow_at.is_none() && !report.is_localized() {
            out.spectral_overflow_at = Some(n);
        }
        out.kicks.push(DisintegrationKick {
            n,
            report,
            subpackets: count_subpackets(&abs_psi, SUBPACKET_THRESHOLD, SUBPACKET_SEPARATION),
        });
        if snapshot_kicks.contains(&n) {
            out.profiles.push(Profile {
                n,
                k,
                x: state.grid.coordinates(),
                abs_psi,
                labels: amps.labels().collect(),
                abs_a: amps.amps.iter().map(|a| a.norm()).collect(),
            });
        }
        if n >= last {
            break;
        }
        prop.step(&mut state)?;
    }
    Ok(out)
}

/// Orbits of `cfg.portrait_seeds` random starting points at `cfg.portrait_k`.
/// Seeds are drawn uniformly from the torus with `cfg.seed`.
pub fn run_phase_portrait(cfg: &ExperimentConfig) -> (Vec<ClassicalState>, Vec<Vec<(f64, f64)>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<ClassicalState> = (0..cfg.portrait_seeds)
        .map(|_| {
            ClassicalState::new(
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-PI..PI),
            )
        })
        .collect();
    let orbits = phase_portrait(cfg.portrait_k, &seeds, cfg.portrait_kicks);
    (seeds, orbits)
}

/// Lyapunov estimate for every K in `cfg.lyapunov_k`, in that order.
pub fn run_lyapunov(cfg: &ExperimentConfig) -> Vec<(f64, LyapunovEstimate)> {
    cfg.lyapunov_k
        .iter()
        .map(|&k| {
            (
                k,
                lyapunov(k, cfg.lyapunov_kicks, cfg.lyapunov_ensemble, cfg.seed),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Largest `|A_k^{split} − A_k^{bessel}|` after each kick.
    pub deviations: Vec<f64>,
    pub worst_kick: u32,
    pub worst_label: i64,
    pub max_deviation: f64,
    pub band: usize,
    pub passed: bool,
}

/// Agreement threshold between the split-operator and Bessel-matrix kicks.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Runs both propagators side by side on a small grid.
pub fn run_oracle_check(cfg: &OracleConfig) -> Result<OracleReport, ExperimentError> {
    if cfg.n_points > 1 << 10 {
        return Err(ExperimentError::Invalid(format!(
            "oracle check needs n_points <= 1024, got {}",
            cfg.n_points
        )));
    }
    let kick = crate::model::KickStrengths {
        alpha: cfg.alpha,
        beta: cfg.beta,
        hbar: cfg.hbar,
    };
    let band = if cfg.band == 0 {
        default_band(&kick)
    } else {
        cfg.band
    };
    let grid = Grid::new(cfg.n_points, Window::ZeroToTwoPi)?;
    let mut split = gaussian_packet(grid, GaussianSpec::new(cfg.x0, cfg.k0, cfg.sigma))?;
    let mut spectral = Spectral::new(cfg.n_points);
    let mut amps = spectral.forward(&split);
    let mut prop = KickPropagator::new(cfg.n_points, kick).with_epsilon(None);

    let mut report = OracleReport {
        deviations: Vec::new(),
        worst_kick: 0,
        worst_label: 0,
        max_deviation: 0.0,
        band,
        passed: false,
    };
    for n in 1..=cfg.n_kicks {
        prop.bare_kick(&mut split);
        amps = bessel_propagate(&amps, kick, band)?;
        let via_fft = spectral.forward(&split);
        let (idx, dev) = via_fft
            .amps
            .iter()
            .zip(&amps.amps)
            .map(|(a, b)| (a - b).norm())
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (i, d)| if d > best.1 { (i, d) } else { best },
            );
        report.deviations.push(dev);
        if dev > report.max_deviation {
            report.max_deviation = dev;
            report.worst_kick = n;
            report.worst_label = amps.label(idx);
        }
    }
    report.passed = report.max_deviation < ORACLE_TOLERANCE;
    Ok(report)
}
