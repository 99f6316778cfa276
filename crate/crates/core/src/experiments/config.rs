//! Flat `key = value` configuration shared by every scenario.
//!
//! One pair per line, `#` starts a comment. The same keys are accepted as
//! command-line overrides.

use std::f64::consts::{PI, TAU};
use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{MAX_SIGMA, MIN_POINTS_PER_SIGMA};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: expected {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Ascending list of Chirikov parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid(Vec<f64>);

impl KGrid {
    /// `start, start + step, ...` up to and including `stop` (to round-off).
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Self(
            (0..count)
                .map(|i| {
                    // round to the step's decimal grid so values print cleanly
                    let v = start + i as f64 * step;
                    (v * 1e12).round() / 1e12
                })
                .collect(),
        )
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    fn parse(text: &str) -> Option<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        match parts.as_slice() {
            [a, b, c] => {
                let (a, b, c) = (parse_real(a)?, parse_real(b)?, parse_real(c)?);
                (c > 0.0 && b >= a).then(|| Self::range(a, b, c))
            }
            [list] => parse_list(list, parse_real).map(Self),
            _ => None,
        }
    }

    fn render(&self) -> String {
        join(&self.0)
    }
}

/// Accepts plain numbers and multiples of π: `pi`, `pi/2`, `0.5*pi`, `-pi`.
fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t),
    };
    let value = if let Some(rest) = t.strip_prefix("pi") {
        let rest = rest.trim();
        if rest.is_empty() {
            PI
        } else {
            PI / rest.strip_prefix('/')?.trim().parse::<f64>().ok()?
        }
    } else {
        t.strip_suffix("pi")?
            .trim()
            .strip_suffix('*')?
            .trim()
            .parse::<f64>()
            .ok()?
            * PI
    };
    Some(sign * value)
}

fn parse_list<T>(text: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

fn join<T: Display>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_num<T: FromStr>(text: &str) -> Option<T> {
    text.trim().parse().ok()
}

fn bad(key: &str, value: &str, expected: &'static str) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    }
}

/// Splits config text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Keys of [`ExperimentConfig`] with a one-line description each.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    (
        "K_grid",
        "Chirikov parameters, `start:stop:step` or a comma list",
    ),
    ("sigma", "initial packet width in x (radians)"),
    ("hbar", "effective Planck constant"),
    ("k0", "initial momentum quantum number (integer)"),
    (
        "x0",
        "initial packet centre (radians; `pi`, `pi/2` accepted)",
    ),
    ("n_kicks", "kicks per time series"),
    ("n_points", "grid size, a power of two"),
    ("epsilon", "delocalization cutoff in (0, 1)"),
    (
        "perturbation_dx",
        "initial offset of the second packet in phase-stability runs",
    ),
    ("n_fixed", "kick at which k-sweep rows are taken"),
    ("n_window", "kick window of the extrema sweep"),
    ("sigma_list", "widths for the sigma sweep, comma list"),
    ("sigma_sweep_K", "K used by the sigma sweep"),
    ("disintegration_K", "K used by the disintegration run"),
    (
        "snapshot_kicks",
        "kicks at which disintegration profiles are written",
    ),
    ("portrait_K", "K of the phase portrait"),
    ("portrait_seeds", "number of phase-portrait orbits"),
    ("portrait_kicks", "iterations per phase-portrait orbit"),
    (
        "lyapunov_K",
        "K values for the Lyapunov estimate, comma list",
    ),
    ("lyapunov_kicks", "iterations per Lyapunov seed"),
    ("lyapunov_ensemble", "number of random seeds per K"),
    ("seed", "random seed for ensemble sampling"),
    ("threads", "worker threads, 0 = all cores"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k_grid: KGrid,
    pub sigma: f64,
    pub hbar: f64,
    pub k0: i64,
    pub x0: f64,
    pub n_kicks: u32,
    pub n_points: usize,
    pub epsilon: f64,
    pub perturbation_dx: f64,
    pub n_fixed: u32,
    pub n_window: u32,
    pub sigma_list: Vec<f64>,
    pub sigma_sweep_k: f64,
    pub disintegration_k: f64,
    pub snapshot_kicks: Vec<u32>,
    pub portrait_k: f64,
    pub portrait_seeds: usize,
    pub portrait_kicks: usize,
    pub lyapunov_k: Vec<f64>,
    pub lyapunov_kicks: usize,
    pub lyapunov_ensemble: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k_grid: KGrid::range(0.2, 2.0, 0.02),
            sigma: 0.006,
            hbar: 1e-6,
            k0: 10_000,
            x0: PI,
            n_kicks: 6,
            n_points: 1 << 17,
            epsilon: 0.002,
            perturbation_dx: 0.05,
            n_fixed: 3,
            n_window: 6,
            sigma_list: vec![0.004, 0.005, 0.006, 0.007],
            sigma_sweep_k: 0.8,
            disintegration_k: 1.2,
            snapshot_kicks: vec![6, 18],
            portrait_k: 0.8,
            portrait_seeds: 40,
            portrait_kicks: 1000,
            lyapunov_k: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            lyapunov_kicks: 10_000,
            lyapunov_ensemble: 32,
            seed: 1,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    /// Applies one override; the value is type-checked against the field.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let real = |v: &str| parse_real(v).ok_or_else(|| bad(key, v, "a real number"));
        let uint =
            |v: &str| parse_num::<u32>(v).ok_or_else(|| bad(key, v, "a non-negative integer"));
        let size =
            |v: &str| parse_num::<usize>(v).ok_or_else(|| bad(key, v, "a non-negative integer"));
        let reals =
            |v: &str| parse_list(v, parse_real).ok_or_else(|| bad(key, v, "a comma list of reals"));
        match key {
            "K_grid" => {
                self.k_grid = KGrid::parse(value)
                    .ok_or_else(|| bad(key, value, "`start:stop:step` or a comma list"))?
            }
            "sigma" => self.sigma = real(value)?,
            "hbar" => self.hbar = real(value)?,
            "k0" => self.k0 = parse_num(value).ok_or_else(|| bad(key, value, "an integer"))?,
            "x0" => self.x0 = real(value)?,
            "n_kicks" => self.n_kicks = uint(value)?,
            "n_points" => self.n_points = size(value)?,
            "epsilon" => self.epsilon = real(value)?,
            "perturbation_dx" => self.perturbation_dx = real(value)?,
            "n_fixed" => self.n_fixed = uint(value)?,
            "n_window" => self.n_window = uint(value)?,
            "sigma_list" => self.sigma_list = reals(value)?,
            "sigma_sweep_K" => self.sigma_sweep_k = real(value)?,
            "disintegration_K" => self.disintegration_k = real(value)?,
            "snapshot_kicks" => {
                self.snapshot_kicks = parse_list(value, parse_num)
                    .ok_or_else(|| bad(key, value, "a comma list of integers"))?
            }
            "portrait_K" => self.portrait_k = real(value)?,
            "portrait_seeds" => self.portrait_seeds = size(value)?,
            "portrait_kicks" => self.portrait_kicks = size(value)?,
            "lyapunov_K" => self.lyapunov_k = reals(value)?,
            "lyapunov_kicks" => self.lyapunov_kicks = size(value)?,
            "lyapunov_ensemble" => self.lyapunov_ensemble = size(value)?,
            "seed" => {
                self.seed =
                    parse_num(value).ok_or_else(|| bad(key, value, "a non-negative integer"))?
            }
            "threads" => self.threads = size(value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Defaults, then the config text, then the overrides, then validation.
    pub fn from_sources(
        text: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(text) = text {
            for (k, v) in parse_pairs(text)? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical `(key, value)` list in [`CONFIG_KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        CONFIG_KEYS
            .iter()
            .map(|&(key, _)| {
                let v = match key {
                    "K_grid" => self.k_grid.render(),
                    "sigma" => self.sigma.to_string(),
                    "hbar" => self.hbar.to_string(),
                    "k0" => self.k0.to_string(),
                    "x0" => self.x0.to_string(),
                    "n_kicks" => self.n_kicks.to_string(),
                    "n_points" => self.n_points.to_string(),
                    "epsilon" => self.epsilon.to_string(),
                    "perturbation_dx" => self.perturbation_dx.to_string(),
                    "n_fixed" => self.n_fixed.to_string(),
                    "n_window" => self.n_window.to_string(),
                    "sigma_list" => join(&self.sigma_list),
                    "sigma_sweep_K" => self.sigma_sweep_k.to_string(),
                    "disintegration_K" => self.disintegration_k.to_string(),
                    "snapshot_kicks" => join(&self.snapshot_kicks),
                    "portrait_K" => self.portrait_k.to_string(),
                    "portrait_seeds" => self.portrait_seeds.to_string(),
                    "portrait_kicks" => self.portrait_kicks.to_string(),
                    "lyapunov_K" => join(&self.lyapunov_k),
                    "lyapunov_kicks" => self.lyapunov_kicks.to_string(),
                    "lyapunov_ensemble" => self.lyapunov_ensemble.to_string(),
                    "seed" => self.seed.to_string(),
                    "threads" => self.threads.to_string(),
                    other => unreachable!("key {other} has no renderer"),
                };
                (key, v)
            })
            .collect()
    }

    fn min_sigma(&self) -> f64 {
        MIN_POINTS_PER_SIGMA * TAU / self.n_points as f64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, reason: String| Err(ConfigError::Invalid { field, reason });
        if !(self.n_points >= 8 && self.n_points.is_power_of_two()) {
            return invalid(
                "n_points",
                format!("{} is not a power of two >= 8", self.n_points),
            );
        }
        let ks = self.k_grid.values();
        if ks.is_empty() {
            return invalid("K_grid", "empty".into());
        }
        if ks.iter().any(|&k| k.is_nan() || k <= 0.0) || ks.windows(2).any(|w| w[1] <= w[0]) {
            return invalid(
                "K_grid",
                "values must be positive and strictly ascending".into(),
            );
        }
        let check_sigma = |field, s: f64| -> Result<(), ConfigError> {
            if !(s > 0.0 && s < MAX_SIGMA) {
                return invalid(field, format!("{s} outside (0, {MAX_SIGMA})"));
            }
            if s < self.min_sigma() {
                return invalid(
                    field,
                    format!(
                        "{s} is below {MIN_POINTS_PER_SIGMA}*dx = {:.3e} at n_points={}",
                        self.min_sigma(),
                        self.n_points
                    ),
                );
            }
            Ok(())
        };
        check_sigma("sigma", self.sigma)?;
        for &s in &self.sigma_list {
            check_sigma("sigma_list", s)?;
        }
        for (field, v) in [
            ("hbar", self.hbar),
            ("sigma_sweep_K", self.sigma_sweep_k),
            ("disintegration_K", self.disintegration_k),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(field, format!("{v} must be positive"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return invalid("epsilon", format!("{} outside (0, 1)", self.epsilon));
        }
        if self.perturbation_dx.is_nan() || self.perturbation_dx < 0.0 {
            return invalid("perturbation_dx", "must be non-negative".into());
        }
        if self.portrait_k < 0.0 || self.lyapunov_k.iter().any(|&k| k < 0.0) {
            return invalid("lyapunov_K", "K must be non-negative".into());
        }
        if self.n_fixed < 1 {
            return invalid("n_fixed", "must be at least 1".into());
        }
        if self.n_window < 1 {
            return invalid("n_window", "must be at least 1".into());
        }
        if self.lyapunov_kicks < 1 || self.lyapunov_ensemble < 1 {
            return invalid(
                "lyapunov_kicks",
                "kicks and ensemble must be at least 1".into(),
            );
        }
        Ok(())
    }
}

/// Keys of [`OracleConfig`].
pub const ORACLE_KEYS: &[(&str, &str)] = &[
    ("n_points", "grid size, a power of two <= 1024"),
    ("hbar", "effective Planck constant"),
    ("alpha", "kick strength"),
    ("beta", "inverse inertia"),
    ("sigma", "initial packet width"),
    ("x0", "initial packet centre"),
    ("k0", "initial momentum quantum number"),
    ("n_kicks", "kicks to compare"),
    ("band", "Bessel band half-width, 0 = ceil(alpha/hbar) + 40"),
];

/// Small-grid setup for comparing the two propagators.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub n_points: usize,
    pub hbar: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub k0: i64,
    pub n_kicks: u32,
    pub band: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_points: 256,
            hbar: 1.0,
            alpha: 2.0,
            beta: 0.5,
            sigma: 0.25,
            x0: PI,
            k0: 4,
            n_kicks: 5,
            band: 0,
        }
    }
}

impl OracleConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let real = |v: &str| parse_real(v).ok_or_else(|| bad(key, v, "a real number"));
        match key {
            "n_points" => {
                self.n_points = parse_num(value).ok_or_else(|| bad(key, value, "an integer"))?
            }
            "hbar" => self.hbar = real(value)?,
            "alpha" => self.alpha = real(value)?,
            "beta" => self.beta = real(value)?,
            "sigma" => self.sigma = real(value)?,
            "x0" => self.x0 = real(value)?,
            "k0" => self.k0 = parse_num(value).ok_or_else(|| bad(key, value, "an integer"))?,
            "n_kicks" => {
                self.n_kicks = parse_num(value).ok_or_else(|| bad(key, value, "an integer"))?
            }
            "band" => self.band = parse_num(value).ok_or_else(|| bad(key, value, "an integer"))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn from_sources(
        text: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(text) = text {
            for (k, v) in parse_pairs(text)? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n_points", self.n_points.to_string()),
            ("hbar", self.hbar.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("sigma", self.sigma.to_string()),
            ("x0", self.x0.to_string()),
            ("k0", self.k0.to_string()),
            ("n_kicks", self.n_kicks.to_string()),
            ("band", self.band.to_string()),
        ]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, reason: String| Err(ConfigError::Invalid { field, reason });
        if !(self.n_points >= 8 && self.n_points.is_power_of_two() && self.n_points <= 1 << 10) {
            return invalid(
                "n_points",
                format!("{} must be a power of two in [8, 1024]", self.n_points),
            );
        }
        if self.hbar.is_nan() || self.hbar <= 0.0 {
            return invalid("hbar", "must be positive".into());
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return invalid("alpha", "alpha and beta must be non-negative".into());
        }
        let min = MIN_POINTS_PER_SIGMA * TAU / self.n_points as f64;
        if !(self.sigma >= min && self.sigma < MAX_SIGMA) {
            return invalid(
                "sigma",
                format!("{} outside [{min:.3e}, {MAX_SIGMA})", self.sigma),
            );
        }
        Ok(())
    }
}
