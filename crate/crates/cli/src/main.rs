//! `qkr`: runs one kicked-rotator scenario and writes its CSV files plus a
//! manifest into the output directory.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use qkr_core::experiments::*;
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(
    name = "qkr",
    version,
    about = "Squeezing and local instability of wave packets in the quantum kicked rotator"
)]
struct Cli {
    #[command(subcommand)]
    scenario: Scenario,

    /// Flat `key = value` config file; `#` starts a comment.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config key; may be repeated. Applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,

    /// Directory for CSV files and the manifest.
    #[arg(
        long,
        global = true,
        env = "QKR_OUT_DIR",
        default_value = ".",
        value_name = "DIR"
    )]
    out_dir: PathBuf,

    /// Worker threads; overrides the `threads` key (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Scenario {
    /// S, d and θ* after every kick for each K, plus the classical companion orbit.
    TimeSeries,
    /// One row per K at kick `n_fixed`.
    KSweep,
    /// Minimal S and maximal d over `n_window` kicks per K.
    Extrema,
    /// Time series of S for each width in `sigma_list` at `sigma_sweep_K`.
    SigmaSweep,
    /// Difference of optimal phases between packets started `perturbation_dx` apart.
    PhaseStability,
    /// Untruncated evolution at `disintegration_K` with |Ψ| and |A| profiles.
    Disintegration,
    /// Split-operator vs Bessel-matrix propagation on a small grid (oracle keys).
    OracleCheck,
    /// Classical standard-map orbits, one CSV per seed.
    PhasePortrait,
    /// Largest Lyapunov exponent for each K in `lyapunov_K`.
    Lyapunov,
}

impl Scenario {
    #[cfg(test)]
    const ALL: [Scenario; 9] = [
        Scenario::TimeSeries,
        Scenario::KSweep,
        Scenario::Extrema,
        Scenario::SigmaSweep,
        Scenario::PhaseStability,
        Scenario::Disintegration,
        Scenario::OracleCheck,
        Scenario::PhasePortrait,
        Scenario::Lyapunov,
    ];

    fn name(self) -> &'static str {
        match self {
            Scenario::TimeSeries => "time-series",
            Scenario::KSweep => "k-sweep",
            Scenario::Extrema => "extrema",
            Scenario::SigmaSweep => "sigma-sweep",
            Scenario::PhaseStability => "phase-stability",
            Scenario::Disintegration => "disintegration",
            Scenario::OracleCheck => "oracle-check",
            Scenario::PhasePortrait => "phase-portrait",
            Scenario::Lyapunov => "lyapunov",
        }
    }
}

fn parse_override(text: &str) -> Result<(String, String), String> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{text}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{text}`"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn keys_help() -> String {
    let width = CONFIG_KEYS
        .iter()
        .chain(ORACLE_KEYS)
        .map(|(k, _)| k.len())
        .max()
        .unwrap_or(0);
    let mut s = String::from("Config keys (all scenarios except oracle-check):\n");
    for (k, d) in CONFIG_KEYS {
        s.push_str(&format!("  {k:width$}  {d}\n"));
    }
    s.push_str("\nOracle keys (oracle-check):\n");
    for (k, d) in ORACLE_KEYS {
        s.push_str(&format!("  {k:width$}  {d}\n"));
    }
    s.push_str("\nExit status: 0 success, 1 I/O or runtime error, 2 usage error, 3 config error, 4 validation failure.");
    s
}

fn command() -> clap::Command {
    Cli::command().after_help(keys_help())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(String),
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Config(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Config(m)
            | Failure::Validation(m)
            | Failure::Runtime(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(format!("config error: {e}"))
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Model(m) => Failure::Config(format!("config error: {m}")),
            ExperimentError::Invalid(m) => Failure::Config(format!("config error: {m}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

/// Collects the files a scenario writes so the manifest can list them.
struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    ) -> io::Result<()> {
        let mut f = BufWriter::new(fs::File::create(self.dir.join(name))?);
        write(&mut f)?;
        f.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn manifest_hash(body: &str) -> String {
    Sha256::digest(body.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn run(args: impl IntoIterator<Item = OsString>) -> Result<String, Failure> {
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => return Ok(e.to_string()),
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| Failure::Usage(e.to_string()))?;

    let text =
        match &cli.config {
            Some(path) => Some(fs::read_to_string(path).map_err(|e| {
                Failure::Usage(format!("cannot read config {}: {e}", path.display()))
            })?),
            None => None,
        };
    let scenario = cli.scenario;
    fs::create_dir_all(&cli.out_dir)?;
    let mut out = Outputs {
        dir: &cli.out_dir,
        files: Vec::new(),
    };

    let (pairs, summary, passed) = if scenario == Scenario::OracleCheck {
        let cfg = OracleConfig::from_sources(text.as_deref(), &cli.overrides)?;
        let report = run_oracle_check(&cfg).map_err(|e| match e {
            ExperimentError::Propagator(p) => Failure::Validation(format!("oracle-check: {p}")),
            other => other.into(),
        })?;
        out.csv("oracle-check.csv", |w| write_oracle_csv(w, &report))?;
        let summary = format!(
            "oracle-check: max deviation {:.3e} at kick {}, label {} (band {}): {}",
            report.max_deviation,
            report.worst_kick,
            report.worst_label,
            report.band,
            if report.passed { "pass" } else { "FAIL" }
        );
        (cfg.to_pairs(), summary, report.passed)
    } else {
        let cfg = ExperimentConfig::from_sources(text.as_deref(), &cli.overrides)?;
        let threads = cli.threads.unwrap_or(cfg.threads);
        if threads > 0 {
            // fails only if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
        let summary = run_scenario(scenario, &cfg, &mut out)?;
        let mut pairs = cfg.to_pairs();
        if let Some(t) = cli.threads {
            if let Some(p) = pairs.iter_mut().find(|(k, _)| *k == "threads") {
                p.1 = t.to_string();
            }
        }
        (pairs, summary, true)
    };

    let mut body = manifest_text(scenario.name(), env!("CARGO_PKG_VERSION"), &pairs);
    body.push_str(&format!("outputs = {}\n", out.files.join(",")));
    let hash = manifest_hash(&body);
    body.push_str(&format!("hash = {hash}\n"));
    write_manifest(
        &cli.out_dir.join(format!("{}.manifest", scenario.name())),
        &body,
    )?;

    if passed {
        Ok(summary)
    } else {
        Err(Failure::Validation(summary))
    }
}

fn run_scenario(
    scenario: Scenario,
    cfg: &ExperimentConfig,
    out: &mut Outputs,
) -> Result<String, Failure> {
    let name = scenario.name();
    let main_csv = format!("{name}.csv");
    let summary = match scenario {
        Scenario::TimeSeries => {
            let ts = run_time_series(cfg)?;
            out.csv(&main_csv, |w| write_records_csv(w, &ts.records))?;
            out.csv("time-series_classical.csv", |w| {
                write_time_series_classical_csv(w, &ts.classical)
            })?;
            format!(
                "{} quantum rows, {} classical rows",
                ts.records.len(),
                ts.classical.len()
            )
        }
        Scenario::KSweep => {
            let rows = run_k_sweep(cfg, cfg.n_fixed)?;
            out.csv(&main_csv, |w| write_records_csv(w, &rows))?;
            let flagged = rows.iter().filter(|r| r.delocalized).count();
            format!(
                "{} K rows at n = {}, {flagged} delocalized",
                rows.len(),
                cfg.n_fixed
            )
        }
        Scenario::Extrema => {
            let rows = run_extrema_sweep(cfg, cfg.n_window)?;
            out.csv(&main_csv, |w| write_records_csv(w, &rows))?;
            match cfg.k_grid.values().get(rows.len()) {
                Some(k) => format!(
                    "{} K rows; delocalized within {} kicks from K = {k}",
                    rows.len(),
                    cfg.n_window
                ),
                None => format!("{} K rows, all localized", rows.len()),
            }
        }
        Scenario::SigmaSweep => {
            let rows = run_sigma_sweep(cfg, &cfg.sigma_list)?;
            out.csv(&main_csv, |w| write_records_csv(w, &rows))?;
            format!(
                "{} rows for {} widths at K = {}",
                rows.len(),
                cfg.sigma_list.len(),
                cfg.sigma_sweep_k
            )
        }
        Scenario::PhaseStability => {
            let rows = run_phase_stability(cfg)?;
            out.csv(&main_csv, |w| write_phase_stability_csv(w, &rows))?;
            format!("{} rows", rows.len())
        }
        Scenario::Disintegration => {
            let run = run_disintegration(cfg, &cfg.snapshot_kicks)?;
            out.csv(&main_csv, |w| write_disintegration_csv(w, &run))?;
            for path in write_profiles(out.dir, name, &run.profiles)? {
                out.files
                    .push(path.file_name().unwrap().to_string_lossy().into_owned());
            }
            match run.spectral_overflow_at {
                Some(n) => format!(
                    "{} kicks, packet reaches a grid edge at n = {n}",
                    run.kicks.len() - 1
                ),
                None => format!(
                    "{} kicks, packet stays inside both grids",
                    run.kicks.len() - 1
                ),
            }
        }
        Scenario::PhasePortrait => {
            let (_, orbits) = run_phase_portrait(cfg);
            for (i, orbit) in orbits.iter().enumerate() {
                out.csv(&format!("{name}_seed{i}.csv"), |w| {
                    write_orbit_csv(w, orbit)
                })?;
            }
            format!(
                "{} orbits of {} kicks at K = {}",
                orbits.len(),
                cfg.portrait_kicks,
                cfg.portrait_k
            )
        }
        Scenario::Lyapunov => {
            let rows = run_lyapunov(cfg);
            out.csv(&main_csv, |w| write_lyapunov_csv(w, &rows))?;
            rows.iter()
                .map(|(k, e)| format!("K={k}: {:.4}", e.lambda))
                .collect::<Vec<_>>()
                .join(", ")
        }
        Scenario::OracleCheck => unreachable!("handled with its own config"),
    };
    Ok(format!("{name}: {summary}"))
}

fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.message().trim_end());
            ExitCode::from(f.code())
        }
    }
}
