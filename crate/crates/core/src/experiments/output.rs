//! CSV rows, profile files and the run manifest.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::scenarios::{
    ClassicalPoint, Disintegration, ExperimentRecord, OracleReport, PhaseStabilityRecord, Profile,
};
use crate::classical::LyapunovEstimate;
use crate::propagator::Localization;

pub const RECORD_HEADER: &str = "n,K,sigma,S,S_bar,theta_star,d,ln_S,ln_d,delocalized";

/// Main scenario table; delocalized rows leave every measurement empty.
pub fn write_records_csv<W: Write>(mut w: W, records: &[ExperimentRecord]) -> io::Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    for r in records {
        match r.squeezing {
            Some(s) => writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},0",
                r.n,
                r.k,
                r.sigma,
                s.s,
                s.s_bar,
                s.theta_star,
                s.d,
                s.s.ln(),
                s.d.ln()
            )?,
            None => writeln!(
                w,
                "{},{},{},,,,,,,{}",
                r.n,
                r.k,
                r.sigma,
                u8::from(r.delocalized)
            )?,
        }
    }
    Ok(())
}

pub fn write_time_series_classical_csv<W: Write>(
    mut w: W,
    points: &[ClassicalPoint],
) -> io::Result<()> {
    writeln!(w, "n,K,x_cl,p_cl,d_cl")?;
    for p in points {
        writeln!(w, "{},{},{},{},{}", p.n, p.k, p.x, p.p, p.d_cl)?;
    }
    Ok(())
}

pub fn write_phase_stability_csv<W: Write>(
    mut w: W,
    rows: &[PhaseStabilityRecord],
) -> io::Result<()> {
    writeln!(w, "n,K,sigma,theta_1,theta_2,D,sin_2D,degenerate")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.k,
            r.sigma,
            r.theta_1,
            r.theta_2,
            r.d,
            r.sin_2d,
            u8::from(r.degenerate)
        )?;
    }
    Ok(())
}

/// Per-kick localization diagnostics of a disintegration run.
pub fn write_disintegration_csv<W: Write>(mut w: W, run: &Disintegration) -> io::Result<()> {
    writeln!(w, "n,K,subpackets,status,edge_ratio_p,edge_ratio_x")?;
    for k in &run.kicks {
        let status = match k.report.status {
            Localization::Localized => "localized",
            Localization::EdgeInMomentum => "edge_in_momentum",
            Localization::EdgeInPosition => "edge_in_position",
        };
        writeln!(
            w,
            "{},{},{},{status},{},{}",
            k.n, run.k, k.subpackets, k.report.edge_ratio_p, k.report.edge_ratio_x
        )?;
    }
    Ok(())
}

pub fn write_oracle_csv<W: Write>(mut w: W, report: &OracleReport) -> io::Result<()> {
    writeln!(w, "n,max_deviation")?;
    for (i, d) in report.deviations.iter().enumerate() {
        writeln!(w, "{},{d}", i + 1)?;
    }
    Ok(())
}

pub fn write_lyapunov_csv<W: Write>(mut w: W, rows: &[(f64, LyapunovEstimate)]) -> io::Result<()> {
    writeln!(w, "K,lambda,ln_K_over_2,regular")?;
    for (k, est) in rows {
        writeln!(
            w,
            "{k},{},{},{}",
            est.lambda,
            (k / 2.0).ln(),
            u8::from(est.regular)
        )?;
    }
    Ok(())
}

/// One orbit as `(x, P)` rows.
pub fn write_orbit_csv<W: Write>(mut w: W, orbit: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "x,P")?;
    for (x, p) in orbit {
        writeln!(w, "{x},{p}")?;
    }
    Ok(())
}

/// Two files per profile, `(x, abs_psi)` and `(k, abs_A)`. Returns the paths.
pub fn write_profiles(dir: &Path, prefix: &str, profiles: &[Profile]) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for p in profiles {
        let stem = format!("{prefix}_K{}_n{}", p.k, p.n);
        let psi_path = dir.join(format!("{stem}_psi.csv"));
        let mut f = io::BufWriter::new(fs::File::create(&psi_path)?);
        writeln!(f, "x,abs_psi")?;
        for (x, a) in p.x.iter().zip(&p.abs_psi) {
            writeln!(f, "{x},{a}")?;
        }
        f.flush()?;
        written.push(psi_path);

        let amp_path = dir.join(format!("{stem}_amp.csv"));
        let mut f = io::BufWriter::new(fs::File::create(&amp_path)?);
        writeln!(f, "k,abs_A")?;
        for (k, a) in p.labels.iter().zip(&p.abs_a) {
            writeln!(f, "{k},{a}")?;
        }
        f.flush()?;
        written.push(amp_path);
    }
    Ok(written)
}

/// Manifest body: scenario, code version and the full resolved config.
pub fn manifest_text(scenario: &str, version: &str, config: &[(&str, String)]) -> String {
    let mut s = format!("scenario = {scenario}\nversion = {version}\n");
    for (k, v) in config {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}

pub fn write_manifest(path: &Path, body: &str) -> io::Result<()> {
    fs::write(path, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::SqueezingRecord;

    #[test]
    fn record_rows() {
        let sq = SqueezingRecord {
            s: 0.5,
            s_bar: 2.5,
            theta_star: 1.0,
            quad_var_0: 1.0,
            quad_var_half_pi: 2.0,
            d: 0.01,
            degenerate_phase: false,
        };
        let rows = vec![
            ExperimentRecord {
                n: 1,
                k: 0.8,
                sigma: 0.006,
                squeezing: Some(sq),
                cumulants: None,
                delocalized: false,
            },
            ExperimentRecord {
                n: 2,
                k: 0.8,
                sigma: 0.006,
                squeezing: None,
                cumulants: None,
                delocalized: true,
            },
        ];
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RECORD_HEADER);
        assert!(lines[1].starts_with("1,0.8,0.006,0.5,2.5,1,0.01,"));
        assert!(lines[1].ends_with(",0"));
        assert_eq!(lines[2], "2,0.8,0.006,,,,,,,1");
        assert!(lines.iter().all(|l| l.split(',').count() == 10));
    }

    #[test]
    fn manifest_lists_config() {
        let body = manifest_text("k-sweep", "0.1.0", &[("sigma", "0.007".into())]);
        assert_eq!(body, "scenario = k-sweep\nversion = 0.1.0\nsigma = 0.007\n");
    }
}
