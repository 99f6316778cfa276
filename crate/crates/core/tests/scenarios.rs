use std::f64::consts::PI;

use qkr_core::experiments::*;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n_points: 1 << 13,
        k_grid: KGrid::range(0.2, 2.0, 0.2),
        ..ExperimentConfig::default()
    }
}

fn csv(records: &[ExperimentRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records_csv(&mut buf, records).unwrap();
    buf
}

fn spearman_negative(xs: &[f64], ys: &[f64]) -> bool {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, i) in idx.into_iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let m = (xs.len() as f64 - 1.0) / 2.0;
    rx.iter()
        .zip(&ry)
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        < 0.0
}

#[test]
fn sweeps_are_identical_across_thread_counts() {
    let cfg = small();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| csv(&run_k_sweep(&cfg, 3).unwrap()))
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, csv(&run_k_sweep(&cfg, 3).unwrap()));
}

#[test]
fn time_series_rows_stay_grouped_by_k() {
    let mut cfg = small();
    cfg.n_kicks = 4;
    let ts = run_time_series(&cfg).unwrap();
    let ks = cfg.k_grid.values();
    let mut expected_k = ks.iter();
    let mut current = *expected_k.next().unwrap();
    let mut last_n = None;
    for r in &ts.records {
        if r.n == 0 {
            if last_n.is_some() {
                current = *expected_k.next().expect("more rows than K values");
            }
        } else {
            assert_eq!(Some(r.n - 1), last_n, "kicks out of order at K={}", r.k);
        }
        assert_eq!(r.k, current);
        last_n = Some(r.n);
        if let Some(sq) = r.squeezing {
            assert!(sq.s * sq.s_bar >= 1.0 - 1e-9);
            assert!((0.0..PI).contains(&sq.theta_star));
            assert!(sq.s > 0.0 && sq.d > 0.0);
        } else {
            assert!(r.delocalized);
        }
    }
    assert!(expected_k.next().is_none());
    assert_eq!(ts.classical.len(), ks.len() * 5);
}

#[test]
fn weak_kicks_barely_squeeze() {
    let mut cfg = small();
    cfg.k_grid = KGrid::from_values(vec![1e-6]);
    cfg.n_kicks = 3;
    let ts = run_time_series(&cfg).unwrap();
    for r in &ts.records {
        assert!(
            (r.s().unwrap() - 1.0).abs() < 0.05,
            "n={} S={:?}",
            r.n,
            r.s()
        );
    }
}

#[test]
fn squeezing_grows_with_k_from_both_starts() {
    for x0 in [PI, PI / 2.0] {
        let mut cfg = small();
        cfg.x0 = x0;
        let rows = run_k_sweep(&cfg, 2).unwrap();
        let (ks, ls): (Vec<f64>, Vec<f64>) =
            rows.iter().filter_map(|r| Some((r.k, r.ln_s()?))).unzip();
        assert!(ks.len() >= 8);
        assert!(spearman_negative(&ks, &ls), "x0={x0}: {ls:?}");
    }
}

#[test]
fn one_kick_window_reduces_to_the_k_sweep() {
    let cfg = small();
    let ext = run_extrema_sweep(&cfg, 1).unwrap();
    let sweep = run_k_sweep(&cfg, 1).unwrap();
    assert_eq!(ext.len(), sweep.len());
    for (a, b) in ext.iter().zip(&sweep) {
        assert_eq!(a.k, b.k);
        assert_eq!(a.s(), b.s());
        assert_eq!(a.d(), b.d());
    }
}

#[test]
fn extrema_sweep_stops_at_first_delocalized_k() {
    let mut cfg = small();
    cfg.sigma = 0.007;
    cfg.k_grid = KGrid::range(1.0, 2.0, 0.1);
    let ext = run_extrema_sweep(&cfg, 6).unwrap();
    let ks = cfg.k_grid.values();
    assert!(ext.len() < ks.len());
    for (r, k) in ext.iter().zip(ks) {
        assert_eq!(r.k, *k);
        assert!(!r.delocalized);
    }
    let stop = ks[ext.len()];
    let rows = evolve_packet(stop, cfg.sigma, cfg.x0, 6, &cfg).unwrap();
    assert!(rows.last().unwrap().delocalized);
}

#[test]
fn narrower_packets_squeeze_more() {
    let mut cfg = small();
    cfg.n_points = 1 << 14;
    cfg.n_kicks = 2;
    let rows = run_sigma_sweep(&cfg, &[0.004, 0.005, 0.006, 0.007]).unwrap();
    let at_two: Vec<f64> = rows
        .iter()
        .filter(|r| r.n == 2)
        .filter_map(|r| r.s())
        .collect();
    assert_eq!(at_two.len(), 4);
    assert!(at_two.windows(2).all(|w| w[0] < w[1]), "{at_two:?}");
    assert!(rows
        .iter()
        .filter(|r| r.n == 0)
        .all(|r| (r.s().unwrap() - 1.0).abs() < 1e-8));
}

#[test]
fn phase_stability_output_is_deterministic() {
    let mut cfg = small();
    cfg.n_kicks = 3;
    let write = |rows: &[PhaseStabilityRecord]| {
        let mut buf = Vec::new();
        write_phase_stability_csv(&mut buf, rows).unwrap();
        buf
    };
    let a = run_phase_stability(&cfg).unwrap();
    assert_eq!(write(&a), write(&run_phase_stability(&cfg).unwrap()));
    for r in &a {
        assert!((r.sin_2d - (2.0 * (r.theta_1 - r.theta_2)).sin()).abs() < 1e-15);
        if r.n == 0 {
            assert!(r.degenerate);
        }
    }
}

#[test]
fn disintegration_ignores_delocalization() {
    let mut cfg = small();
    cfg.n_kicks = 30;
    let run = run_disintegration(&cfg, &[0, 30]).unwrap();
    assert_eq!(run.kicks.len(), 31);
    assert_eq!(run.profiles.len(), 2);
    assert_eq!(run.kicks[0].subpackets, 1);
    let flagged = run
        .kicks
        .iter()
        .position(|k| !k.report.is_localized())
        .map(|i| i as u32);
    assert_eq!(run.spectral_overflow_at, flagged);
    assert!(flagged.is_some());
    let p = &run.profiles[1];
    assert_eq!(p.x.len(), cfg.n_points);
    assert_eq!(p.labels.len(), cfg.n_points);
    let total: f64 = p.abs_a.iter().map(|a| a * a).sum();
    assert!((total - 1.0).abs() < 1e-10);
}
