use super::*;
use crate::model::{DensityKind, NoiseKind, RegressionKind, TruthDescriptor};
use crate::schedule::Schedule;
use crate::weights::WeightScheme;

fn base(mode: Mode) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        truth: TruthDescriptor::new(
            DensityKind::Uniform,
            RegressionKind::SineLinear {
                freq: 1.0,
                linear: vec![0.0, 1.0],
            },
            NoiseKind::Gaussian { sigma: 0.5 },
        ),
        d: 2,
        splitter: SplitterConfig::Centered {
            feature_probs: vec![0.5, 0.5],
            schedule: Schedule::Log2PowerDepth { beta: 0.5 },
        },
        honest_ratio: 0.5,
        bootstrap: None,
        n_grid: vec![64, 256],
        replications: 6,
        query_points: vec![vec![0.3, 0.6], vec![0.8, 0.1]],
        sup_grid_resolution: 5,
        p_norms: vec![1.0, 2.0],
        forest_size: 1,
        nested_path: mode == Mode::NestedPath,
        master_seed: 11,
    }
}

fn zero_truth() -> TruthDescriptor {
    TruthDescriptor::new(DensityKind::Uniform, RegressionKind::Zero, NoiseKind::None)
}

fn multinomial_boot() -> BootstrapConfig {
    BootstrapConfig {
        i_scheme: WeightScheme::Multinomial {
            m_schedule: Schedule::PolySubsample { gamma: 1.0 },
        },
        j_scheme: WeightScheme::Multinomial {
            m_schedule: Schedule::PolySubsample { gamma: 1.0 },
        },
    }
}

fn adaptive() -> SplitterConfig {
    SplitterConfig::RegularAdaptive {
        alpha: 0.3,
        feature_floor: vec![0.5, 0.5],
        schedule: Schedule::PolyNodeSize { beta: 0.5 },
    }
}

#[test]
fn noiseless_zero_regression_has_zero_error() {
    for mode in [Mode::Pointwise, Mode::Lp, Mode::NestedPath] {
        let mut cfg = base(mode);
        cfg.truth = zero_truth();
        let report = run(&cfg, RunOptions::default()).unwrap();
        for r in report.rows.iter().filter(|r| {
            ["mean_error", "mse", "lp_error_p1", "path_abs_error", "path_mse"].contains(&r.metric.as_str())
        }) {
            assert_eq!(r.value, 0.0, "{mode} {}", r.metric);
        }
    }
}

#[test]
fn same_config_same_report_for_any_thread_count() {
    for mode in [Mode::Pointwise, Mode::Uniform, Mode::Forest] {
        let mut cfg = base(mode);
        if mode == Mode::Forest {
            cfg.bootstrap = Some(multinomial_boot());
            cfg.splitter = adaptive();
            cfg.forest_size = 3;
        }
        let one = run(&cfg, RunOptions { threads: Some(1) })
            .unwrap()
            .to_csv()
            .unwrap();
        let four = run(&cfg, RunOptions { threads: Some(4) })
            .unwrap()
            .to_csv()
            .unwrap();
        let again = run(&cfg, RunOptions { threads: Some(4) })
            .unwrap()
            .to_csv()
            .unwrap();
        assert_eq!(one, four);
        assert_eq!(four, again);
    }
}

#[test]
fn replication_draws_do_not_depend_on_replication_count() {
    let mut cfg = base(Mode::Pointwise);
    let few = point_draws(&cfg, 0, 64).unwrap();
    cfg.replications = 10;
    let many = point_draws(&cfg, 0, 64).unwrap();
    for (a, b) in few.iter().zip(&many) {
        for (qa, qb) in a.queries.iter().zip(&b.queries) {
            assert_eq!(qa.t, qb.t);
            assert_eq!(qa.f, qb.f);
        }
    }
}

#[test]
fn csv_columns_in_contract_order() {
    let report = run(&base(Mode::Pointwise), RunOptions::default()).unwrap();
    let csv = String::from_utf8(report.to_csv().unwrap()).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "mode,n,query_id,x1,x2,metric,value,std_err,empty_rate,replication_count"
    );
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    for rec in reader.records() {
        let rec = rec.unwrap();
        let v: f64 = rec[6].parse().unwrap();
        let row = report.get(rec[1].parse().unwrap(), &rec[2], &rec[5]).unwrap();
        assert_eq!(v.to_bits(), row.value.to_bits());
    }
}

#[test]
fn summary_mirrors_rows() {
    let report = run(&base(Mode::Pointwise), RunOptions::default()).unwrap();
    let s = report.summary();
    for r in &report.rows {
        let m = &s["results"]["pointwise"][r.n.to_string()][&r.query_id]["metrics"][&r.metric];
        assert_eq!(m["replication_count"], r.replication_count);
        if r.value.is_finite() {
            assert_eq!(m["value"].as_f64().unwrap(), r.value);
        }
    }
}

#[test]
fn error_decomposition_reconciles() {
    let report = run(&base(Mode::Pointwise), RunOptions::default()).unwrap();
    for &n in &[64usize, 256] {
        for q in ["0", "1"] {
            let mse = report.get(n, q, "mse").unwrap();
            let bias = report.get(n, q, "bias_sq").unwrap().value;
            let var = report.get(n, q, "variance").unwrap().value;
            let k = mse.replication_count as f64;
            let recon = bias + var * (k - 1.0) / k;
            assert!((mse.value - recon).abs() <= 1e-12 * mse.value.max(1.0));
        }
    }
}

#[test]
fn root_only_uniform_density_is_exact() {
    let mut cfg = base(Mode::Uniform);
    cfg.splitter = SplitterConfig::Centered {
        feature_probs: vec![0.5, 0.5],
        schedule: Schedule::Fixed { value: 0 },
    };
    let report = run(&cfg, RunOptions::default()).unwrap();
    for &n in &cfg.n_grid {
        assert_eq!(report.get(n, "grid", "sup_density_error").unwrap().value, 0.0);
        assert_eq!(report.get(n, "grid", "min_volume").unwrap().value, 1.0);
    }
}

#[test]
fn grid_side_lengths_bounded_by_leaf_scan() {
    let mut cfg = base(Mode::Uniform);
    cfg.splitter = SplitterConfig::Uniform {
        schedule: Schedule::Log2PowerDepth { beta: 0.3 },
    };
    let report = run(&cfg, RunOptions::default()).unwrap();
    for &n in &cfg.n_grid {
        for j in 1..=2 {
            let grid = report
                .get(n, "grid", &format!("grid_side_length_{j}"))
                .unwrap()
                .value;
            let exact = report
                .get(n, "grid", &format!("sup_side_length_{j}"))
                .unwrap()
                .value;
            assert!(grid <= exact);
        }
    }
}

#[test]
fn lp_jensen_ordering() {
    let report = run(&base(Mode::Lp), RunOptions::default()).unwrap();
    for &n in &[64usize, 256] {
        for q in ["0", "1"] {
            let l1 = report.get(n, q, "lp_norm_p1").unwrap().value;
            let l2 = report.get(n, q, "lp_norm_p2").unwrap().value;
            assert!(l1 <= l2 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn nested_path_requires_flag() {
    let mut cfg = base(Mode::NestedPath);
    cfg.nested_path = false;
    assert!(matches!(run_nested_path(&cfg), Err(Error::Config { .. })));
    assert!(run_pointwise(&base(Mode::Lp)).is_err());
}

#[test]
fn nested_path_reports_proxy_rows() {
    let cfg = base(Mode::NestedPath);
    let report = run_nested_path(&cfg).unwrap();
    assert!(report.get(256, "0", "final_below_initial").is_some());
    assert!(!report.notes.is_empty());
}

#[test]
fn single_tree_forest_equals_its_tree() {
    let mut cfg = base(Mode::Forest);
    cfg.bootstrap = Some(multinomial_boot());
    cfg.splitter = adaptive();
    let report = run_forest(&cfg).unwrap();
    for &n in &cfg.n_grid {
        for q in ["0", "1"] {
            for m in ["mse", "variance", "mean_error"] {
                assert_eq!(
                    report.get(n, q, &format!("forest_{m}")).unwrap().value,
                    report.get(n, q, &format!("tree_{m}")).unwrap().value
                );
            }
        }
    }
}

#[test]
fn constant_responses_give_exact_forest() {
    let mut cfg = base(Mode::Forest);
    cfg.truth = TruthDescriptor::new(
        DensityKind::Uniform,
        RegressionKind::Linear {
            coeffs: vec![0.0, 0.0],
            intercept: 1.5,
        },
        NoiseKind::None,
    );
    cfg.bootstrap = Some(multinomial_boot());
    cfg.forest_size = 4;
    let report = run_forest(&cfg).unwrap();
    for r in report
        .rows
        .iter()
        .filter(|r| r.metric == "forest_mse" || r.metric == "forest_mean_error")
    {
        assert_eq!(r.value, 0.0);
    }
}

#[test]
fn forest_needs_bootstrap() {
    let cfg = base(Mode::Forest);
    assert!(
        matches!(run(&cfg, RunOptions::default()), Err(Error::Config { field, .. }) if field == "bootstrap")
    );
}

#[test]
fn interior_grid_avoids_midpoints() {
    let g = interior_grid(2, 4);
    assert_eq!(g.len(), 16);
    assert_eq!(g[0], vec![0.125, 0.125]);
    assert!(g.iter().flatten().all(|&v| v != 0.5));
}

#[test]
fn artifacts_written_and_hash_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = base(Mode::Pointwise);
    let report = run(&cfg, RunOptions::default()).unwrap();
    let manifest = write_artifacts(&cfg, &report, dir.path(), "0.1.0").unwrap();
    assert_eq!(manifest.output_paths.len(), 4);
    for p in &manifest.output_paths {
        assert!(p.exists());
    }
    let canonical = std::fs::read(dir.path().join(CONFIG_FILE)).unwrap();
    assert_eq!(sha256_hex(&canonical), manifest.config_hash);
    assert_eq!(manifest.config_hash, cfg.config_hash().unwrap());
}

#[test]
fn trace_medians_follow_the_schedule() {
    let mut cfg = base(Mode::Pointwise);
    cfg.splitter = SplitterConfig::Uniform {
        schedule: Schedule::Log2PowerDepth { beta: 0.5 },
    };
    cfg.n_grid = vec![64, 1024, 16384];
    cfg.replications = 60;
    let report = run(&cfg, RunOptions::default()).unwrap();
    for q in ["0", "1"] {
        assert!(report.trend(q, "leaf_mass_median").unwrap().passes);
        assert!(report.trend(q, "side_length_1_median").unwrap().passes);
        assert!(report.trend(q, "side_length_2_median").unwrap().passes);
    }
}
