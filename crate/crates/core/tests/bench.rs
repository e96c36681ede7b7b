use dictsense::bench::{
    concentration_probe, curve_csv, rip_probe, run_curve, Experiment, ExperimentConfig, MeasurementModel,
};
use dictsense::ensembles::{row_selector, EnsembleKind, EnsembleSpec};
use dictsense::factorize::FactorMethod;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn head_to_head_at_forty_measurements() {
    let c = ExperimentConfig {
        k_list: vec![4],
        cs_ratios: vec![40.0 / 256.0],
        trials: 200,
        ..Default::default()
    };
    let r = run_curve(&c).unwrap();
    let p = &r.points[0];
    assert_eq!(p.m, 40);
    let gap = p.gap().unwrap();
    assert!(gap <= 0.05, "gap {gap}");
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let c = ExperimentConfig {
        ensemble_kind: EnsembleKind::Bernoulli,
        factor_method: FactorMethod::GramSchmidt,
        grid_points: 4,
        trials: 40,
        base_seed: 77,
        ..Default::default()
    };
    let a = in_pool(1, || curve_csv(&run_curve(&c).unwrap()));
    let b = in_pool(4, || curve_csv(&run_curve(&c).unwrap()));
    let again = in_pool(4, || curve_csv(&run_curve(&c).unwrap()));
    assert_eq!(a, b);
    assert_eq!(b, again);
    let other = ExperimentConfig { base_seed: 78, ..c };
    assert_ne!(a, curve_csv(&run_curve(&other).unwrap()));
}

#[test]
fn bookkeeping_is_constant_per_point() {
    let c = ExperimentConfig {
        k_list: vec![4, 30],
        grid_points: 5,
        trials: 20,
        ..Default::default()
    };
    let r = run_curve(&c).unwrap();
    assert_eq!(r.points.len(), 10);
    for p in &r.points {
        for t in [p.ours, p.benchmark] {
            assert_eq!(t.trials_run + t.errors + p.skipped, 20);
            assert!(t.successes <= t.trials_run);
        }
        assert_eq!(p.skipped > 0, p.k > p.m);
    }
    assert!(r.max_embedding_gap <= 1e-8, "{:e}", r.max_embedding_gap);
    // informational only
    let _ = r.monotonicity_flags();
}

#[test]
fn coefficient_measurements_are_available() {
    let c = ExperimentConfig {
        k_list: vec![4],
        cs_ratios: vec![0.25],
        trials: 30,
        measurement: MeasurementModel::Coefficient,
        ..Default::default()
    };
    let r = run_curve(&c).unwrap();
    // Benchmark is unaffected by the model.
    let signal = run_curve(&ExperimentConfig {
        measurement: MeasurementModel::Signal,
        ..c
    })
    .unwrap();
    assert_eq!(r.points[0].benchmark, signal.points[0].benchmark);
}

#[test]
fn full_scale_preset_is_runnable() {
    let mut c = ExperimentConfig::preset("paper-wavelet-gaussian").unwrap();
    c.validate().unwrap();
    // shrink the run, keep the shapes
    c.k_list = vec![10];
    c.grid_points = 2;
    c.trials = 4;
    let r = run_curve(&c).unwrap();
    assert_eq!(r.points.len(), 2);
    assert_eq!(r.points[1].m, 128);
    assert!(r.max_embedding_gap <= 1e-8);
}

#[test]
fn rip_probe_mean_near_one() {
    for seed in 0..3u64 {
        let a = EnsembleSpec::new(EnsembleKind::Gaussian, 128, 1024, seed)
            .sample()
            .unwrap();
        let e = row_selector(96, 128, seed + 10).unwrap();
        let phi = a.select_rows(e.indices());
        let r = rip_probe(&phi, 10, 2000, seed).unwrap();
        assert!((0.9..=1.1).contains(&r.ratio_mean), "{}", r.ratio_mean);
        assert!(r.delta_hat > 0.0);
    }
}

#[test]
fn rip_probe_agrees_on_both_sides_of_the_embedding() {
    let c = ExperimentConfig {
        trials: 1,
        ..Default::default()
    };
    let exp = Experiment::prepare(&c).unwrap();
    let inst = exp.instance.as_ref().unwrap();
    let f = &inst.factorization;
    let e = row_selector(40, 64, 5).unwrap();
    let sd = f.g_inv.select_rows(e.indices()).matmul(&exp.d);
    let eah = f.a.select_rows(e.indices()).matmul(&f.h);
    let p = rip_probe(&sd, 6, 500, 3).unwrap();
    let q = rip_probe(&eah, 6, 500, 3).unwrap();
    assert!((p.delta_hat - q.delta_hat).abs() <= 1e-8);
    assert!((p.ratio_mean - q.ratio_mean).abs() <= 1e-8);
}

#[test]
fn concentration_of_both_ensembles() {
    for kind in [EnsembleKind::Gaussian, EnsembleKind::Bernoulli] {
        let s = concentration_probe(&EnsembleSpec::new(kind, 128, 1024, 21), 64, 5000, 8).unwrap();
        assert!((0.97..=1.03).contains(&s.mean), "{}: {}", kind.name(), s.mean);
    }
}
