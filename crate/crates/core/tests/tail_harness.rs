use dti_core::harness::{empirical_tail, TailExperimentConfig, Verdict};

fn config(seed: u64) -> TailExperimentConfig {
    serde_json::from_value(serde_json::json!({
        "name": "lipschitz",
        "statistic": {
            "type": "lipschitz",
            "function": {"kind": "polynomial", "coeffs": [0.0, 0.0, 1.0]},
            "omega": {"omega": "polynomial", "a": 0.0, "b": 1.0}
        },
        "ensemble_a": {
            "shape": [2],
            "ensemble": {"kind": "fixed_eigenvalues", "sampler": "uniform", "low": 0.0, "high": 1.0}
        },
        "norm": {"norm": "schatten", "p": 2.0},
        "thetas": {"quantiles": [0.5, 0.9, 0.99]},
        "n_samples": 2000,
        "n_expectation_samples": 2000,
        "seed": seed
    }))
    .unwrap()
}

fn run_in_pool(threads: usize, seed: u64) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| empirical_tail(&config(seed), None).unwrap().to_csv())
}

#[test]
fn report_is_independent_of_pool_size() {
    assert_eq!(run_in_pool(1, 3), run_in_pool(3, 3));
}

#[test]
fn different_seeds_give_different_samples() {
    assert_ne!(run_in_pool(2, 3), run_in_pool(2, 4));
}

#[test]
fn small_lipschitz_run_passes() {
    let r = empirical_tail(&config(9), None).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert_eq!(r.failed_samples, 0);
    for row in &r.rows {
        assert_eq!(row.verdict, Verdict::Pass);
        assert!(row.ci_lo <= row.p_hat && row.p_hat <= row.ci_hi);
    }
}

#[test]
fn unknown_field_is_rejected() {
    let mut v = serde_json::to_value(config(1)).unwrap();
    v["n_sample"] = serde_json::json!(10);
    assert!(serde_json::from_value::<TailExperimentConfig>(v).is_err());
}
