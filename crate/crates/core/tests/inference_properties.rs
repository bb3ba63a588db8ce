//! Two-arm posterior analysis and the bootstrap samplers through the public API.

use dp_invariance::inference::{self, Functional, TwoArmData};
use dp_invariance::process::BaseCdf;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

fn normal_data(n: usize, mu: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = Normal::new(mu, 1.0).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn known_shift_is_recovered() {
    let data = TwoArmData::new(normal_data(2_000, 0.0, 1), normal_data(2_000, 0.75, 2)).unwrap();
    let s = inference::analyze_two_arm(&data, Functional::Mean, 2_000, 0.95, 3).unwrap();
    let sample_gap = data.treatment().iter().sum::<f64>() / 2_000.0 - data.control().iter().sum::<f64>() / 2_000.0;
    assert!((s.point_estimate - sample_gap).abs() < 4.0 * s.monte_carlo_se, "{s:?}");
    assert!(s.credible_interval.contains(sample_gap), "{s:?} gap {sample_gap}");
    assert!((s.point_estimate - 0.75).abs() < 4.0 * (2.0f64 / 2_000.0).sqrt());
    // Interval half-width close to 1.96·sqrt(2/n).
    let half = (s.credible_interval.hi - s.credible_interval.lo) / 2.0;
    assert!((half / (1.96 * (2.0f64 / 2_000.0).sqrt()) - 1.0).abs() < 0.1, "{half}");
}

#[test]
fn median_difference_matches_sorted_sample_median() {
    let a = normal_data(1_001, 0.0, 4);
    let b = normal_data(1_001, 2.0, 5);
    let median = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    };
    let gap = median(&b) - median(&a);
    let data = TwoArmData::new(a, b).unwrap();
    let s = inference::analyze_two_arm(&data, Functional::quantile(0.5).unwrap(), 2_000, 0.95, 6).unwrap();
    assert!((s.point_estimate - gap).abs() < 0.05, "{} vs {gap}", s.point_estimate);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let data = TwoArmData::new(normal_data(500, 0.0, 7), normal_data(400, 0.3, 8)).unwrap();
    for f in [Functional::Mean, Functional::CdfAt(0.1), Functional::Quantile(0.9)] {
        let one = in_pool(1, || inference::analyze_two_arm(&data, f, 500, 0.9, 9).unwrap());
        let four = in_pool(4, || inference::analyze_two_arm(&data, f, 500, 0.9, 9).unwrap());
        assert_eq!(one, four);
        let bb1 = in_pool(1, || inference::bayesian_bootstrap(data.control(), f, 300, 1).unwrap());
        let bb4 = in_pool(4, || inference::bayesian_bootstrap(data.control(), f, 300, 1).unwrap());
        assert_eq!(bb1, bb4);
    }
}

#[test]
fn location_shift_moves_every_draw_exactly() {
    // Dyadic data and shift keep the sums exact.
    let base: Vec<f64> = (0..256).map(|i| ((i * 37) % 256) as f64 / 64.0).collect();
    let shifted: Vec<f64> = base.iter().map(|x| x + 8.0).collect();
    for f in [Functional::Quantile(0.25), Functional::Quantile(0.5)] {
        let a = inference::bayesian_bootstrap(&base, f, 200, 3).unwrap();
        let b = inference::bayesian_bootstrap(&shifted, f, 200, 3).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| y - x == 8.0));
    }
    let a = inference::bayesian_bootstrap(&base, Functional::Mean, 200, 3).unwrap();
    let b = inference::bayesian_bootstrap(&shifted, Functional::Mean, 200, 3).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| (y - x - 8.0).abs() < 1e-12));
}

#[test]
fn bootstraps_agree_on_large_samples() {
    let data = normal_data(1_000, 0.0, 10);
    let out = inference::bootstrap_equivalence(&data, Functional::Mean, 5_000, 11, 0.05).unwrap();
    assert!(out.pass, "{out:?}");
    let strict = inference::bootstrap_equivalence(&data, Functional::Mean, 5_000, 11, 0.0).unwrap();
    assert!(!strict.pass);
}

#[test]
fn proper_prior_shrinks_towards_the_base() {
    let a = normal_data(20, 0.0, 12);
    let b = normal_data(20, 0.0, 13);
    let data = TwoArmData::new(a, b).unwrap();
    // A heavy prior centred at 5 on both arms pulls arm means towards 5 but
    // leaves their difference centred near the data difference.
    let prior = inference::prior_override(200.0, BaseCdf::gaussian(5.0, 0.1).unwrap(), 1e-6).unwrap();
    let s = inference::analyze_two_arm_with_prior(&data, Functional::Mean, 400, 0.95, 14, Some(&prior)).unwrap();
    assert!(
        s.control.point_estimate > 4.0 && s.treatment.point_estimate > 4.0,
        "{s:?}"
    );
    assert!(s.credible_interval.contains(0.0));
}
