//! Distributional laws of Dirichlet-process draws against Beta and Dirichlet
//! references built from `statrs` quantile functions.

use dp_invariance::dirichlet::DirichletParams;
use dp_invariance::ks;
use dp_invariance::process::{self, BaseCdf, DpParams};
use dp_invariance::simplex::ProbVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{Beta, ContinuousCDF};

const LEVEL: f64 = 0.01;

fn beta_sample(a: f64, b: f64, n: usize, seed: u64) -> Vec<f64> {
    let beta = Beta::new(a, b).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| beta.inverse_cdf(rand::Rng::random_range(&mut rng, 1e-12..1.0 - 1e-12)))
        .collect()
}

#[test]
fn stick_breaking_cell_masses_follow_beta_laws() {
    let alpha = 5.0;
    let dp = DpParams::new(alpha, BaseCdf::uniform(0.0, 1.0).unwrap()).unwrap();
    let draws = process::sample_process(&dp, 1e-8, 99, 10_000).unwrap();
    assert!(draws.iter().all(|d| d.truncation_mass <= 1e-8));
    for (k, (a, b)) in [(0.0, 0.3), (0.3, 0.35), (0.5, 1.0), (0.15, 0.85)]
        .into_iter()
        .enumerate()
    {
        let masses: Vec<f64> = draws.iter().map(|d| d.mass(a, b)).collect();
        let w = b - a;
        let reference = beta_sample(alpha * w, alpha * (1.0 - w), 10_000, k as u64);
        let out = ks::two_sample_test(&masses, &reference, LEVEL);
        assert!(out.pass, "cell ({a}, {b}]: {out:?}");
    }
}

#[test]
fn gaussian_base_cell_masses_follow_beta_laws() {
    let alpha = 2.0;
    let dp = DpParams::new(alpha, BaseCdf::gaussian(1.0, 2.0).unwrap()).unwrap();
    let draws = process::sample_process(&dp, 1e-8, 7, 10_000).unwrap();
    let masses: Vec<f64> = draws.iter().map(|d| d.cdf_at(1.0)).collect();
    let reference = beta_sample(1.0, 1.0, 10_000, 40);
    let out = ks::two_sample_test(&masses, &reference, LEVEL);
    assert!(out.pass, "{out:?}");
}

#[test]
fn finite_marginal_matches_cell_masses() {
    let dp = DpParams::new(3.0, BaseCdf::gaussian(0.0, 1.0).unwrap()).unwrap();
    let marginal = process::finite_marginal(&dp, &[-1.0, 0.0, 2.0]).unwrap();
    let expected = [
        0.158_655_253_931_457_05,
        0.341_344_746_068_542_9,
        0.477_249_868_051_820_8,
        0.022_750_131_948_179_195,
    ];
    // statrs' normal CDF carries about 1e-10 relative error.
    for (got, want) in marginal.concentration_vector().iter().zip(expected) {
        assert!((got - 3.0 * want).abs() < 1e-9, "{got} vs {}", 3.0 * want);
    }
}

#[test]
fn dirichlet_aggregation_property() {
    // Sum of the first two components of Dir(1, 2, 3) is Beta(3, 3).
    let params = DirichletParams::from_concentration_vector(vec![1.0, 2.0, 3.0]).unwrap();
    let sums: Vec<f64> = params
        .sample(5, 10_000)
        .draws
        .iter()
        .map(|t| t.as_slice()[0] + t.as_slice()[1])
        .collect();
    let out = ks::two_sample_test(&sums, &beta_sample(3.0, 3.0, 10_000, 6), LEVEL);
    assert!(out.pass, "{out:?}");
}

#[test]
fn posterior_mixture_base_and_exact_empirical_draws() {
    let data = [0.1, 0.4, 0.4, 0.9];
    let prior = DpParams::new(2.0, BaseCdf::uniform(0.0, 1.0).unwrap()).unwrap();
    let post = process::posterior_update(&prior, &data).unwrap();
    assert_eq!(post.concentration(), 6.0);
    // F(0.4) = (2·0.4 + 3)/6.
    assert!((post.base().cdf_at(0.4) - 3.8 / 6.0).abs() < 1e-15);
    assert!((post.base().cdf_left(0.4) - 1.8 / 6.0).abs() < 1e-15);

    // Draws of DP(n, F̂ₙ) put Dirichlet(1, 2, 1) weights on the atoms.
    let ecdf = process::empirical_cdf(&data).unwrap();
    let draws = process::bayesian_bootstrap_draws(&ecdf, 4, 3, 10_000).unwrap();
    let middle: Vec<f64> = draws.iter().map(|d| d.weights[1]).collect();
    let out = ks::two_sample_test(&middle, &beta_sample(2.0, 2.0, 10_000, 8), LEVEL);
    assert!(out.pass, "{out:?}");
}

#[test]
fn mixture_base_quantiles_are_generalised_inverses() {
    let ecdf = process::empirical_cdf(&[0.2, 0.5, 0.5]).unwrap();
    let base = BaseCdf::mixture(
        ProbVector::new(vec![1.0, 3.0]).unwrap(),
        vec![BaseCdf::uniform(0.0, 1.0).unwrap(), BaseCdf::Empirical(ecdf)],
    )
    .unwrap();
    for k in 1..200 {
        let u = k as f64 / 200.0;
        let x = base.inverse_cdf(u);
        assert!(base.cdf_at(x) >= u - 1e-12);
        assert!(base.cdf_left(x) <= u + 1e-12);
    }
}
