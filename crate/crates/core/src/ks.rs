//! Two-sample Kolmogorov–Smirnov statistic and its asymptotic critical value.

use serde::{Deserialize, Serialize};

/// Outcome of a two-sample KS comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical_value: f64,
    pub level: f64,
    pub pass: bool,
}

/// `sup_x |F_x(x) − F_y(x)|` for the empirical CDFs of the two samples.
///
/// Ties (within and across samples) are handled by advancing both samples
/// past each distinct value before comparing. Panics on NaN input.
pub fn two_sample_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.is_empty() || ys.is_empty() {
        return if xs.len() == ys.len() { 0.0 } else { 1.0 };
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / n - j as f64 / m).abs());
    }
    // One sample is exhausted; the gap is maximal right here or already seen.
    sup.max((i as f64 / n - j as f64 / m).abs())
}

/// Asymptotic critical value `c(α)·√((n+m)/(nm))`, `c(α) = √(−ln(α/2)/2)`.
pub fn critical_value(level: f64, n: usize, m: usize) -> f64 {
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Rejects equality of distributions when the statistic reaches the critical value.
pub fn two_sample_test(xs: &[f64], ys: &[f64], level: f64) -> KsOutcome {
    let statistic = two_sample_statistic(xs, ys);
    let critical_value = critical_value(level, xs.len(), ys.len());
    KsOutcome {
        statistic,
        critical_value,
        level,
        pass: statistic < critical_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Brute force: evaluate both ECDFs at every pooled point.
    fn brute(xs: &[f64], ys: &[f64]) -> f64 {
        let ecdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
        xs.iter()
            .chain(ys)
            .map(|&t| (ecdf(xs, t) - ecdf(ys, t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let xs = [3.0, 1.0, 2.0, 2.0];
        assert_eq!(two_sample_statistic(&xs, &xs), 0.0);
    }

    #[test]
    fn disjoint_samples_have_unit_distance() {
        assert_eq!(two_sample_statistic(&[1.0, 2.0], &[3.0, 4.0, 5.0]), 1.0);
    }

    #[test]
    fn matches_brute_force_with_ties() {
        let xs = [0.1, 0.5, 0.5, 0.9, 1.3, 2.0];
        let ys = [0.5, 0.7, 0.9, 0.9, 3.0];
        assert_eq!(two_sample_statistic(&xs, &ys), brute(&xs, &ys));
        assert_eq!(two_sample_statistic(&ys, &xs), brute(&xs, &ys));
    }

    #[test]
    fn critical_value_at_one_percent() {
        // c(0.01) = 1.6276
        let c = critical_value(0.01, 10_000, 10_000);
        assert!((c - 1.627_624 * (2.0f64 / 10_000.0).sqrt()).abs() < 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn agrees_with_brute_force(
            xs in proptest::collection::vec(0u8..20, 1..40),
            ys in proptest::collection::vec(0u8..20, 1..40),
        ) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            let ys: Vec<f64> = ys.into_iter().map(f64::from).collect();
            proptest::prop_assert_eq!(two_sample_statistic(&xs, &ys), brute(&xs, &ys));
        }
    }
}
