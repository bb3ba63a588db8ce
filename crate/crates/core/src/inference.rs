//! Posterior inference for one- and two-arm data under `DP(n, F̂ₙ)`.
//!
//! Each arm gets its own, independent Bayesian bootstrap posterior. A
//! functional (mean, quantile, CDF value) is evaluated on paired draws and the
//! treatment-minus-control differences are summarised by their posterior mean
//! and an equal-tailed credible interval.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::process::{self, BaseCdf, DiscreteCdfDraw, DpParams, EmpiricalCdf};
use crate::rng::{self, tag};
use crate::{dirichlet, ks};
use crate::{Error, Result};

pub const MIN_ANALYSIS_DRAWS: usize = 100;
pub const MIN_EQUIVALENCE_OBSERVATIONS: usize = 100;
pub const MIN_EQUIVALENCE_DRAWS: usize = 1000;
pub const DEFAULT_KS_THRESHOLD: f64 = 0.05;

/// Summary of a random CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    Mean,
    /// Left-continuous generalised inverse at `q ∈ (0, 1)`.
    Quantile(f64),
    CdfAt(f64),
}

impl Functional {
    pub fn quantile(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(Functional::Quantile(q))
        } else {
            Err(Error::InvalidParameter(format!(
                "quantile level must lie in (0, 1), got {q}"
            )))
        }
    }

    pub fn cdf_at(t: f64) -> Result<Self> {
        if t.is_finite() {
            Ok(Functional::CdfAt(t))
        } else {
            Err(Error::InvalidParameter(format!("CDF argument must be finite, got {t}")))
        }
    }
}

/// Parses `mean`, `quantile:<q>` or `cdf:<t>`.
impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised functional `{s}`"));
        match s.split_once(':') {
            None if s == "mean" => Ok(Functional::Mean),
            Some(("quantile", q)) => Functional::quantile(q.trim().parse().map_err(|_| bad())?),
            Some(("cdf", t)) => Functional::cdf_at(t.trim().parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Mean => write!(f, "mean"),
            Functional::Quantile(q) => write!(f, "quantile:{q}"),
            Functional::CdfAt(t) => write!(f, "cdf:{t}"),
        }
    }
}

impl Serialize for Functional {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Evaluates `f` on a draw, renormalising away any truncated mass.
pub fn functional_of_draw(draw: &DiscreteCdfDraw, f: Functional) -> Result<f64> {
    weighted_functional(&draw.atoms, &draw.weights, f)
}

fn weighted_functional(atoms: &[f64], weights: &[f64], f: Functional) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if atoms.is_empty() || atoms.len() != weights.len() || !(total > 0.0) {
        return Err(Error::EmptyDraw);
    }
    let value = match f {
        Functional::Mean => atoms.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / total,
        Functional::CdfAt(t) => {
            atoms
                .iter()
                .zip(weights)
                .filter(|(a, _)| **a <= t)
                .map(|(_, w)| w)
                .sum::<f64>()
                / total
        }
        Functional::Quantile(q) => {
            let target = q * total;
            let mut order: Vec<usize> = (0..atoms.len()).collect();
            if !atoms.windows(2).all(|w| w[0] <= w[1]) {
                order.sort_by(|&i, &j| atoms[i].total_cmp(&atoms[j]));
            }
            let mut cumulative = 0.0;
            let mut chosen = atoms[order[order.len() - 1]];
            for i in order {
                cumulative += weights[i];
                if cumulative >= target {
                    chosen = atoms[i];
                    break;
                }
            }
            chosen
        }
    };
    Ok(value)
}

/// Outcomes of a control and a treatment arm, in the outcome's units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoArmData {
    control: Vec<f64>,
    treatment: Vec<f64>,
}

impl TwoArmData {
    pub fn new(control: Vec<f64>, treatment: Vec<f64>) -> Result<Self> {
        if control.is_empty() {
            return Err(Error::EmptyArm("control"));
        }
        if treatment.is_empty() {
            return Err(Error::EmptyArm("treatment"));
        }
        Ok(TwoArmData { control, treatment })
    }

    pub fn control(&self) -> &[f64] {
        &self.control
    }

    pub fn treatment(&self) -> &[f64] {
        &self.treatment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CredibleInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl CredibleInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub observations: usize,
    pub point_estimate: f64,
    pub credible_interval: CredibleInterval,
}

/// Posterior of `f(F_treatment) − f(F_control)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub functional: Functional,
    pub draws_used: usize,
    pub point_estimate: f64,
    /// Monte Carlo standard error of `point_estimate`.
    pub monte_carlo_se: f64,
    pub credible_interval: CredibleInterval,
    pub control: ArmSummary,
    pub treatment: ArmSummary,
    pub seed: u64,
}

/// Proper prior `DP(ε, F₀)` used instead of the ε → 0 limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorOverride {
    pub prior: DpParams,
    pub truncation_tol: f64,
}

/// `DP(n, F̂ₙ)` of one sample, ready for repeated draws.
struct BootstrapPosterior {
    ecdf: EmpiricalCdf,
    /// Multiplicities; `None` when every observation is distinct.
    shapes: Option<Vec<f64>>,
}

impl BootstrapPosterior {
    fn new(data: &[f64]) -> Result<Self> {
        let ecdf = EmpiricalCdf::from_data(data)?;
        let shapes = process::bootstrap_concentration(&ecdf, data.len() as u64)?;
        let distinct = shapes.iter().all(|&a| a == 1.0);
        Ok(BootstrapPosterior {
            ecdf,
            shapes: (!distinct).then_some(shapes),
        })
    }

    /// `f` of draw `index`, streamed over the atoms without materialising the
    /// draw. Consumes the generator exactly as the materialised draw does.
    fn functional(&self, f: Functional, seed: u64, stream: u64, index: u64) -> f64 {
        let atoms = self.ecdf.atoms();
        if atoms.len() == 1 {
            return match f {
                Functional::CdfAt(t) => f64::from(u8::from(atoms[0] <= t)),
                _ => atoms[0],
            };
        }
        let mut rng = rng::bulk_substream(seed, stream, index);
        match &self.shapes {
            None => stream_functional(atoms, f, |_| Exp1.sample(&mut rng)),
            Some(shapes) => stream_functional(atoms, f, |i| dirichlet::gamma_variate(shapes[i], &mut rng)),
        }
    }
}

/// `f` of the discrete CDF with weights proportional to `gamma(i)` on sorted atoms.
fn stream_functional(atoms: &[f64], f: Functional, mut gamma: impl FnMut(usize) -> f64) -> f64 {
    match f {
        Functional::Mean => {
            let (mut acc, mut total) = (0.0, 0.0);
            for (i, x) in atoms.iter().enumerate() {
                let g = gamma(i);
                acc += g * x;
                total += g;
            }
            acc / total
        }
        Functional::CdfAt(t) => {
            let (mut acc, mut total) = (0.0, 0.0);
            for (i, x) in atoms.iter().enumerate() {
                let g = gamma(i);
                if *x <= t {
                    acc += g;
                }
                total += g;
            }
            acc / total
        }
        Functional::Quantile(q) => {
            let gammas: Vec<f64> = (0..atoms.len()).map(gamma).collect();
            let target = q * gammas.iter().sum::<f64>();
            let mut cumulative = 0.0;
            for (x, g) in atoms.iter().zip(&gammas) {
                cumulative += g;
                if cumulative >= target {
                    return *x;
                }
            }
            atoms[atoms.len() - 1]
        }
    }
}

enum ArmPosterior {
    Bootstrap(BootstrapPosterior),
    Process { params: DpParams, truncation_tol: f64 },
}

impl ArmPosterior {
    fn new(data: &[f64], prior: Option<&PriorOverride>) -> Result<Self> {
        match prior {
            None => Ok(ArmPosterior::Bootstrap(BootstrapPosterior::new(data)?)),
            Some(p) => Ok(ArmPosterior::Process {
                params: process::posterior_update(&p.prior, data)?,
                truncation_tol: p.truncation_tol,
            }),
        }
    }

    fn functional(&self, f: Functional, seed: u64, stream: u64, index: u64) -> Result<f64> {
        match self {
            ArmPosterior::Bootstrap(b) => Ok(b.functional(f, seed, stream, index)),
            ArmPosterior::Process { params, truncation_tol } => {
                let mut rng = rng::substream(seed, stream, index);
                functional_of_draw(&process::stick_breaking(params, *truncation_tol, &mut rng)?, f)
            }
        }
    }
}

/// Type-7 (linear interpolation) quantile of sorted values.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn interval(values: &[f64], level: f64) -> CredibleInterval {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    CredibleInterval {
        lo: sorted_quantile(&sorted, tail),
        hi: sorted_quantile(&sorted, 1.0 - tail),
        level,
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn arm_summary(observations: usize, values: &[f64], level: f64) -> ArmSummary {
    ArmSummary {
        observations,
        point_estimate: mean_and_se(values).0,
        credible_interval: interval(values, level),
    }
}

/// Bayesian bootstrap comparison of two independent arms.
pub fn analyze_two_arm(
    data: &TwoArmData,
    f: Functional,
    draws: usize,
    level: f64,
    seed: u64,
) -> Result<PosteriorSummary> {
    analyze_two_arm_with_prior(data, f, draws, level, seed, None)
}

/// As [`analyze_two_arm`], optionally with a proper `DP(ε, F₀)` prior on each
/// arm, updated conjugately and sampled by stick-breaking.
pub fn analyze_two_arm_with_prior(
    data: &TwoArmData,
    f: Functional,
    draws: usize,
    level: f64,
    seed: u64,
    prior: Option<&PriorOverride>,
) -> Result<PosteriorSummary> {
    if draws < MIN_ANALYSIS_DRAWS {
        return Err(Error::InsufficientDraws {
            required: MIN_ANALYSIS_DRAWS,
            actual: draws,
        });
    }
    if !(level > 0.5 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in (0.5, 1), got {level}"
        )));
    }
    let control = ArmPosterior::new(&data.control, prior)?;
    let treatment = ArmPosterior::new(&data.treatment, prior)?;
    let pairs: Vec<(f64, f64)> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let c = control.functional(f, seed, tag::ARM_CONTROL, i)?;
            let t = treatment.functional(f, seed, tag::ARM_TREATMENT, i)?;
            Ok((c, t))
        })
        .collect::<Result<_>>()?;
    let (control_values, treatment_values): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let differences: Vec<f64> = control_values
        .iter()
        .zip(&treatment_values)
        .map(|(c, t)| t - c)
        .collect();
    let (point_estimate, monte_carlo_se) = mean_and_se(&differences);
    Ok(PosteriorSummary {
        functional: f,
        draws_used: draws,
        point_estimate,
        monte_carlo_se,
        credible_interval: interval(&differences, level),
        control: arm_summary(data.control.len(), &control_values, level),
        treatment: arm_summary(data.treatment.len(), &treatment_values, level),
        seed,
    })
}

/// Posterior draws of `f` under the Bayesian bootstrap `DP(n, F̂ₙ)` of `data`.
pub fn bayesian_bootstrap(data: &[f64], f: Functional, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let posterior = BootstrapPosterior::new(data)?;
    Ok((0..draws as u64)
        .into_par_iter()
        .map(|i| posterior.functional(f, seed, tag::BAYESIAN_BOOTSTRAP, i))
        .collect())
}

/// Efron's bootstrap: each draw resamples `n` observations with replacement.
pub fn frequentist_bootstrap(data: &[f64], f: Functional, draws: usize, seed: u64) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut atoms = data.to_vec();
    atoms.sort_by(f64::total_cmp);
    let n = atoms.len();
    (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::bulk_substream(seed, tag::FREQUENTIST_BOOTSTRAP, i);
            let mut counts = vec![0.0f64; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1.0;
            }
            weighted_functional(&atoms, &counts, f)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapEquivalence {
    pub ks_distance: f64,
    pub threshold: f64,
    pub draws: usize,
    pub pass: bool,
}

/// KS distance between the frequentist and Bayesian bootstrap distributions
/// of `f`; passes when below `threshold`.
pub fn bootstrap_equivalence(
    data: &[f64],
    f: Functional,
    draws: usize,
    seed: u64,
    threshold: f64,
) -> Result<BootstrapEquivalence> {
    if data.len() < MIN_EQUIVALENCE_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            required: MIN_EQUIVALENCE_OBSERVATIONS,
            actual: data.len(),
        });
    }
    if draws < MIN_EQUIVALENCE_DRAWS {
        return Err(Error::InsufficientDraws {
            required: MIN_EQUIVALENCE_DRAWS,
            actual: draws,
        });
    }
    let frequentist = frequentist_bootstrap(data, f, draws, seed)?;
    let bayesian = bayesian_bootstrap(data, f, draws, seed)?;
    let ks_distance = ks::two_sample_statistic(&frequentist, &bayesian);
    Ok(BootstrapEquivalence {
        ks_distance,
        threshold,
        draws,
        pass: ks_distance < threshold,
    })
}

/// Builds a `PriorOverride` from a concentration and base.
pub fn prior_override(concentration: f64, base: BaseCdf, truncation_tol: f64) -> Result<PriorOverride> {
    process::check_tolerance(truncation_tol)?;
    Ok(PriorOverride {
        prior: DpParams::new(concentration, base)?,
        truncation_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::StandardNormal;

    fn draw(atoms: &[f64], weights: &[f64]) -> DiscreteCdfDraw {
        DiscreteCdfDraw {
            atoms: atoms.to_vec(),
            weights: weights.to_vec(),
            truncation_mass: 0.0,
        }
    }

    fn gaussian_sample(n: usize, shift: f64, seed: u64) -> Vec<f64> {
        let mut rng = rng::substream(seed, tag::CHECK, 0);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                shift + z
            })
            .collect()
    }

    #[test]
    fn streamed_functional_matches_materialised_draw() {
        let distinct = gaussian_sample(300, 0.0, 11);
        let tied: Vec<f64> = distinct.iter().map(|x| (x * 4.0).round() / 4.0).collect();
        for data in [distinct, tied, vec![2.5; 7]] {
            let posterior = BootstrapPosterior::new(&data).unwrap();
            let shapes = process::bootstrap_concentration(&posterior.ecdf, data.len() as u64).unwrap();
            for f in [Functional::Mean, Functional::CdfAt(0.3), Functional::Quantile(0.4)] {
                for i in 0..20 {
                    let d =
                        process::bayesian_bootstrap_draw_at(&posterior.ecdf, &shapes, 5, tag::BAYESIAN_BOOTSTRAP, i);
                    let expected = functional_of_draw(&d, f).unwrap();
                    let got = posterior.functional(f, 5, tag::BAYESIAN_BOOTSTRAP, i);
                    assert!(
                        (got - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                        "{f}: {got} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn functional_examples() {
        let d = draw(&[1.0, 2.0], &[0.5, 0.5]);
        assert_eq!(functional_of_draw(&d, Functional::Mean).unwrap(), 1.5);
        assert_eq!(functional_of_draw(&d, Functional::CdfAt(1.5)).unwrap(), 0.5);
        let d = draw(&[1.0, 2.0, 3.0], &[0.2, 0.5, 0.3]);
        assert_eq!(functional_of_draw(&d, Functional::Quantile(0.6)).unwrap(), 2.0);
        assert_eq!(functional_of_draw(&d, Functional::Quantile(0.2)).unwrap(), 1.0);
        assert_eq!(
            functional_of_draw(&draw(&[], &[]), Functional::Mean),
            Err(Error::EmptyDraw)
        );
    }

    #[test]
    fn quantile_handles_unsorted_atoms_and_truncation() {
        let d = DiscreteCdfDraw {
            atoms: vec![3.0, 1.0, 2.0],
            weights: vec![0.3 * 0.9, 0.2 * 0.9, 0.5 * 0.9],
            truncation_mass: 0.1,
        };
        assert_eq!(functional_of_draw(&d, Functional::Quantile(0.6)).unwrap(), 2.0);
        assert_abs_diff_eq!(functional_of_draw(&d, Functional::Mean).unwrap(), 2.1, epsilon = 1e-12);
    }

    #[test]
    fn parses_functionals() {
        assert_eq!("mean".parse::<Functional>().unwrap(), Functional::Mean);
        assert_eq!("quantile:0.5".parse::<Functional>().unwrap(), Functional::Quantile(0.5));
        assert_eq!("cdf:-1.5".parse::<Functional>().unwrap(), Functional::CdfAt(-1.5));
        for bad in [
            "median",
            "quantile:1",
            "quantile:0",
            "quantile:x",
            "cdf:",
            "cdf:inf",
            "",
        ] {
            assert!(bad.parse::<Functional>().is_err(), "{bad}");
        }
        for f in [Functional::Mean, Functional::Quantile(0.25), Functional::CdfAt(3.0)] {
            assert_eq!(f.to_string().parse::<Functional>().unwrap(), f);
        }
    }

    #[test]
    fn shifted_arms_recover_the_shift() {
        let control = gaussian_sample(300, 0.0, 1);
        let treatment: Vec<f64> = control.iter().map(|x| x + 1.0).collect();
        let data = TwoArmData::new(control, treatment).unwrap();
        let s = analyze_two_arm(&data, Functional::Mean, 2_000, 0.95, 5).unwrap();
        assert!(
            (s.point_estimate - 1.0).abs() < 3.0 * s.monte_carlo_se.max(1e-3),
            "{s:?}"
        );
        assert!(s.credible_interval.lo <= s.credible_interval.hi);
        assert!(s.credible_interval.contains(1.0));
        assert_eq!(s.draws_used, 2_000);
    }

    #[test]
    fn analysis_rejects_bad_input() {
        assert_eq!(TwoArmData::new(vec![], vec![1.0]), Err(Error::EmptyArm("control")));
        assert_eq!(TwoArmData::new(vec![1.0], vec![]), Err(Error::EmptyArm("treatment")));
        let data = TwoArmData::new(vec![1.0, 2.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(
            analyze_two_arm(&data, Functional::Mean, 10, 0.95, 1),
            Err(Error::InsufficientDraws {
                required: 100,
                actual: 10
            })
        );
        assert!(analyze_two_arm(&data, Functional::Mean, 200, 0.4, 1).is_err());
        assert!(analyze_two_arm(&data, Functional::Mean, 200, 1.0, 1).is_err());
    }

    #[test]
    fn analysis_is_deterministic() {
        let data = TwoArmData::new(gaussian_sample(50, 0.0, 2), gaussian_sample(60, 0.3, 3)).unwrap();
        let a = analyze_two_arm(&data, Functional::Quantile(0.5), 300, 0.9, 77).unwrap();
        let b = analyze_two_arm(&data, Functional::Quantile(0.5), 300, 0.9, 77).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(
            a,
            single.install(|| analyze_two_arm(&data, Functional::Quantile(0.5), 300, 0.9, 77).unwrap())
        );
    }

    #[test]
    fn prior_override_routes_through_conjugate_update() {
        let data = TwoArmData::new(gaussian_sample(40, 0.0, 4), gaussian_sample(40, 2.0, 5)).unwrap();
        let prior = prior_override(1e-3, BaseCdf::gaussian(0.0, 10.0).unwrap(), 1e-8).unwrap();
        let with = analyze_two_arm_with_prior(&data, Functional::Mean, 500, 0.95, 6, Some(&prior)).unwrap();
        let without = analyze_two_arm(&data, Functional::Mean, 500, 0.95, 6).unwrap();
        assert!((with.point_estimate - without.point_estimate).abs() < 0.1);
    }

    #[test]
    fn location_equivariance_is_exact_for_atoms() {
        let data = gaussian_sample(100, 0.0, 8);
        let shifted: Vec<f64> = data.iter().map(|x| x + 3.0).collect();
        let a = bayesian_bootstrap(&data, Functional::Quantile(0.3), 200, 9).unwrap();
        let b = bayesian_bootstrap(&shifted, Functional::Quantile(0.3), 200, 9).unwrap();
        for (x, y) in a.iter().zip(&b) {
            // The same atom is picked; only the shift separates them.
            assert_eq!(x + 3.0, *y);
        }
    }

    #[test]
    fn frequentist_bootstrap_examples() {
        let draws = frequentist_bootstrap(&[5.0, 5.0, 5.0], Functional::Mean, 50, 1).unwrap();
        assert!(draws.iter().all(|&v| v == 5.0));
        assert_eq!(
            frequentist_bootstrap(&[], Functional::Mean, 5, 1),
            Err(Error::EmptyData)
        );

        // Each point's expected resample weight is 1/n: CDF at the smallest
        // atom averages to 1/n.
        let data: Vec<f64> = (0..10).map(f64::from).collect();
        let cdf = frequentist_bootstrap(&data, Functional::CdfAt(0.0), 20_000, 2).unwrap();
        let m = cdf.iter().sum::<f64>() / cdf.len() as f64;
        let se = (0.1f64 * 0.9 / 10.0 / cdf.len() as f64).sqrt();
        assert!((m - 0.1).abs() < 3.0 * se, "{m}");
    }

    #[test]
    fn bootstrap_mean_variance_matches_classical_formula() {
        let data = gaussian_sample(1_000, 0.0, 3);
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let sample_var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let draws = frequentist_bootstrap(&data, Functional::Mean, 4_000, 4).unwrap();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() as f64 - 1.0);
        let expected = sample_var / n;
        assert!((v / expected - 1.0).abs() < 0.2, "{v} vs {expected}");
    }

    #[test]
    fn equivalence_preconditions() {
        let small = gaussian_sample(10, 0.0, 1);
        assert_eq!(
            bootstrap_equivalence(&small, Functional::Mean, 2_000, 1, 0.05),
            Err(Error::TooFewObservations {
                required: 100,
                actual: 10
            })
        );
        let ok = gaussian_sample(200, 0.0, 1);
        assert!(matches!(
            bootstrap_equivalence(&ok, Functional::Mean, 10, 1, 0.05),
            Err(Error::InsufficientDraws { .. })
        ));
    }

    #[test]
    fn equivalence_on_gaussian_data() {
        let data = gaussian_sample(1_000, 0.0, 10);
        let out = bootstrap_equivalence(&data, Functional::Mean, 5_000, 11, DEFAULT_KS_THRESHOLD).unwrap();
        assert!(out.pass, "{out:?}");
        let strict = bootstrap_equivalence(&data, Functional::Mean, 5_000, 11, 0.0).unwrap();
        assert!(!strict.pass);
    }
}
