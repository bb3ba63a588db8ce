//! The invariant generalized density `Dir(0) ∝ 1/∏θᵢ`, the invariance
//! functional equation, and the stability envelope for approximate solutions.
//!
//! Densities are handled in log space throughout. The functional equation
//!
//! ```text
//! π(θ) = π(g(θ)) · ∏cᵢ / (Σcᵢθᵢ)^p
//! ```
//!
//! is evaluated as a log residual; the stability premise is stated on the
//! natural scale, so the check exponentiates residuals only at the end.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{DirichletParams, E_POW_INV_E};
use crate::rng::{self, tag};
use crate::simplex::{self, GroupElement, ProbVector};
use crate::{Error, Result};

/// The rule part of a [`GeneralizedDensity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityRule {
    /// `−Σ log θᵢ`.
    Dir0,
    /// Constant density on the simplex.
    Uniform,
    /// `−Σ aᵢ log θᵢ` for the given exponents `aᵢ`; `Dir0` is all ones.
    PowerProduct(Vec<f64>),
    /// The normalised `Dir(α, F₀)` density.
    Dirichlet(DirichletParams),
}

/// A density known only up to a positive constant, held as
/// `log π(θ) = rule(θ) + log_constant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedDensity {
    dim: usize,
    rule: DensityRule,
    log_constant: f64,
}

impl GeneralizedDensity {
    pub fn new(dim: usize, rule: DensityRule) -> Result<Self> {
        if dim < 2 {
            return Err(Error::EmptyOrSingleton(dim));
        }
        let rule_dim = match &rule {
            DensityRule::PowerProduct(a) => Some(a.len()),
            DensityRule::Dirichlet(d) => Some(d.dim()),
            DensityRule::Dir0 | DensityRule::Uniform => None,
        };
        if let Some(actual) = rule_dim.filter(|&d| d != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual });
        }
        Ok(GeneralizedDensity {
            dim,
            rule,
            log_constant: 0.0,
        })
    }

    pub fn dir0(dim: usize) -> Result<Self> {
        Self::new(dim, DensityRule::Dir0)
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(dim, DensityRule::Uniform)
    }

    pub fn power_product(exponents: Vec<f64>) -> Result<Self> {
        Self::new(exponents.len(), DensityRule::PowerProduct(exponents))
    }

    pub fn dirichlet(params: DirichletParams) -> Result<Self> {
        Self::new(params.dim(), DensityRule::Dirichlet(params))
    }

    /// Same measure class, different proportionality constant.
    pub fn with_log_constant(mut self, log_constant: f64) -> Self {
        self.log_constant = log_constant;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rule(&self) -> &DensityRule {
        &self.rule
    }

    pub fn log_constant(&self) -> f64 {
        self.log_constant
    }

    pub fn log_eval(&self, theta: &ProbVector) -> Result<f64> {
        if theta.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: theta.dim(),
            });
        }
        let value = match &self.rule {
            DensityRule::Dir0 => dir0_log_density(theta)?,
            DensityRule::Uniform => {
                theta.require_interior()?;
                0.0
            }
            DensityRule::PowerProduct(exponents) => {
                theta.require_interior()?;
                -exponents
                    .iter()
                    .zip(theta.as_slice())
                    .map(|(a, t)| a * t.ln())
                    .sum::<f64>()
            }
            DensityRule::Dirichlet(params) => params.log_pdf(theta)?,
        };
        Ok(value + self.log_constant)
    }
}

/// `log(1/∏θᵢ) = −Σ log θᵢ`, with the constant fixed at zero.
pub fn dir0_log_density(theta: &ProbVector) -> Result<f64> {
    Ok(-theta.sum_log()?)
}

/// `log π(θ) − [log π(g(θ)) + log dπ̃/dπ(θ)]`: zero exactly when `pi` solves
/// the invariance equation at `(g, θ)`.
pub fn functional_eq_log_residual(pi: &GeneralizedDensity, g: &GroupElement, theta: &ProbVector) -> Result<f64> {
    let moved = g.apply(theta)?;
    let lhs = pi.log_eval(theta)?;
    let rhs = pi.log_eval(&moved)? + g.log_rn_derivative(theta)?;
    Ok(lhs - rhs)
}

/// `δ · e^{1/e} / ∏θᵢ`: how far a δ-approximate solution of the functional
/// equation can be from some exact solution `∝ 1/∏θᵢ`.
pub fn stability_envelope(delta: f64, theta: &ProbVector) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    Ok((delta.ln() + E_POW_INV_E.ln() - theta.sum_log()?).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityOutcome {
    /// Premise met on every trial and the envelope bound held.
    Holds,
    /// Premise met, bound broken: a counterexample.
    Violated,
    /// Some residual reached δ, so the implication says nothing.
    PremiseNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub dim: usize,
    pub trials: usize,
    pub delta: f64,
    /// Largest `|π(θ) − π(g(θ))·dπ̃/dπ(θ)|` over the trials.
    pub max_residual: f64,
    pub max_log_residual: f64,
    pub premise_met: bool,
    /// `log[π(1/p, …, 1/p) · p^{−p}]`, the constant of the nearby exact solution.
    pub fitted_log_constant: f64,
    /// Largest `|π(θ) − π̂(θ)| / envelope(δ, θ)`; below one means the bound held.
    pub worst_envelope_ratio: f64,
    pub conclusion_holds: bool,
    pub outcome: StabilityOutcome,
    /// False only for [`StabilityOutcome::Violated`].
    pub pass: bool,
}

/// Samples `trials` random `(g, θ)` pairs and tests the stability implication
/// for `pi` at tolerance `delta`.
///
/// The exact solution is pinned at the barycenter, `π̂(θ) = π(1/p,…,1/p)·p^{−p}/∏θᵢ`.
/// Boundary failures of the density are not expected: sampled points are
/// interior. Any evaluation error is treated as an unmet premise.
pub fn check_stability(pi: &GeneralizedDensity, trials: usize, delta: f64, seed: u64) -> Result<StabilityReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    let dim = pi.dim();
    let p = dim as f64;
    let barycenter = ProbVector::uniform(dim)?;
    let fitted_log_constant = pi.log_eval(&barycenter)? - p * p.ln();
    let envelope_scale = delta * E_POW_INV_E;

    #[derive(Clone, Copy)]
    struct Trial {
        residual: f64,
        log_residual: f64,
        ratio: f64,
    }

    let per_trial = |t: usize| -> Result<Trial> {
        let mut rng = rng::substream(seed, tag::GROUP_SAMPLING, t as u64);
        let theta = simplex::sample_interior_point(dim, &mut rng);
        let g = simplex::sample_group_element(dim, &mut rng);
        let here = pi.log_eval(&theta)?;
        let there = pi.log_eval(&g.apply(&theta)?)? + g.log_rn_derivative(&theta)?;
        let log_residual = here - there;
        let residual = here.max(there).exp() * -(-log_residual.abs()).exp_m1();
        // |π − π̂|·∏θ / (δ e^{1/e}), all factors of 1/∏θ cancelled.
        let scaled = (here + theta.sum_log()?).exp();
        let ratio = (scaled - fitted_log_constant.exp()).abs() / envelope_scale;
        Ok(Trial {
            residual,
            log_residual: log_residual.abs(),
            ratio,
        })
    };

    let results: Vec<Result<Trial>> = (0..trials).into_par_iter().map(per_trial).collect();
    let mut max_residual = 0.0f64;
    let mut max_log_residual = 0.0f64;
    let mut worst_envelope_ratio = 0.0f64;
    let mut evaluation_failed = false;
    for r in results {
        match r {
            Ok(t) => {
                max_residual = max_residual.max(t.residual);
                max_log_residual = max_log_residual.max(t.log_residual);
                worst_envelope_ratio = worst_envelope_ratio.max(t.ratio);
            }
            Err(_) => evaluation_failed = true,
        }
    }
    let premise_met = !evaluation_failed && max_residual < delta;
    let conclusion_holds = !evaluation_failed && worst_envelope_ratio < 1.0;
    let outcome = match (premise_met, conclusion_holds) {
        (true, true) => StabilityOutcome::Holds,
        (true, false) => StabilityOutcome::Violated,
        (false, _) => StabilityOutcome::PremiseNotMet,
    };
    Ok(StabilityReport {
        dim,
        trials,
        delta,
        max_residual,
        max_log_residual,
        premise_met,
        fitted_log_constant,
        worst_envelope_ratio,
        conclusion_holds,
        outcome,
        pass: outcome != StabilityOutcome::Violated,
    })
}
