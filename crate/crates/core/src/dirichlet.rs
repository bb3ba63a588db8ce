//! `Dir(α, F₀)`: the Dirichlet distribution with concentration `α` and mean
//! vector `F₀`, whose usual concentration vector is `α·F₀`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::rng::{self, tag};
use crate::simplex::ProbVector;
use crate::{Error, Result};

/// `e^e`, the factor in the ε-invariance margin.
pub const E_POW_E: f64 = 15.154_262_241_479_262;
/// `e^{1/e}`, the factor in the stability envelope.
pub const E_POW_INV_E: f64 = 1.444_667_861_009_766;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    concentration: f64,
    mean: ProbVector,
}

impl DirichletParams {
    pub fn new(concentration: f64, mean: ProbVector) -> Result<Self> {
        if !(concentration > 0.0) || !concentration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "concentration must be positive and finite, got {concentration}"
            )));
        }
        Ok(DirichletParams { concentration, mean })
    }

    /// From the usual concentration vector `(α₁, …, α_p)`.
    pub fn from_concentration_vector(alphas: Vec<f64>) -> Result<Self> {
        let total: f64 = alphas.iter().sum();
        let mean = ProbVector::new(alphas)?;
        Self::new(total, mean)
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn mean(&self) -> &ProbVector {
        &self.mean
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    /// `α·F₀`, componentwise.
    pub fn concentration_vector(&self) -> Vec<f64> {
        self.mean.as_slice().iter().map(|m| self.concentration * m).collect()
    }

    /// `log C_ε = log Γ(α) − Σᵢ log Γ(α·F₀ᵢ)`.
    pub fn log_c_eps(&self) -> Result<f64> {
        if let Some(i) = self.mean.as_slice().iter().position(|&m| m == 0.0) {
            return Err(Error::ZeroMeanComponent(i));
        }
        let denominator: f64 = self.concentration_vector().into_iter().map(ln_gamma).sum();
        Ok(ln_gamma(self.concentration) - denominator)
    }

    pub fn log_pdf(&self, theta: &ProbVector) -> Result<f64> {
        if theta.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: theta.dim(),
            });
        }
        theta.require_interior()?;
        let kernel: f64 = self
            .concentration_vector()
            .iter()
            .zip(theta.as_slice())
            .map(|(a, t)| (a - 1.0) * t.ln())
            .sum();
        Ok(self.log_c_eps()? + kernel)
    }

    /// `draws` independent samples; draw `i` uses substream `i` of `seed`, so
    /// the output does not depend on the number of worker threads.
    pub fn sample(&self, seed: u64, draws: usize) -> DirichletDraws {
        let shapes = self.concentration_vector();
        let (draws, clamped): (Vec<ProbVector>, Vec<usize>) = (0..draws as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::substream(seed, tag::DIRICHLET, i);
                let (weights, clamped) = sample_weights(&shapes, &mut rng);
                (
                    ProbVector::new(weights).expect("gamma-ratio weights are a valid simplex point"),
                    clamped,
                )
            })
            .unzip();
        DirichletDraws {
            draws,
            clamped: clamped.into_iter().sum(),
        }
    }

    pub fn eps_invariance_margin(&self) -> Result<EpsInvarianceMargin> {
        let c_eps = self.log_c_eps()?.exp();
        Ok(EpsInvarianceMargin {
            c_eps,
            sup_margin: c_eps * E_POW_E,
            sup_margin_inv_e: c_eps * E_POW_INV_E,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletDraws {
    pub draws: Vec<ProbVector>,
    /// Components that underflowed to zero and were raised to `f64::MIN_POSITIVE`.
    pub clamped: usize,
}

/// Certificate for `Dir(ε, F₀)` being ε-invariant.
///
/// `sup |∏θᵢ^{εF₀ᵢ} − 1| ≤ 1` on the simplex, so the margin is the normaliser
/// times the constant factor. A certifying δ must exceed `c_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsInvarianceMargin {
    pub c_eps: f64,
    /// `c_eps · e^e`.
    pub sup_margin: f64,
    /// `c_eps · e^{1/e}`, the same bound with the stability-envelope factor.
    pub sup_margin_inv_e: f64,
}

/// Log of a `Gamma(shape, 1)` variate.
///
/// For `shape < 1` this uses `G_a = G_{a+1}·U^{1/a}` in log space, which stays
/// finite even when the variate itself underflows.
pub(crate) fn log_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape == 1.0 {
        let e: f64 = Exp1.sample(rng);
        return e.ln();
    }
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        return g.ln();
    }
    let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
    g.ln() + rng::open01(rng).ln() / shape
}

/// Unnormalised-then-normalised Dirichlet weights for the given shapes.
///
/// Zero shapes give zero weight. Positive shapes whose weight underflows are
/// clamped to `f64::MIN_POSITIVE`; the number of clamps is returned.
/// `Gamma(a, 1)` variate for `a ≥ 1`.
pub(crate) fn gamma_variate<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a == 1.0 {
        Exp1.sample(rng)
    } else {
        Gamma::new(a, 1.0).expect("positive shape").sample(rng)
    }
}

pub(crate) fn sample_weights<R: Rng + ?Sized>(shapes: &[f64], rng: &mut R) -> (Vec<f64>, usize) {
    if shapes.iter().all(|&a| a >= 1.0) {
        // No underflow risk: plain gamma ratios.
        let mut weights: Vec<f64> = shapes.iter().map(|&a| gamma_variate(a, rng)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        return (weights, 0);
    }
    let logs: Vec<f64> = shapes
        .iter()
        .map(|&a| {
            if a > 0.0 {
                log_gamma_variate(a, rng)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    let mut clamped = 0;
    let weights = logs
        .iter()
        .zip(shapes)
        .map(|(&l, &a)| {
            let w = (l - log_total).exp();
            if a > 0.0 && w < f64::MIN_POSITIVE {
                clamped += 1;
                f64::MIN_POSITIVE
            } else {
                w
            }
        })
        .collect();
    (weights, clamped)
}
