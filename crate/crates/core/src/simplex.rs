//! The probability simplex `S_p` and the rescale-and-renormalise group `G_p`.
//!
//! A group element is a vector of positive scales `c`, acting by
//! `θᵢ ↦ cᵢθᵢ / Σⱼ cⱼθⱼ`. Scales are only defined up to a positive multiple, so
//! every [`GroupElement`] is stored in its canonical form with scales summing
//! to one. Two scale vectors that are multiples of each other compare equal.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Components below this are treated as lying on the boundary wherever a
/// density or derivative has to be evaluated.
pub const MIN_INTERIOR: f64 = 1e-300;

/// A point on the simplex: non-negative weights summing to one, `p ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Normalises `values` by their sum.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::EmptyOrSingleton(values.len()));
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = values.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::ZeroSum);
        }
        let mut weights = values;
        weights.iter_mut().for_each(|w| *w /= sum);
        Ok(ProbVector(weights))
    }

    /// The barycenter `(1/p, …, 1/p)`.
    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&w| w >= MIN_INTERIOR)
    }

    pub(crate) fn require_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(Error::BoundaryPoint)
        }
    }

    /// `Σ log θᵢ`; fails on boundary points.
    pub fn sum_log(&self) -> Result<f64> {
        self.require_interior()?;
        Ok(self.0.iter().map(|w| w.ln()).sum())
    }
}

impl<'de> Deserialize<'de> for ProbVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(de)?;
        ProbVector::new(raw).map_err(serde::de::Error::custom)
    }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// An element of `G_p`, kept in canonical (sum-to-one) form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupElement {
    scales: Vec<f64>,
}

impl GroupElement {
    /// Builds the class of the scale vector `scales`; every entry must be
    /// strictly positive and finite.
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.len() < 2 {
            return Err(Error::EmptyOrSingleton(scales.len()));
        }
        for (index, &value) in scales.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        Ok(Self::canonical(scales))
    }

    fn canonical(mut scales: Vec<f64>) -> Self {
        let sum: f64 = scales.iter().sum();
        scales.iter_mut().for_each(|c| *c /= sum);
        GroupElement { scales }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    /// Canonical scales, summing to one.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn is_identity(&self) -> bool {
        self.scales.iter().all(|&c| c == self.scales[0])
    }

    /// `θᵢ ↦ cᵢθᵢ / Σⱼ cⱼθⱼ`.
    pub fn apply(&self, theta: &ProbVector) -> Result<ProbVector> {
        check_dims(self.dim(), theta.dim())?;
        if self.is_identity() {
            return Ok(theta.clone());
        }
        let scaled: Vec<f64> = self.scales.iter().zip(theta.as_slice()).map(|(c, t)| c * t).collect();
        ProbVector::new(scaled)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        check_dims(self.dim(), other.dim())?;
        let product = self.scales.iter().zip(&other.scales).map(|(a, b)| a * b).collect();
        Ok(Self::canonical(product))
    }

    pub fn inverse(&self) -> GroupElement {
        Self::canonical(self.scales.iter().map(|c| c.recip()).collect())
    }

    /// Logarithm of the Radon–Nikodym derivative `∏cᵢ / (Σcᵢθᵢ)^p` of the
    /// transformed measure with respect to the original one.
    ///
    /// The value does not depend on the representative of the scale class.
    pub fn log_rn_derivative(&self, theta: &ProbVector) -> Result<f64> {
        check_dims(self.dim(), theta.dim())?;
        if self.is_identity() {
            return Ok(0.0);
        }
        let p = self.dim() as f64;
        let log_prod: f64 = self.scales.iter().map(|c| c.ln()).sum();
        let dot: f64 = self.scales.iter().zip(theta.as_slice()).map(|(c, t)| c * t).sum();
        let value = log_prod - p * dot.ln();
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::BoundaryPoint)
        }
    }

    /// Log-determinant of the central finite-difference Jacobian of the action,
    /// written in the chart `(θ₁, …, θ_{p−1})` with `θ_p = 1 − Σ θᵢ`.
    ///
    /// Independent of [`log_rn_derivative`](Self::log_rn_derivative); the two
    /// must agree up to discretisation error.
    pub fn numerical_log_jacobian(&self, theta: &ProbVector, step: f64) -> Result<f64> {
        check_dims(self.dim(), theta.dim())?;
        if !(step > 0.0 && step <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "finite-difference step must lie in (0, 1e-3], got {step}"
            )));
        }
        if theta.as_slice().iter().any(|&t| t < 10.0 * step) {
            return Err(Error::BoundaryPoint);
        }
        let chart_dim = self.dim() - 1;
        let x: Vec<f64> = theta.as_slice()[..chart_dim].to_vec();
        let mut jacobian = DMatrix::<f64>::zeros(chart_dim, chart_dim);
        for j in 0..chart_dim {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[j] += step;
            minus[j] -= step;
            let f_plus = self.chart_map(&plus);
            let f_minus = self.chart_map(&minus);
            for i in 0..chart_dim {
                jacobian[(i, j)] = (f_plus[i] - f_minus[i]) / (2.0 * step);
            }
        }
        let det = jacobian.lu().determinant();
        let value = det.abs().ln();
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite)
        }
    }

    // The action in chart coordinates, without renormalising the input.
    fn chart_map(&self, x: &[f64]) -> Vec<f64> {
        let last = 1.0 - x.iter().sum::<f64>();
        let full = x.iter().copied().chain(std::iter::once(last));
        let scaled: Vec<f64> = self.scales.iter().zip(full).map(|(c, t)| c * t).collect();
        let total: f64 = scaled.iter().sum();
        scaled[..x.len()].iter().map(|v| v / total).collect()
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            scales: Vec<f64>,
        }
        let raw = Raw::deserialize(de)?;
        GroupElement::new(raw.scales).map_err(serde::de::Error::custom)
    }
}

/// Uniform point in the interior of `S_p` (symmetric `Dirichlet(1)`).
pub fn sample_interior_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ProbVector {
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
        if let Ok(theta) = ProbVector::new(raw) {
            if theta.is_interior() {
                return theta;
            }
        }
    }
}

/// Group element with `log cᵢ ~ Uniform(−2, 2)`.
pub fn sample_group_element<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> GroupElement {
    let scales = (0..dim).map(|_| rng.random_range(-2.0..2.0f64).exp()).collect();
    GroupElement::new(scales).expect("exponentials are positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pv(values: &[f64]) -> ProbVector {
        ProbVector::new(values.to_vec()).unwrap()
    }

    fn g(scales: &[f64]) -> GroupElement {
        GroupElement::new(scales.to_vec()).unwrap()
    }

    #[test]
    fn normalises_values() {
        assert_eq!(pv(&[1.0, 1.0]).as_slice(), &[0.5, 0.5]);
        assert_eq!(pv(&[2.0, 1.0, 1.0]).as_slice(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn rejects_invalid_vectors() {
        assert_eq!(
            ProbVector::new(vec![1.0, -0.1]),
            Err(Error::NegativeEntry { index: 1, value: -0.1 })
        );
        assert_eq!(ProbVector::new(vec![1.0]), Err(Error::EmptyOrSingleton(1)));
        assert_eq!(ProbVector::new(vec![]), Err(Error::EmptyOrSingleton(0)));
        assert_eq!(ProbVector::new(vec![0.0, 0.0]), Err(Error::ZeroSum));
        assert!(ProbVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(GroupElement::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn apply_examples() {
        let theta = pv(&[0.3, 0.7]);
        assert_eq!(g(&[1.0, 1.0]).apply(&theta).unwrap(), theta);

        let half = pv(&[0.5, 0.5]);
        let out = g(&[2.0, 1.0]).apply(&half).unwrap();
        assert_abs_diff_eq!(out.as_slice()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.as_slice()[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(out, g(&[4.0, 2.0]).apply(&half).unwrap());

        assert_eq!(
            g(&[1.0, 2.0, 3.0]).apply(&half),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn compose_and_inverse_examples() {
        let id = GroupElement::identity(2).unwrap();
        assert!(g(&[2.0, 1.0]).compose(&g(&[1.0, 2.0])).unwrap().is_identity());
        assert_eq!(g(&[2.0, 1.0]).compose(&g(&[3.0, 1.0])).unwrap(), g(&[6.0, 1.0]));
        assert_eq!(id.compose(&g(&[5.0, 3.0])).unwrap(), g(&[5.0, 3.0]));
        assert_eq!(g(&[0.5, 0.5]).inverse(), g(&[0.5, 0.5]));
        assert_eq!(g(&[2.0, 1.0]).inverse(), g(&[1.0, 2.0]));
        assert!(g(&[1.0, 2.0]).compose(&g(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn rn_derivative_examples() {
        let theta = pv(&[0.2, 0.8]);
        assert_eq!(g(&[1.0, 1.0]).log_rn_derivative(&theta).unwrap(), 0.0);
        // 2 / 1.5² = 8/9
        let v = g(&[2.0, 1.0]).log_rn_derivative(&pv(&[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(v, (8.0f64 / 9.0).ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(v, -0.11778, epsilon = 1e-5);
    }

    #[test]
    fn numerical_jacobian_examples() {
        let half = pv(&[0.5, 0.5]);
        let id = GroupElement::identity(2).unwrap();
        assert_abs_diff_eq!(id.numerical_log_jacobian(&half, 1e-5).unwrap(), 0.0, epsilon = 1e-8);
        let v = g(&[2.0, 1.0]).numerical_log_jacobian(&half, 1e-5).unwrap();
        assert_abs_diff_eq!(v, (8.0f64 / 9.0).ln(), epsilon = 1e-6);

        let theta = pv(&[0.1, 0.2, 0.3, 0.4]);
        let h = g(&[0.3, 2.5, 1.1, 0.7]);
        let fd = h.numerical_log_jacobian(&theta, 1e-5).unwrap();
        assert_abs_diff_eq!(fd, h.log_rn_derivative(&theta).unwrap(), epsilon = 1e-5);

        assert_eq!(
            h.numerical_log_jacobian(&pv(&[1e-6, 0.3, 0.3, 0.4]), 1e-5),
            Err(Error::BoundaryPoint)
        );
        assert!(h.numerical_log_jacobian(&theta, 0.0).is_err());
        assert!(h.numerical_log_jacobian(&theta, 1e-2).is_err());
    }

    #[test]
    fn boundary_with_extreme_scale_is_rejected() {
        // Every cᵢθᵢ underflows, so Σcᵢθᵢ = 0.
        let theta = pv(&[0.0, 0.5, 0.5]);
        let h = g(&[1.0, 5e-324, 5e-324]);
        assert_eq!(h.log_rn_derivative(&theta), Err(Error::BoundaryPoint));
    }

    fn simplex_point(dim: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ProbVector> {
        dim.prop_flat_map(|p| prop::collection::vec(0.01f64..1.0, p))
            .prop_map(|v| ProbVector::new(v).unwrap())
    }

    fn pair(dim: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (GroupElement, ProbVector)> {
        simplex_point(dim).prop_flat_map(|theta| {
            let p = theta.dim();
            (
                prop::collection::vec(-2.0f64..2.0, p)
                    .prop_map(|l| GroupElement::new(l.into_iter().map(f64::exp).collect()).unwrap()),
                Just(theta),
            )
        })
    }

    proptest! {
        #[test]
        fn apply_stays_on_simplex((h, theta) in pair(2..=10)) {
            let out = h.apply(&theta).unwrap();
            prop_assert!((out.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(out.as_slice().iter().all(|&w| w >= 0.0));
        }

        #[test]
        fn scale_class_is_canonical(scales in prop::collection::vec(0.01f64..100.0, 2..8), k in 1e-3f64..1e3) {
            let a = GroupElement::new(scales.clone()).unwrap();
            let b = GroupElement::new(scales.iter().map(|c| c * k).collect()).unwrap();
            for (x, y) in a.scales().iter().zip(b.scales()) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }

        #[test]
        fn group_laws((h, theta) in pair(2..=6), l2 in prop::collection::vec(-2.0f64..2.0, 6), l3 in prop::collection::vec(-2.0f64..2.0, 6)) {
            let p = theta.dim();
            let h2 = GroupElement::new(l2[..p].iter().map(|x| x.exp()).collect()).unwrap();
            let h3 = GroupElement::new(l3[..p].iter().map(|x| x.exp()).collect()).unwrap();
            let left = h.compose(&h2).unwrap().compose(&h3).unwrap();
            let right = h.compose(&h2.compose(&h3).unwrap()).unwrap();
            for (x, y) in left.scales().iter().zip(right.scales()) {
                prop_assert!((x - y).abs() < 1e-14);
            }
            let id = h.compose(&h.inverse()).unwrap();
            for c in id.scales() {
                prop_assert!((c - 1.0 / p as f64).abs() < 1e-14);
            }
            let composed = h.compose(&h2).unwrap().apply(&theta).unwrap();
            let nested = h.apply(&h2.apply(&theta).unwrap()).unwrap();
            for (x, y) in composed.as_slice().iter().zip(nested.as_slice()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let back = h.inverse().apply(&h.apply(&theta).unwrap()).unwrap();
            for (x, y) in back.as_slice().iter().zip(theta.as_slice()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn rn_derivative_is_a_cocycle((h, theta) in pair(2..=8), l2 in prop::collection::vec(-2.0f64..2.0, 8)) {
            let h2 = GroupElement::new(l2[..theta.dim()].iter().map(|x| x.exp()).collect()).unwrap();
            let lhs = h.compose(&h2).unwrap().log_rn_derivative(&theta).unwrap();
            let rhs = h.log_rn_derivative(&h2.apply(&theta).unwrap()).unwrap()
                + h2.log_rn_derivative(&theta).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn rn_derivative_matches_finite_differences((h, theta) in pair(2..=6)) {
            let closed = h.log_rn_derivative(&theta).unwrap();
            let numeric = h.numerical_log_jacobian(&theta, 1e-5).unwrap();
            prop_assert!((closed - numeric).abs() < 1e-6, "{closed} vs {numeric}");
        }
    }
}
