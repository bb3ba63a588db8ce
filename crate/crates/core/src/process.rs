//! Dirichlet processes `DP(α, F₀)` over real-valued outcomes.
//!
//! A process is represented by its concentration and base CDF. Realisations
//! are discrete CDFs: for continuous bases they come from truncated
//! stick-breaking, for purely atomic bases (in particular the Bayesian
//! bootstrap `DP(n, F̂ₙ)`) from the exact Dirichlet law of the atom weights.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::dirichlet::{self, DirichletParams};
use crate::rng::{self, tag};
use crate::simplex::ProbVector;
use crate::{Error, Result};

/// Stick-breaking stops once the unassigned mass falls below this by default.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-8;

const MAX_STICKS: usize = 50_000_000;
const BISECTION_STEPS: usize = 200;

/// Step CDF over distinct sorted atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    atoms: Vec<f64>,
    masses: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl EmpiricalCdf {
    /// Empirical CDF of a data set: ties merge into one atom whose mass is
    /// `multiplicity / n`.
    pub fn from_data(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite observation {bad}")));
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut atoms = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for v in sorted {
            match atoms.last() {
                Some(&last) if last == v => *counts.last_mut().expect("paired with atoms") += 1,
                _ => {
                    atoms.push(v);
                    counts.push(1);
                }
            }
        }
        let masses = counts.into_iter().map(|c| c as f64 / n).collect();
        Ok(Self::build(atoms, masses))
    }

    /// General weighted step CDF; masses are normalised.
    pub fn new(atoms: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyData);
        }
        if atoms.len() != masses.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                actual: masses.len(),
            });
        }
        if atoms.iter().any(|a| !a.is_finite()) || atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedEdges);
        }
        for (index, &value) in masses.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroSum);
        }
        let masses = masses.into_iter().map(|m| m / total).collect();
        Ok(Self::build(atoms, masses))
    }

    fn build(atoms: Vec<f64>, masses: Vec<f64>) -> Self {
        let mut running = 0.0;
        let mut cumulative: Vec<f64> = masses
            .iter()
            .map(|m| {
                running += m;
                running
            })
            .collect();
        // The last atom carries the CDF to exactly one.
        *cumulative.last_mut().expect("nonempty") = 1.0;
        EmpiricalCdf {
            atoms,
            masses,
            cumulative,
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn cdf_at(&self, t: f64) -> f64 {
        match self.atoms.partition_point(|&a| a <= t) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    fn cdf_left(&self, t: f64) -> f64 {
        match self.atoms.partition_point(|&a| a < t) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < u);
        self.atoms[k.min(self.atoms.len() - 1)]
    }

    /// `n·massᵢ` as integers, if every one of them is integral and they sum to `n`.
    fn multiplicities(&self, n: u64) -> Result<Vec<f64>> {
        let scale = n as f64;
        let mut total = 0u64;
        let mut out = Vec::with_capacity(self.masses.len());
        for &m in &self.masses {
            let x = m * scale;
            let r = x.round();
            if r < 1.0 || (x - r).abs() > 1e-9 * scale.max(1.0) {
                return Err(Error::InconsistentCount { n });
            }
            total += r as u64;
            out.push(r);
        }
        if total != n {
            return Err(Error::InconsistentCount { n });
        }
        Ok(out)
    }
}

/// Empirical CDF `F̂ₙ` of `data`.
pub fn empirical_cdf(data: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::from_data(data)
}

/// Base (mean) CDF `F₀` of a process.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseCdf {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gaussian {
        location: f64,
        scale: f64,
    },
    Empirical(EmpiricalCdf),
    Mixture {
        weights: ProbVector,
        components: Vec<BaseCdf>,
    },
}

impl BaseCdf {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "uniform base needs finite lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(BaseCdf::Uniform { lo, hi })
    }

    pub fn gaussian(location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !location.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian base needs finite location and positive scale, got ({location}, {scale})"
            )));
        }
        Ok(BaseCdf::Gaussian { location, scale })
    }

    pub fn mixture(weights: ProbVector, components: Vec<BaseCdf>) -> Result<Self> {
        if weights.dim() != components.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.dim(),
                actual: components.len(),
            });
        }
        Ok(BaseCdf::Mixture { weights, components })
    }

    /// `P(X ≤ t)`.
    pub fn cdf_at(&self, t: f64) -> f64 {
        match self {
            BaseCdf::Uniform { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
            BaseCdf::Gaussian { location, scale } => normal(*location, *scale).cdf(t),
            BaseCdf::Empirical(e) => e.cdf_at(t),
            BaseCdf::Mixture { weights, components } => weighted(weights, components, |c| c.cdf_at(t)),
        }
    }

    /// `P(X < t)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        match self {
            BaseCdf::Empirical(e) => e.cdf_left(t),
            BaseCdf::Mixture { weights, components } => weighted(weights, components, |c| c.cdf_left(t)),
            continuous => continuous.cdf_at(t),
        }
    }

    /// Base mass of the interval `(a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf_at(b) - self.cdf_at(a)).max(0.0)
    }

    /// Generalised inverse `inf{x : F(x) ≥ u}` for `u ∈ (0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match self {
            BaseCdf::Uniform { lo, hi } => lo + u * (hi - lo),
            BaseCdf::Gaussian { location, scale } => gaussian_inverse(*location, *scale, u),
            BaseCdf::Empirical(e) => e.inverse_cdf(u),
            BaseCdf::Mixture { components, .. } => self.mixture_inverse(components, u),
        }
    }

    /// Maps `u ~ U(0, 1)` to a draw from `F₀`. Mixtures use composition: `u`
    /// selects a component and is rescaled to a uniform within it.
    pub fn draw_from_uniform(&self, u: f64) -> f64 {
        match self {
            BaseCdf::Mixture { weights, components } => {
                let w = weights.as_slice();
                let last = w.iter().rposition(|&x| x > 0.0).expect("weights sum to one");
                let mut start = 0.0;
                for (j, (&wj, c)) in w.iter().zip(components).enumerate() {
                    let end = start + wj;
                    if wj > 0.0 && (u < end || j == last) {
                        let v = ((u - start) / wj).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                        return c.draw_from_uniform(v);
                    }
                    start = end;
                }
                unreachable!("the last positive weight always matches")
            }
            _ => self.inverse_cdf(u),
        }
    }

    // F(x) < u below the smallest component quantile and F(x) ≥ u at the
    // largest, so the answer is bracketed. Between consecutive atoms F is
    // continuous and bisection applies; at an atom the jump is checked exactly.
    fn mixture_inverse(&self, components: &[BaseCdf], u: f64) -> f64 {
        let quantiles = components.iter().map(|c| c.inverse_cdf(u));
        let (lo, hi) = quantiles.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q), hi.max(q)));
        if self.cdf_at(lo) >= u {
            return lo;
        }
        let mut atoms = Vec::new();
        self.collect_atoms(&mut atoms);
        atoms.retain(|&a| a > lo && a <= hi);
        atoms.sort_by(f64::total_cmp);
        atoms.dedup();
        let k = atoms.partition_point(|&a| self.cdf_at(a) < u);
        let left = if k == 0 { lo } else { atoms[k - 1] };
        match atoms.get(k) {
            Some(&a) if self.cdf_left(a) < u => a,
            Some(&a) => self.bisect(left, a, u),
            None => self.bisect(left, hi, u),
        }
    }

    fn bisect(&self, mut below: f64, mut above: f64, u: f64) -> f64 {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (below + above);
            if mid <= below || mid >= above {
                break;
            }
            if self.cdf_at(mid) >= u {
                above = mid;
            } else {
                below = mid;
            }
        }
        above
    }

    fn collect_atoms(&self, out: &mut Vec<f64>) {
        match self {
            BaseCdf::Empirical(e) => out.extend_from_slice(e.atoms()),
            BaseCdf::Mixture { components, .. } => components.iter().for_each(|c| c.collect_atoms(out)),
            _ => {}
        }
    }
}

fn normal(location: f64, scale: f64) -> Normal {
    Normal::new(location, scale).expect("validated at construction")
}

// statrs' quantile refined by one Newton step.
fn gaussian_inverse(location: f64, scale: f64, u: f64) -> f64 {
    let n = normal(location, scale);
    let x = n.inverse_cdf(u);
    let density = n.pdf(x);
    if density > 0.0 && x.is_finite() {
        x - (n.cdf(x) - u) / density
    } else {
        x
    }
}

fn weighted(weights: &ProbVector, components: &[BaseCdf], f: impl Fn(&BaseCdf) -> f64) -> f64 {
    weights.as_slice().iter().zip(components).map(|(w, c)| w * f(c)).sum()
}

/// `DP(α, F₀)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpParams {
    concentration: f64,
    base: BaseCdf,
}

impl DpParams {
    pub fn new(concentration: f64, base: BaseCdf) -> Result<Self> {
        if !(concentration > 0.0) || !concentration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "concentration must be positive and finite, got {concentration}"
            )));
        }
        Ok(DpParams { concentration, base })
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn base(&self) -> &BaseCdf {
        &self.base
    }
}

/// One realisation of a process: a discrete CDF with possibly some mass left
/// unassigned by truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteCdfDraw {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    pub truncation_mass: f64,
}

impl DiscreteCdfDraw {
    /// `Σ wᵢ·[atomᵢ ≤ t]`, without redistributing the truncated mass.
    pub fn cdf_at(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| **a <= t)
            .map(|(_, w)| w)
            .sum()
    }

    /// Mass the draw puts on `(a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| **x > a && **x <= b)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Conjugate update `DP(ε + n, ε/(ε+n)·F₀ + n/(ε+n)·F̂ₙ)`.
pub fn posterior_update(prior: &DpParams, data: &[f64]) -> Result<DpParams> {
    let ecdf = EmpiricalCdf::from_data(data)?;
    let eps = prior.concentration;
    let n = data.len() as f64;
    let weights = ProbVector::new(vec![eps, n])?;
    let base = BaseCdf::mixture(weights, vec![prior.base.clone(), BaseCdf::Empirical(ecdf)])?;
    DpParams::new(eps + n, base)
}

/// Dirichlet law of the cell masses over the partition
/// `(−∞, e₁], (e₁, e₂], …, (e_k, ∞)`.
pub fn finite_marginal(params: &DpParams, partition_edges: &[f64]) -> Result<DirichletParams> {
    let masses = cell_masses(&params.base, partition_edges)?;
    DirichletParams::new(params.concentration, ProbVector::new(masses)?)
}

fn cell_masses(base: &BaseCdf, edges: &[f64]) -> Result<Vec<f64>> {
    if edges.is_empty() {
        return Err(Error::EmptyOrSingleton(1));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedEdges);
    }
    let mut previous = 0.0;
    let mut masses = Vec::with_capacity(edges.len() + 1);
    for &e in edges {
        let c = base.cdf_at(e);
        masses.push(c - previous);
        previous = c;
    }
    masses.push(1.0 - previous);
    match masses.iter().position(|&m| !(m > 0.0)) {
        Some(i) => Err(Error::ZeroMassCell(i)),
        None => Ok(masses),
    }
}

pub(crate) fn check_tolerance(truncation_tol: f64) -> Result<()> {
    if truncation_tol > 0.0 && truncation_tol <= 0.1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "truncation tolerance must lie in (0, 0.1], got {truncation_tol}"
        )))
    }
}

pub(crate) fn stick_breaking<R: Rng + ?Sized>(
    params: &DpParams,
    truncation_tol: f64,
    rng: &mut R,
) -> Result<DiscreteCdfDraw> {
    let alpha = params.concentration;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut log_remaining = 0.0f64;
    let mut remaining = 1.0f64;
    while remaining >= truncation_tol {
        if atoms.len() == MAX_STICKS {
            return Err(Error::InvalidParameter(format!(
                "stick-breaking with concentration {alpha} did not reach tolerance {truncation_tol}"
            )));
        }
        // 1 − v = U^{1/α} for v ~ Beta(1, α).
        let log_left = rng::open01(rng).ln() / alpha;
        weights.push(remaining * -log_left.exp_m1());
        atoms.push(params.base.draw_from_uniform(rng::open01(rng)));
        log_remaining += log_left;
        remaining = log_remaining.exp();
    }
    Ok(DiscreteCdfDraw {
        atoms,
        weights,
        truncation_mass: remaining,
    })
}

/// One truncated stick-breaking realisation of `DP(α, F₀)`.
pub fn sample_stick_breaking(params: &DpParams, truncation_tol: f64, seed: u64) -> Result<DiscreteCdfDraw> {
    check_tolerance(truncation_tol)?;
    stick_breaking(
        params,
        truncation_tol,
        &mut rng::substream(seed, tag::STICK_BREAKING, 0),
    )
}

/// `draws` independent realisations, draw `i` on substream `i`.
///
/// Purely atomic bases are sampled exactly (Dirichlet weights on the atoms);
/// anything else goes through stick-breaking.
pub fn sample_process(params: &DpParams, truncation_tol: f64, seed: u64, draws: usize) -> Result<Vec<DiscreteCdfDraw>> {
    check_tolerance(truncation_tol)?;
    if let BaseCdf::Empirical(ecdf) = &params.base {
        let shapes: Vec<f64> = ecdf.masses.iter().map(|m| params.concentration * m).collect();
        return Ok(exact_atomic_draws(ecdf, &shapes, seed, tag::DIRICHLET, draws));
    }
    (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, tag::STICK_BREAKING, i);
            stick_breaking(params, truncation_tol, &mut rng)
        })
        .collect()
}

fn exact_atomic_draws(
    ecdf: &EmpiricalCdf,
    shapes: &[f64],
    seed: u64,
    stream: u64,
    draws: usize,
) -> Vec<DiscreteCdfDraw> {
    (0..draws as u64)
        .into_par_iter()
        .map(|i| atomic_draw(ecdf, shapes, &mut rng::bulk_substream(seed, stream, i)))
        .collect()
}

fn atomic_draw<R: Rng + ?Sized>(ecdf: &EmpiricalCdf, shapes: &[f64], rng: &mut R) -> DiscreteCdfDraw {
    let weights = if shapes.len() == 1 {
        vec![1.0]
    } else {
        dirichlet::sample_weights(shapes, rng).0
    };
    DiscreteCdfDraw {
        atoms: ecdf.atoms.clone(),
        weights,
        truncation_mass: 0.0,
    }
}

/// Dirichlet concentration vector of `DP(n, F̂ₙ)` on its atoms: the multiplicities.
pub fn bootstrap_concentration(ecdf: &EmpiricalCdf, n: u64) -> Result<Vec<f64>> {
    ecdf.multiplicities(n)
}

/// One draw from `DP(n, F̂ₙ)`, the Bayesian bootstrap posterior.
///
/// The weights on the atoms of `F̂ₙ` are exactly `Dirichlet(n·masses)`, so no
/// truncation is involved.
pub fn bayesian_bootstrap_draw(ecdf: &EmpiricalCdf, n: u64, seed: u64) -> Result<DiscreteCdfDraw> {
    let shapes = ecdf.multiplicities(n)?;
    Ok(atomic_draw(
        ecdf,
        &shapes,
        &mut rng::bulk_substream(seed, tag::BAYESIAN_BOOTSTRAP, 0),
    ))
}

/// `draws` Bayesian bootstrap draws; draw `i` uses substream `i`.
pub fn bayesian_bootstrap_draws(ecdf: &EmpiricalCdf, n: u64, seed: u64, draws: usize) -> Result<Vec<DiscreteCdfDraw>> {
    let shapes = ecdf.multiplicities(n)?;
    Ok(exact_atomic_draws(ecdf, &shapes, seed, tag::BAYESIAN_BOOTSTRAP, draws))
}

/// Draw `index` of the Bayesian bootstrap stream keyed by `(seed, stream)`.
#[cfg(test)]
pub(crate) fn bayesian_bootstrap_draw_at(
    ecdf: &EmpiricalCdf,
    shapes: &[f64],
    seed: u64,
    stream: u64,
    index: u64,
) -> DiscreteCdfDraw {
    atomic_draw(ecdf, shapes, &mut rng::bulk_substream(seed, stream, index))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub eps: f64,
    pub p: usize,
    pub c_eps: f64,
    /// `C_ε / ε`.
    pub ratio: f64,
}

/// `C_ε = Γ(ε)/∏Γ(ε/p)` over a grid, with uniform `F₀` on `p` cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessBoundReport {
    pub entries: Vec<BoundEntry>,
    /// `max_ε C_ε/ε` at the smallest `p`; claimed to bound every `p`.
    pub k: f64,
    /// Largest `C_ε/ε` anywhere in the grid.
    pub sup_ratio: f64,
    /// `C_ε ≤ K·ε` for every entry.
    pub bound_holds: bool,
    /// `C_ε` strictly increasing in ε at every `p`.
    pub monotone_in_eps: bool,
    /// `C_ε` non-increasing in `p` at every ε.
    pub nonincreasing_in_p: bool,
    /// `C_{ε/2} ≤ C_ε / 2` at every grid point.
    pub halving_holds: bool,
    pub pass: bool,
}

fn uniform_c_eps(eps: f64, p: usize) -> Result<f64> {
    DirichletParams::new(eps, ProbVector::uniform(p)?)?
        .log_c_eps()
        .map(f64::exp)
}

/// Checks that one constant `K` with `C_ε ≤ K·ε` serves every dimension in
/// `p_grid`.
pub fn process_invariance_bound(eps_grid: &[f64], p_grid: &[usize]) -> Result<ProcessBoundReport> {
    if eps_grid.is_empty() || p_grid.is_empty() {
        return Err(Error::InvalidParameter("ε and p grids must be nonempty".into()));
    }
    if let Some(bad) = eps_grid.iter().find(|&&e| !(e > 0.0 && e <= 0.5)) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 0.5], got {bad}")));
    }
    if let Some(bad) = p_grid.iter().find(|&&p| p < 2) {
        return Err(Error::InvalidParameter(format!("p must be at least 2, got {bad}")));
    }
    let mut eps: Vec<f64> = eps_grid.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut ps: Vec<usize> = p_grid.to_vec();
    ps.sort_unstable();
    ps.dedup();

    // table[j][i] = C(eps[i], ps[j])
    let table: Vec<Vec<f64>> = ps
        .iter()
        .map(|&p| eps.iter().map(|&e| uniform_c_eps(e, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let k = eps.iter().zip(&table[0]).map(|(e, c)| c / e).fold(0.0, f64::max);
    let mut entries = Vec::with_capacity(ps.len() * eps.len());
    for (row, &p) in table.iter().zip(&ps) {
        for (&c, &e) in row.iter().zip(&eps) {
            entries.push(BoundEntry {
                eps: e,
                p,
                c_eps: c,
                ratio: c / e,
            });
        }
    }
    let sup_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let bound_holds = entries.iter().all(|e| e.c_eps <= k * e.eps * (1.0 + 1e-12));
    let monotone_in_eps = table.iter().all(|row| row.windows(2).all(|w| w[0] < w[1]));
    let nonincreasing_in_p = table
        .windows(2)
        .all(|rows| rows[1].iter().zip(&rows[0]).all(|(next, prev)| next <= prev));
    let mut halving_holds = true;
    for (row, &p) in table.iter().zip(&ps) {
        for (&c, &e) in row.iter().zip(&eps) {
            halving_holds &= uniform_c_eps(e / 2.0, p)? <= c / 2.0;
        }
    }
    Ok(ProcessBoundReport {
        entries,
        k,
        sup_ratio,
        bound_holds,
        monotone_in_eps,
        nonincreasing_in_p,
        halving_holds,
        pass: bound_holds && monotone_in_eps && nonincreasing_in_p && halving_holds && k.is_finite(),
    })
}
