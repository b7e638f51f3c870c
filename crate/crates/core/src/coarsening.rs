//! The coarsening calculus.
//!
//! A coarsened posterior conditions on the event that the empirical
//! distribution of idealized model data lies within a random radius
//! `R ~ Exponential(α)` of the observed empirical distribution. For relative
//! entropy this is approximated by tempering the likelihood with
//!
//! ```text
//! ζₙ = 1 / (1 + n/α),
//! ```
//!
//! so that inference behaves as if the sample size were `n·ζₙ ≤ α`.
//!
//! This module holds that schedule, the divergences on finite simplices, the
//! large-sample reweighting form `prior · exp(−α·d)`, and the two sides of
//! the small-sample correction
//!
//! ```text
//! E exp(−α D(p‖ŝ)) ≈ (nζₙ/α)^((k−1)/2) · exp(−nζₙ D(p‖s)),
//! ```
//!
//! one evaluated in closed form and one by Monte Carlo over multinomial
//! empirical distributions.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::mathcore::{sample_unit, RandomSource};

/// Coarsening parameter `α`, the rate of the exponential prior on the
/// neighborhood radius. `α = +∞` is the standard posterior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseningConfig {
    alpha: f64,
}

impl CoarseningConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return domain(format!("alpha must be > 0 (or +inf), got {alpha}"));
        }
        Ok(Self { alpha })
    }

    /// The uncoarsened configuration, `α = +∞`.
    pub fn standard() -> Self {
        Self { alpha: f64::INFINITY }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_standard(&self) -> bool {
        self.alpha.is_infinite()
    }

    /// The tempering exponent `ζₙ = 1/(1 + n/α)`.
    pub fn zeta(&self, n: usize) -> f64 {
        zeta(n, self)
    }

    /// `n·ζₙ = 1/(1/n + 1/α)`, the effective sample size.
    pub fn effective_sample_size(&self, n: usize) -> f64 {
        n as f64 * self.zeta(n)
    }
}

/// `ζₙ = 1/(1 + n/α)`; exactly 1 when `α = ∞` or `n = 0`.
pub fn zeta(n: usize, cfg: &CoarseningConfig) -> f64 {
    1.0 / (1.0 + n as f64 / cfg.alpha)
}

/// A probability vector over a finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexVector {
    weights: Vec<f64>,
}

const SIMPLEX_SUM_TOL: f64 = 1e-12;

impl SimplexVector {
    /// Validates non-negativity and that the entries sum to one within `1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return domain("simplex vector must be non-empty");
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return domain(format!("simplex entries must be finite and >= 0, found {w}"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_SUM_TOL {
            return domain(format!("simplex entries sum to {total}, not 1"));
        }
        Ok(Self { weights })
    }

    /// Normalizes non-negative weights.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return domain("weights must be finite and >= 0");
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Normalization);
        }
        Ok(Self { weights: weights.into_iter().map(|w| w / total).collect() })
    }

    /// Normalizes `exp(log_weights)` with max-subtraction.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Normalization);
        }
        Self::from_unnormalized(log_weights.iter().map(|l| (l - max).exp()).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return domain("uniform simplex needs k >= 1");
        }
        Ok(Self { weights: vec![1.0 / k as f64; k] })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    /// Index of the largest entry (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

fn check_same_len(p: &SimplexVector, q: &SimplexVector) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Shape { expected: p.len(), found: q.len() });
    }
    Ok(())
}

/// `D(p‖q) = Σ pᵢ ln(pᵢ/qᵢ)`, with `0·ln(0/·) = 0` and `+∞` when some
/// `qᵢ = 0 < pᵢ`.
pub fn relative_entropy(p: &SimplexVector, q: &SimplexVector) -> Result<f64> {
    check_same_len(p, q)?;
    Ok(relative_entropy_slices(p.as_slice(), q.as_slice()))
}

pub(crate) fn relative_entropy_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        total += pi * (pi / qi).ln();
    }
    // Rounding can push an exact-zero divergence slightly negative.
    total.max(0.0)
}

fn check_strictly_positive(q: &SimplexVector) -> Result<()> {
    if let Some(i) = q.as_slice().iter().position(|&x| x <= 0.0) {
        return domain(format!("reference distribution has a zero entry at index {i}"));
    }
    Ok(())
}

/// `χ²(p, q) = Σ (pᵢ − qᵢ)²/qᵢ`; `q` must be strictly positive.
pub fn chi_squared(p: &SimplexVector, q: &SimplexVector) -> Result<f64> {
    check_same_len(p, q)?;
    check_strictly_positive(q)?;
    Ok(p.as_slice().iter().zip(q.as_slice()).map(|(pi, qi)| (pi - qi) * (pi - qi) / qi).sum())
}

/// The inverse of the multinomial covariance `C = diag(q′) − q′q′ᵀ` on the
/// first `k − 1` coordinates, in closed form by Sherman–Morrison:
/// `C⁻¹ = diag(q′)⁻¹ + (1/q_k)·11ᵀ`.
pub fn multinomial_precision(q: &SimplexVector) -> Result<DMatrix<f64>> {
    check_strictly_positive(q)?;
    let k = q.len();
    if k < 2 {
        return domain("multinomial precision needs k >= 2");
    }
    let q_last = q[k - 1];
    Ok(DMatrix::from_fn(k - 1, k - 1, |i, j| {
        let diag = if i == j { 1.0 / q[i] } else { 0.0 };
        diag + 1.0 / q_last
    }))
}

/// `(p′ − q′)ᵀ C⁻¹ (p′ − q′)`, the Mahalanobis form of the chi-squared
/// distance on the first `k − 1` coordinates. Equal to [`chi_squared`].
pub fn mahalanobis_chi_squared(p: &SimplexVector, q: &SimplexVector) -> Result<f64> {
    check_same_len(p, q)?;
    let precision = multinomial_precision(q)?;
    let k = p.len();
    let diff = DVector::from_fn(k - 1, |i, _| p[i] - q[i]);
    Ok(diff.dot(&(&precision * &diff)))
}

/// Closed-form side of the small-sample correction,
/// `(nζₙ/α)^((k−1)/2) · exp(−nζₙ·D(p‖s))`.
pub fn small_sample_rhs(p: &SimplexVector, s: &SimplexVector, n: usize, cfg: &CoarseningConfig) -> Result<f64> {
    check_same_len(p, s)?;
    check_strictly_positive(s)?;
    if cfg.is_standard() {
        return domain("small-sample correction is undefined for alpha = inf");
    }
    if n == 0 {
        return domain("small-sample correction needs n >= 1");
    }
    let eff = cfg.effective_sample_size(n);
    let k = p.len() as f64;
    let d = relative_entropy_slices(p.as_slice(), s.as_slice());
    Ok((eff / cfg.alpha()).powf(0.5 * (k - 1.0)) * (-eff * d).exp())
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte-Carlo estimate of `E exp(−α D(p‖ŝ))`, where `ŝ` is the empirical
/// distribution of `n` i.i.d. draws from `s`. Draws leaving a cell empty
/// where `p` is positive have `D = ∞` and contribute zero.
pub fn small_sample_lhs_mc(
    p: &SimplexVector,
    s: &SimplexVector,
    n: usize,
    cfg: &CoarseningConfig,
    draws: usize,
    rng: &mut RandomSource,
) -> Result<MonteCarloEstimate> {
    check_same_len(p, s)?;
    check_strictly_positive(s)?;
    if n == 0 || draws == 0 {
        return domain("small_sample_lhs_mc needs n >= 1 and draws >= 1");
    }
    let k = s.len();
    let mut cumulative = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &si in s.as_slice() {
        acc += si;
        cumulative.push(acc);
    }
    let alpha = cfg.alpha();
    let mut counts = vec![0usize; k];
    let mut empirical = vec![0.0; k];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..draws {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..n {
            let u = sample_unit(rng) * acc;
            let cell = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);
            counts[cell] += 1;
        }
        for (e, &c) in empirical.iter_mut().zip(&counts) {
            *e = c as f64 / n as f64;
        }
        let d = relative_entropy_slices(p.as_slice(), &empirical);
        let value = if d.is_infinite() { 0.0 } else { (-alpha * d).exp() };
        sum += value;
        sum_sq += value * value;
    }
    let m = draws as f64;
    let mean = sum / m;
    let var = if draws > 1 { ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarloEstimate { estimate: mean, std_error: (var / m).sqrt() })
}

/// Large-sample c-posterior over a finite hypothesis grid: weights
/// `∝ priorᵢ · exp(−α·distanceᵢ)`, computed in log space. With `α = ∞` all
/// mass goes to the minimum-distance hypotheses (split uniformly on ties,
/// restricted to hypotheses with positive prior mass).
pub fn asymptotic_reweight(prior: &SimplexVector, distances: &[f64], cfg: &CoarseningConfig) -> Result<SimplexVector> {
    if distances.len() != prior.len() {
        return Err(Error::Shape { expected: prior.len(), found: distances.len() });
    }
    if let Some(d) = distances.iter().find(|d| !(**d >= 0.0)) {
        return domain(format!("distances must be >= 0, found {d}"));
    }
    if cfg.is_standard() {
        let min = prior
            .as_slice()
            .iter()
            .zip(distances)
            .filter(|(w, _)| **w > 0.0)
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Err(Error::Normalization);
        }
        let mask: Vec<f64> = prior
            .as_slice()
            .iter()
            .zip(distances)
            .map(|(w, d)| if *w > 0.0 && *d == min { 1.0 } else { 0.0 })
            .collect();
        return SimplexVector::from_unnormalized(mask);
    }
    let alpha = cfg.alpha();
    let log_w: Vec<f64> = prior.as_slice().iter().zip(distances).map(|(w, d)| w.ln() - alpha * d).collect();
    SimplexVector::from_log_weights(&log_w)
}
