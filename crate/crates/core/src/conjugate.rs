//! Power posteriors for exponential families with conjugate priors, and the
//! Bernoulli hypothesis-testing toy.
//!
//! For `p_θ(x) = h(x)·exp(θᵀs(x) − κ(θ))` and the conjugate prior
//! `π_{ξ,ν}(θ) = exp(θᵀξ − νκ(θ) − ψ(ξ,ν))`, raising the likelihood to the
//! power `ζ` keeps the posterior in the family:
//!
//! ```text
//! ξₙ = ξ + ζ·Σ s(xᵢ),    νₙ = ν + n·ζ,
//! ∫ π_{ξ,ν}(θ) Π p_θ(xᵢ)^ζ dθ = exp(ψ(ξₙ,νₙ) − ψ(ξ,ν)) · Π h(xᵢ)^ζ.
//! ```
//!
//! The toy compares `H₀: θ = 1/2` against `H₁: θ ~ Uniform(0, 1)` with equal
//! prior odds, either conditioning on the data exactly, on a relative-entropy
//! neighborhood of the empirical distribution (exact c-posterior), or through
//! the power-posterior approximation, which replaces `n` by `n·ζₙ`.

use std::f64::consts::{LN_2, PI};

use crate::coarsening::CoarseningConfig;
use crate::error::{domain, Error, Result};
use crate::mathcore::{binomial_ln_pmf, ln_beta_unchecked, log_sum_exp, normal_ln_pdf};

/// Natural parameters `(ξ, ν)` of a conjugate prior.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalConjugatePrior {
    pub xi: Vec<f64>,
    pub nu: f64,
}

impl NaturalConjugatePrior {
    pub fn new(xi: Vec<f64>, nu: f64) -> Self {
        Self { xi, nu }
    }
}

/// An exponential family with a closed-form conjugate log-normalizer.
pub trait ExponentialFamily {
    type Point;

    /// Length of the sufficient-statistic vector.
    fn dim(&self) -> usize;

    /// Adds `s(x)` into `acc`.
    fn accumulate_sufficient_stat(&self, x: &Self::Point, acc: &mut [f64]);

    /// `ln h(x)`, the base-measure term.
    fn log_base_measure(&self, x: &Self::Point) -> f64;

    fn is_admissible(&self, prior: &NaturalConjugatePrior) -> bool;

    /// `ψ(ξ, ν)`; only called on admissible parameters.
    fn log_partition_unchecked(&self, prior: &NaturalConjugatePrior) -> f64;

    fn log_partition(&self, prior: &NaturalConjugatePrior) -> Result<f64> {
        self.check(prior)?;
        Ok(self.log_partition_unchecked(prior))
    }

    fn check(&self, prior: &NaturalConjugatePrior) -> Result<()> {
        if prior.xi.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), found: prior.xi.len() });
        }
        if !self.is_admissible(prior) {
            return domain(format!("conjugate parameters {prior:?} are not admissible"));
        }
        Ok(())
    }
}

/// Bernoulli likelihood with a Beta prior on the success probability.
///
/// `Beta(a, b)` corresponds to `(ξ, ν) = (a − 1, a + b − 2)` and
/// `ψ(ξ, ν) = ln B(1 + ξ, 1 + ν − ξ)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BernoulliBeta;

impl BernoulliBeta {
    pub fn prior(a: f64, b: f64) -> NaturalConjugatePrior {
        NaturalConjugatePrior::new(vec![a - 1.0], a + b - 2.0)
    }

    /// The `(a, b)` shape parameters of the Beta distribution for `prior`.
    pub fn beta_shape(prior: &NaturalConjugatePrior) -> (f64, f64) {
        (1.0 + prior.xi[0], 1.0 + prior.nu - prior.xi[0])
    }
}

impl ExponentialFamily for BernoulliBeta {
    type Point = bool;

    fn dim(&self) -> usize {
        1
    }

    fn accumulate_sufficient_stat(&self, x: &bool, acc: &mut [f64]) {
        if *x {
            acc[0] += 1.0;
        }
    }

    fn log_base_measure(&self, _x: &bool) -> f64 {
        0.0
    }

    fn is_admissible(&self, prior: &NaturalConjugatePrior) -> bool {
        let (a, b) = Self::beta_shape(prior);
        a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()
    }

    fn log_partition_unchecked(&self, prior: &NaturalConjugatePrior) -> f64 {
        let (a, b) = Self::beta_shape(prior);
        ln_beta_unchecked(a, b)
    }
}

/// Normal likelihood with known standard deviation and a Normal prior on the mean.
///
/// `s(x) = x/σ²`, `κ(θ) = θ²/(2σ²)`, `h(x) = N(x | 0, σ²)`; a prior
/// `N(m, τ²)` has `ν = σ²/τ²`, `ξ = m/τ²` and
/// `ψ(ξ, ν) = σ²ξ²/(2ν) + ½ ln(2πσ²/ν)`.
#[derive(Clone, Copy, Debug)]
pub struct NormalKnownVariance {
    sigma: f64,
}

impl NormalKnownVariance {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("sigma must be > 0, got {sigma}"));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn prior(&self, mean: f64, sd: f64) -> NaturalConjugatePrior {
        NaturalConjugatePrior::new(vec![mean / (sd * sd)], self.sigma * self.sigma / (sd * sd))
    }

    /// `(mean, sd)` of the Normal distribution for `prior`.
    pub fn mean_sd(&self, prior: &NaturalConjugatePrior) -> (f64, f64) {
        let var = self.sigma * self.sigma / prior.nu;
        (prior.xi[0] * var, var.sqrt())
    }
}

impl ExponentialFamily for NormalKnownVariance {
    type Point = f64;

    fn dim(&self) -> usize {
        1
    }

    fn accumulate_sufficient_stat(&self, x: &f64, acc: &mut [f64]) {
        acc[0] += x / (self.sigma * self.sigma);
    }

    fn log_base_measure(&self, x: &f64) -> f64 {
        normal_ln_pdf(*x, 0.0, self.sigma)
    }

    fn is_admissible(&self, prior: &NaturalConjugatePrior) -> bool {
        prior.nu > 0.0 && prior.nu.is_finite() && prior.xi[0].is_finite()
    }

    fn log_partition_unchecked(&self, prior: &NaturalConjugatePrior) -> f64 {
        let s2 = self.sigma * self.sigma;
        let xi = prior.xi[0];
        s2 * xi * xi / (2.0 * prior.nu) + 0.5 * (2.0 * PI * s2 / prior.nu).ln()
    }
}

/// `(ξ + ζ·Σ s(xᵢ), ν + n·ζ)`.
pub fn power_update<F: ExponentialFamily>(
    family: &F,
    prior: &NaturalConjugatePrior,
    data: &[F::Point],
    zeta: f64,
) -> Result<NaturalConjugatePrior> {
    family.check(prior)?;
    if !(0.0..=1.0).contains(&zeta) {
        return domain(format!("zeta must lie in [0, 1], got {zeta}"));
    }
    let mut stats = vec![0.0; family.dim()];
    for x in data {
        family.accumulate_sufficient_stat(x, &mut stats);
    }
    let updated = NaturalConjugatePrior::new(
        prior.xi.iter().zip(&stats).map(|(xi, s)| xi + zeta * s).collect(),
        prior.nu + data.len() as f64 * zeta,
    );
    family.check(&updated)?;
    Ok(updated)
}

/// `ln ∫ π_{ξ,ν}(θ) Π p_θ(xᵢ)^ζ dθ`.
pub fn log_marginal_power_likelihood<F: ExponentialFamily>(
    family: &F,
    prior: &NaturalConjugatePrior,
    data: &[F::Point],
    zeta: f64,
) -> Result<f64> {
    let posterior = power_update(family, prior, data, zeta)?;
    let base: f64 = data.iter().map(|x| family.log_base_measure(x)).sum();
    Ok(family.log_partition_unchecked(&posterior) - family.log_partition_unchecked(prior) + zeta * base)
}

/// `ε ↦ 1/(2ε²)`: the coarsening level that tolerates shifts of about `ε`
/// in a Bernoulli mean near 1/2.
pub fn alpha_from_epsilon(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return domain(format!("epsilon must be > 0, got {eps}"));
    }
    Ok(1.0 / (2.0 * eps * eps))
}

/// `1 / (1 + exp(log_odds))`, evaluated without overflow.
fn prob_from_log_odds_against(log_odds: f64) -> f64 {
    if log_odds > 0.0 {
        let e = (-log_odds).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + log_odds.exp())
    }
}

/// `Pr(H₀ | effective size m) = 1/(1 + 2^m · B(1 + m·x̄, 1 + m(1 − x̄)))`.
fn toy_posterior_with_size(m: f64, xbar: f64) -> f64 {
    let log_odds = m * LN_2 + ln_beta_unchecked(1.0 + m * xbar, 1.0 + m * (1.0 - xbar));
    prob_from_log_odds_against(log_odds)
}

fn check_xbar(xbar: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&xbar) {
        return domain(format!("xbar must lie in [0, 1], got {xbar}"));
    }
    Ok(())
}

/// Standard posterior probability of `H₀` after `n` trials with mean `x̄`.
pub fn toy_standard_posterior(n: usize, xbar: f64) -> Result<f64> {
    check_xbar(xbar)?;
    Ok(toy_posterior_with_size(n as f64, xbar))
}

/// Power-posterior approximation to the c-posterior probability of `H₀`:
/// the standard formula with `n` replaced by `n·ζₙ`.
pub fn toy_approx_cposterior(n: usize, xbar: f64, cfg: &CoarseningConfig) -> Result<f64> {
    check_xbar(xbar)?;
    Ok(toy_posterior_with_size(cfg.effective_sample_size(n), xbar))
}

/// Exact c-posterior probability of `H₀`.
///
/// With `S = Σ Xᵢ`, `Pr(Z = 1 | h) = E[exp(−α·D(p̂ₓ‖p̂_X(S))) | h]` where
/// `S | H₀ ~ Binomial(n, 1/2)` and `S | H₁ ~ Uniform{0, …, n}`. Terms with
/// infinite divergence contribute zero. For `α = ∞` only `S = n·x̄` survives
/// and the result is the standard posterior.
pub fn toy_exact_cposterior(n: usize, xbar: f64, cfg: &CoarseningConfig) -> Result<f64> {
    check_xbar(xbar)?;
    let successes = n as f64 * xbar;
    if (successes - successes.round()).abs() > 1e-9 * (n as f64).max(1.0) {
        return domain(format!("n·xbar = {successes} is not a count"));
    }
    if n == 0 {
        return Ok(0.5);
    }
    if cfg.is_standard() {
        return toy_standard_posterior(n, xbar);
    }
    let alpha = cfg.alpha();
    let nf = n as f64;
    let ln_uniform = -(nf + 1.0).ln();
    let mut log_h0 = Vec::with_capacity(n + 1);
    let mut log_h1 = Vec::with_capacity(n + 1);
    for s in 0..=n {
        let d = bernoulli_divergence(xbar, s as f64 / nf);
        if d.is_infinite() {
            continue;
        }
        log_h0.push(binomial_ln_pmf(s as u64, n as u64, 0.5) - alpha * d);
        log_h1.push(ln_uniform - alpha * d);
    }
    let log_odds = log_sum_exp(&log_h1) - log_sum_exp(&log_h0);
    Ok(prob_from_log_odds_against(log_odds))
}

/// `D((1−p, p) ‖ (1−q, q))` with the `0·ln 0 = 0` convention.
pub(crate) fn bernoulli_divergence(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    (term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0)
}
