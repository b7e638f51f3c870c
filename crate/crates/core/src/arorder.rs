//! Coarsened marginal likelihood of autoregressive models and the resulting
//! posterior over the order.
//!
//! For `X_t = Σ_{ℓ≤k} θ_ℓ X_{t−ℓ} + ε_t`, `ε_t ~ N(0, σ²)` with `X_t = 0` for
//! `t ≤ 0`, and `θ ~ N(0, σ₀² I)`, the marginal power likelihood is
//!
//! ```text
//! p_c(x | k) = exp(½ ζ² vᵀΛ⁻¹v) / (σ₀ᵏ |Λ|^{1/2}) · N(x | 0, σ² I)^ζ,
//! Λ = ζ M + σ₀⁻² I,   M_ij = Σ_t x_{t−i} x_{t−j} / σ²,   v_i = Σ_t x_t x_{t−i} / σ².
//! ```
//!
//! The statistics for order `k` are the leading block of those for any
//! larger order, so a sweep over `k = 0..=kmax` computes them once.

use nalgebra::{DMatrix, DVector};

use crate::coarsening::{CoarseningConfig, SimplexVector};
use crate::error::{domain, Error, Result};
use crate::mathcore::{normal_ln_pdf, sample_normal, RandomSource};

/// Order, known noise sd, and prior sd of the coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ARModelSpec {
    pub order: usize,
    pub sigma: f64,
    pub sigma0: f64,
}

impl ARModelSpec {
    pub fn new(order: usize, sigma: f64, sigma0: f64) -> Result<Self> {
        check_scales(sigma, sigma0)?;
        Ok(Self { order, sigma, sigma0 })
    }
}

fn check_scales(sigma: f64, sigma0: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() || !(sigma0 > 0.0) || !sigma0.is_finite() {
        return domain(format!("sigma and sigma0 must be finite and > 0, got ({sigma}, {sigma0})"));
    }
    Ok(())
}

/// Lag cross-products `M` (k×k) and `v` (k), both scaled by `1/σ²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ARSuffStats {
    pub m: DMatrix<f64>,
    pub v: DVector<f64>,
}

impl ARSuffStats {
    pub fn order(&self) -> usize {
        self.v.len()
    }

    /// Statistics for a smaller order (the leading block).
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order());
        Self { m: self.m.view((0, 0), (order, order)).into_owned(), v: self.v.rows(0, order).into_owned() }
    }
}

/// Computes `M` and `v` for order `k`, treating values before the series as zero.
pub fn ar_suff_stats(x: &[f64], k: usize, sigma: f64) -> Result<ARSuffStats> {
    if x.is_empty() {
        return domain("AR statistics need at least one observation");
    }
    if !(sigma > 0.0) {
        return domain(format!("sigma must be > 0, got {sigma}"));
    }
    let s2 = sigma * sigma;
    let n = x.len();
    let lag = |t: usize, l: usize| if t >= l { x[t - l] } else { 0.0 };
    let mut m = DMatrix::zeros(k, k);
    let mut v = DVector::zeros(k);
    for i in 1..=k {
        v[i - 1] = (0..n).map(|t| x[t] * lag(t, i)).sum::<f64>() / s2;
        for j in i..=k {
            // Only t ≥ j contributes, as both lags must reach back into the series.
            let sum: f64 = (j..n).map(|t| x[t - i] * x[t - j]).sum();
            m[(i - 1, j - 1)] = sum / s2;
            m[(j - 1, i - 1)] = sum / s2;
        }
    }
    Ok(ARSuffStats { m, v })
}

/// `ln N(x | 0, σ² I)`.
fn log_white_noise(x: &[f64], sigma: f64) -> f64 {
    x.iter().map(|&xt| normal_ln_pdf(xt, 0.0, sigma)).sum()
}

fn log_marginal_from_stats(stats: &ARSuffStats, sigma0: f64, zeta: f64, log_noise: f64) -> Result<f64> {
    let k = stats.order();
    if k == 0 {
        return Ok(zeta * log_noise);
    }
    let prior_precision = 1.0 / (sigma0 * sigma0);
    let lambda = &stats.m * zeta + DMatrix::identity(k, k) * prior_precision;
    let chol =
        lambda.cholesky().ok_or_else(|| Error::Numerical(format!("Λ is not positive definite for order {k}")))?;
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let solved = chol.solve(&stats.v);
    let quad = stats.v.dot(&solved);
    Ok(0.5 * zeta * zeta * quad - k as f64 * sigma0.ln() - 0.5 * log_det + zeta * log_noise)
}

/// Log marginal power likelihood `ln p_c(x | k)` with `ζ = ζₙ(α)`.
pub fn log_coarsened_marginal(x: &[f64], spec: &ARModelSpec, cfg: &CoarseningConfig) -> Result<f64> {
    check_scales(spec.sigma, spec.sigma0)?;
    let stats = ar_suff_stats(x, spec.order, spec.sigma)?;
    let zeta = cfg.zeta(x.len());
    log_marginal_from_stats(&stats, spec.sigma0, zeta, log_white_noise(x, spec.sigma))
}

/// `ln p_c(x | k)` for every `k = 0..=kmax`.
pub fn log_marginals_over_orders(
    x: &[f64],
    kmax: usize,
    sigma: f64,
    sigma0: f64,
    cfg: &CoarseningConfig,
) -> Result<Vec<f64>> {
    check_scales(sigma, sigma0)?;
    let full = ar_suff_stats(x, kmax, sigma)?;
    let zeta = cfg.zeta(x.len());
    let log_noise = log_white_noise(x, sigma);
    (0..=kmax).map(|k| log_marginal_from_stats(&full.truncate(k), sigma0, zeta, log_noise)).collect()
}

/// `π_c(k | x) ∝ p_c(x | k) π(k)` over `k = 0..=kmax`; `prior = None` is
/// uniform on the grid.
pub fn cposterior_over_orders(
    x: &[f64],
    kmax: usize,
    sigma: f64,
    sigma0: f64,
    cfg: &CoarseningConfig,
    prior: Option<&SimplexVector>,
) -> Result<SimplexVector> {
    let mut log_post = log_marginals_over_orders(x, kmax, sigma, sigma0, cfg)?;
    if let Some(prior) = prior {
        if prior.len() != kmax + 1 {
            return Err(Error::Shape { expected: kmax + 1, found: prior.len() });
        }
        for (lp, w) in log_post.iter_mut().zip(prior.as_slice()) {
            *lp += w.ln();
        }
    }
    SimplexVector::from_log_weights(&log_post)
}

/// Parameters of the misspecified generator: an AR process plus a
/// deterministic sinusoid in time, which no AR(k) model captures.
#[derive(Clone, Debug, PartialEq)]
pub struct MisspecArConfig {
    pub theta: Vec<f64>,
    pub noise_sd: f64,
    pub sin_amp: f64,
}

impl Default for MisspecArConfig {
    fn default() -> Self {
        Self { theta: vec![0.25, 0.25, -0.25, 0.25], noise_sd: 1.0, sin_amp: 0.5 }
    }
}

/// `x_t = Σ θ_ℓ x_{t−ℓ} + ε_t + amp·sin(t)` for `t = 1..=n`, `ε_t ~ N(0, sd²)`.
pub fn generate_misspec_ar(n: usize, cfg: &MisspecArConfig, rng: &mut RandomSource) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("series length must be >= 1");
    }
    if !(cfg.noise_sd >= 0.0) {
        return domain(format!("noise sd must be >= 0, got {}", cfg.noise_sd));
    }
    let mut x = Vec::with_capacity(n);
    for t in 1..=n {
        let ar: f64 = cfg.theta.iter().enumerate().filter(|(l, _)| *l < t - 1).map(|(l, th)| th * x[t - 2 - l]).sum();
        let noise = if cfg.noise_sd > 0.0 { sample_normal(rng, 0.0, cfg.noise_sd) } else { 0.0 };
        x.push(ar + noise + cfg.sin_amp * (t as f64).sin());
    }
    Ok(x)
}
