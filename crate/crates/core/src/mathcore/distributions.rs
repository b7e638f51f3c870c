//! Log-densities and samplers for the textbook distributions used by the
//! models. Samplers delegate to `rand_distr`; densities are written out here.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::special::{ln_beta_unchecked, ln_gamma_unchecked};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln N(x | mean, sd²)`.
#[inline]
pub fn normal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * (LN_2PI + z * z) - sd.ln()
}

/// `ln N(x | mean, 1/precision)`.
#[inline]
pub fn normal_ln_pdf_precision(x: f64, mean: f64, precision: f64) -> f64 {
    let d = x - mean;
    0.5 * (precision.ln() - LN_2PI - precision * d * d)
}

/// `ln Ga(x | shape, rate)` for `x > 0`; `−∞` for `x ≤ 0`.
pub fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma_unchecked(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// `ln Binomial(k | n, p)`.
pub fn binomial_ln_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (k, n) = (k as f64, n as f64);
    let ln_choose = ln_gamma_unchecked(n + 1.0) - ln_gamma_unchecked(k + 1.0) - ln_gamma_unchecked(n - k + 1.0);
    let term = |count: f64, prob: f64| if count == 0.0 { 0.0 } else { count * prob.ln() };
    ln_choose + term(k, p) + term(n - k, 1.0 - p)
}

/// `ln BetaBinomial(k | n, a, b)`.
pub fn beta_binomial_ln_pmf(k: u64, n: u64, a: f64, b: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (kf, nf) = (k as f64, n as f64);
    let ln_choose = ln_gamma_unchecked(nf + 1.0) - ln_gamma_unchecked(kf + 1.0) - ln_gamma_unchecked(nf - kf + 1.0);
    ln_choose + ln_beta_unchecked(kf + a, nf - kf + b) - ln_beta_unchecked(a, b)
}

#[inline]
pub fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[inline]
pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    mean + sd * sample_standard_normal(rng)
}

/// Draw from `Ga(shape, rate)`. Panics on non-positive parameters, which the
/// callers validate upstream.
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    Gamma::new(shape, 1.0 / rate).expect("gamma parameters validated by caller").sample(rng)
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Mean of the half-normal `|U|`, `√(2/π)`.
pub const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;
