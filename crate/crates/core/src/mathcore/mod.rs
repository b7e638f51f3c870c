//! Special functions, distributions and reproducible random streams.

mod distributions;
mod rng;
mod skew_normal;
mod special;

pub use distributions::{
    beta_binomial_ln_pmf, binomial_ln_pmf, gamma_ln_pdf, normal_ln_pdf, normal_ln_pdf_precision, sample_gamma,
    sample_normal, sample_standard_normal, sample_unit, HALF_NORMAL_MEAN,
};
pub use rng::{derive_stream, RandomSource, RNG_ALGORITHM};
pub use skew_normal::{MultivariateSkewNormal, SkewNormal};
pub(crate) use special::ln_beta_unchecked;
pub use special::{
    erfc, gamma_quantile, ln_beta, ln_gamma, log_sum_exp, normal_cdf, regularized_gamma_p, regularized_gamma_q,
};
