//! Probability primitives: distributions, divergences, the standard normal
//! and binomial tails.

pub mod binomial;
pub mod distribution;
pub mod divergence;
pub mod normal;

pub use binomial::{binomial_ln_pmf, binomial_tail, ln_binomial_coeff, ln_factorial};
pub use distribution::Distribution;
pub use divergence::{decoding_metric, kl_divergence, llr_moments, total_variation, LlrMoments};
pub use normal::{erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};
