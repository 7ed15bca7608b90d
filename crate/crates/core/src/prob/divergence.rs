//! KL divergence, total variation and the moments of the log-likelihood ratio.
//! Everything is reported in bits.

use serde::{Deserialize, Serialize};

use super::distribution::{check_same_len, Distribution};
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Mean, variance and third absolute central moment of `log2(P(Y)/Q(Y))`
/// under `Y ~ P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlrMoments<T> {
    /// D(P||Q), bits.
    pub mean: T,
    /// V(P||Q), bits^2.
    pub variance: T,
    /// T(P||Q), bits^3.
    pub third_abs: T,
}

/// Per-symbol log-likelihood ratio in bits; `None` where `p(y) = 0`.
fn llr_terms<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<Vec<Option<T>>> {
    check_same_len(p, q)?;
    p.probs()
        .iter()
        .zip(q.probs())
        .enumerate()
        .map(|(i, (&pi, &qi))| {
            if pi <= T::zero() {
                Ok(None)
            } else if qi <= T::zero() {
                Err(Error::SupportViolation { index: i })
            } else {
                Ok(Some((pi / qi).ln() * T::LOG2_E()))
            }
        })
        .collect()
}

pub fn kl_divergence<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T> {
    let terms = llr_terms(p, q)?;
    let acc: CompensatedSum<T> = terms
        .iter()
        .zip(p.probs())
        .filter_map(|(l, &pi)| l.map(|l| pi * l))
        .collect();
    // Rounding can push a zero divergence slightly negative.
    Ok(acc.value().max(T::zero()))
}

pub fn total_variation<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T> {
    check_same_len(p, q)?;
    let acc: CompensatedSum<T> = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(&a, &b)| (a - b).abs())
        .collect();
    Ok((acc.value() * T::lit(0.5)).min(T::one()))
}

pub fn llr_moments<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<LlrMoments<T>> {
    let terms = llr_terms(p, q)?;
    let mean = kl_divergence(p, q)?;
    let mut var = CompensatedSum::new();
    let mut third = CompensatedSum::new();
    for (l, &pi) in terms.iter().zip(p.probs()) {
        if let Some(l) = l {
            let c = (*l - mean).abs();
            var.add(pi * c * c);
            third.add(pi * c * c * c);
        }
    }
    Ok(LlrMoments {
        mean,
        variance: var.value().max(T::zero()),
        third_abs: third.value().max(T::zero()),
    })
}

/// Single-symbol decoding metric `log2(p(y)/q(y))`.
pub fn decoding_metric<T: Real>(p: &Distribution<T>, q: &Distribution<T>, y: usize) -> Result<T> {
    check_same_len(p, q)?;
    if y >= p.len() {
        return Err(Error::Index {
            index: y,
            len: p.len(),
        });
    }
    let (py, qy) = (p.get(y), q.get(y));
    if py <= T::zero() || qy <= T::zero() {
        return Err(Error::SupportViolation { index: y });
    }
    Ok((py / qy).ln() * T::LOG2_E())
}
