use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point on the probability simplex of a fixed, finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution<T> {
    probs: Vec<T>,
}

impl<T: Real> Distribution<T> {
    /// Validates `probs`: at least two entries, all finite and nonnegative,
    /// total mass one. Inputs whose mass is off by at most `T::RENORM_TOL`
    /// are renormalized; larger deviations are rejected.
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 symbols, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < T::zero() {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is {p}, expected a finite nonnegative value"
                )));
            }
        }
        let total: T = probs.iter().copied().sum();
        let dev = (total - T::one()).abs();
        if dev > T::lit(T::RENORM_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        let probs = if dev > T::zero() {
            probs.into_iter().map(|p| p / total).collect()
        } else {
            probs
        };
        Ok(Self { probs })
    }

    /// Binary distribution `(q, 1 - q)`.
    pub fn binary(q: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&q) {
            return Err(Error::InvalidDistribution(format!(
                "binary parameter {q} outside [0, 1]"
            )));
        }
        Ok(Self {
            probs: vec![q, T::one() - q],
        })
    }

    /// Uniform distribution on `k` symbols.
    pub fn uniform(k: usize) -> Result<Self> {
        let p = T::one() / T::from_usize_lossy(k);
        Self::new(vec![p; k])
    }

    pub(crate) fn from_raw(probs: Vec<T>) -> Self {
        debug_assert!(probs.len() >= 2);
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, y: usize) -> T {
        self.probs[y]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > T::zero())
    }

    /// Largest coordinate difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.as_f64()).collect()
    }
}

impl<T> AsRef<[T]> for Distribution<T> {
    fn as_ref(&self) -> &[T] {
        &self.probs
    }
}

pub(crate) fn check_same_len<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}
