//! Achievability bounds: the neighbor-union bound for general packings and
//! its closed form for binary outputs, where the count of the first symbol
//! is sufficient and each pairwise error event is a binomial tail.

use rayon::prelude::*;

use super::exact::error_event_prob;
use super::neighbors::neighbor_set;
use crate::approx::pairwise_error_estimate;
use crate::error::{Error, Result};
use crate::packing::{build_binary_message_set_by_size, MessageSet, PackingKind};
use crate::prob::{binomial_tail, llr_moments};
use crate::scalar::{CompensatedSum, Real};

/// `ln((1-p_j)/(1-p_m)) / ln(p_m (1-p_j) / (p_j (1-p_m)))`: the fraction of
/// the blocklength at which the first-symbol count makes `p_m` and `p_j`
/// equally likely. Increasing in `p_j`.
pub fn threshold_fraction<T: Real>(p_m: T, p_j: T) -> T {
    let one = T::one();
    ((one - p_j) / (one - p_m)).ln() / ((p_m * (one - p_j)) / (p_j * (one - p_m))).ln()
}

/// `x` snapped to the nearest integer when within a relative `TIE_TOL`, so
/// exact ties survive the rounding that follows.
fn snap<T: Real>(x: T) -> T {
    let r = x.round();
    if (x - r).abs() <= T::lit(T::TIE_TOL) * x.abs().max(T::one()) {
        r
    } else {
        x
    }
}

fn to_count<T: Real>(x: T, lo: i64, hi: i64) -> i64 {
    if x.is_nan() {
        return lo;
    }
    x.to_f64().map_or(lo, |v| v.clamp(lo as f64, hi as f64) as i64)
}

/// Largest first-symbol count at which the lower neighbor `p_lo` is at least
/// as likely as `p_m`, clamped to `[-1, n]` (`-1` means no such count).
pub fn lower_threshold<T: Real>(p_m: T, p_lo: T, n: u64) -> i64 {
    let x = snap(T::lit(n as f64) * threshold_fraction(p_m, p_lo));
    to_count(x.floor(), -1, n as i64)
}

/// Smallest first-symbol count at which the upper neighbor `p_hi` is at least
/// as likely as `p_m`, clamped to `[0, n + 1]` (`n + 1` means none).
pub fn upper_threshold<T: Real>(p_m: T, p_hi: T, n: u64) -> i64 {
    let x = snap(T::lit(n as f64) * threshold_fraction(p_m, p_hi));
    to_count(x.ceil(), 0, n as i64 + 1)
}

/// Per-message neighbor error sums for a binary packing, before clamping.
pub fn binary_summands<T: Real>(set: &MessageSet<T>, n: u64) -> Result<Vec<T>> {
    if set.kind() != PackingKind::Binary || set.alphabet_size() != 2 {
        return Err(Error::InvalidParameter("expected a binary packing".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    let p: Vec<T> = set.centers().iter().map(|c| c.get(0)).collect();
    let len = p.len();
    Ok((0..len)
        .map(|i| {
            let mut s = T::zero();
            if i > 0 {
                s = s + binomial_tail(n, 0, lower_threshold(p[i], p[i - 1], n), p[i]);
            }
            if i + 1 < len {
                s = s + binomial_tail(n, upper_threshold(p[i], p[i + 1], n), n as i64, p[i]);
            }
            s
        })
        .collect())
}

fn clamped_average<T: Real>(summands: impl IntoIterator<Item = T>, count: usize) -> T {
    let sum: CompensatedSum<T> = summands.into_iter().map(|s| s.min(T::one())).collect();
    sum.value() / T::from_usize_lossy(count)
}

/// Closed-form bound for any binary interval packing: the average over
/// messages of `min{1, lower tail + upper tail}`.
pub fn binary_achievability<T: Real>(set: &MessageSet<T>, n: u64) -> Result<T> {
    if set.len() < 2 {
        return Ok(T::zero());
    }
    let s = binary_summands(set, n)?;
    Ok(clamped_average(s, set.len()))
}

/// BSC bound on a packing built with `delta1 = delta2 = delta`.
pub fn bsc_achievability<T: Real>(delta: T, set: &MessageSet<T>, n: u64) -> Result<T> {
    if !(delta > T::zero() && delta < T::lit(0.5)) {
        return Err(Error::InvalidParameter(format!("crossover must lie in (0, 1/2), got {delta}")));
    }
    if set.len() >= 2 {
        let bp = set
            .binary_params()
            .ok_or_else(|| Error::InvalidParameter("expected a binary packing".into()))?;
        let tol = T::lit(T::SIMPLEX_TOL);
        if (bp.delta1 - delta).abs() > tol || (bp.delta2 - delta).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "packing spans [{}, 1 - {}], not the BSC image for crossover {delta}",
                bp.delta1, bp.delta2
            )));
        }
    }
    binary_achievability(set, n)
}

/// BEC bound: the BSC bound with crossover `eta / 2` on `m` evenly spaced
/// centers.
pub fn bec_achievability<T: Real>(eta: T, m: usize, n: u64) -> Result<T> {
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::InvalidParameter(format!("erasure probability must lie in (0, 1), got {eta}")));
    }
    let delta = eta / T::lit(2.0);
    bsc_achievability(delta, &build_binary_message_set_by_size(delta, delta, m)?, n)
}

/// Convenience: BSC bound on `m` evenly spaced centers.
pub fn bsc_achievability_by_size<T: Real>(delta: T, m: usize, n: u64) -> Result<T> {
    if m < 2 {
        return Ok(T::zero());
    }
    bsc_achievability(delta, &build_binary_message_set_by_size(delta, delta, m)?, n)
}

/// Per-message neighbor sums `sum_{Q in R_m} P_m[sum LLR <= 0]` by exact type
/// enumeration, unclamped. Computed in parallel; order is by message index.
pub fn general_summands<T: Real>(set: &MessageSet<T>, n: u64) -> Result<Vec<T>> {
    (0..set.len())
        .into_par_iter()
        .map(|m| {
            let ns = neighbor_set(set, m)?;
            let mut acc = CompensatedSum::new();
            for (_, q) in &ns.neighbors {
                acc.add(error_event_prob(set.center(m), q, n)?);
            }
            Ok(acc.value())
        })
        .collect()
}

/// Neighbor-union bound averaged over uniform messages, each summand clamped
/// at 1. Fails with a resource error when a pair exceeds the type cap.
pub fn achievability_general<T: Real>(set: &MessageSet<T>, n: u64) -> Result<T> {
    if set.len() < 2 {
        return Ok(T::zero());
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    let s = general_summands(set, n)?;
    Ok(clamped_average(s, set.len()))
}

/// As [`achievability_general`], with every pairwise term replaced by the
/// Berry–Esseen upper estimate `min{1, Phi(-sqrt(n) D / sqrt(V)) + B_n/sqrt(n)}`.
pub fn achievability_normal<T: Real>(set: &MessageSet<T>, n: u64) -> Result<T> {
    if set.len() < 2 {
        return Ok(T::zero());
    }
    let s = (0..set.len())
        .into_par_iter()
        .map(|m| {
            let ns = neighbor_set(set, m)?;
            let mut acc = CompensatedSum::new();
            for (_, q) in &ns.neighbors {
                let mom = llr_moments(set.center(m), q)?;
                acc.add(pairwise_error_estimate(&mom, n)?.upper());
            }
            Ok(acc.value())
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(clamped_average(s, set.len()))
}

/// Exact bound when the type enumeration fits, Berry–Esseen otherwise. The
/// flag is `true` when the exact path was used.
pub fn achievability_general_or_normal<T: Real>(set: &MessageSet<T>, n: u64) -> Result<(T, bool)> {
    match achievability_general(set, n) {
        Ok(v) => Ok((v, true)),
        Err(Error::ResourceCap { .. }) => Ok((achievability_normal(set, n)?, false)),
        Err(e) => Err(e),
    }
}
