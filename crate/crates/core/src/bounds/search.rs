//! Largest code size whose achievability bound meets a target error.
//!
//! The bound is empirically increasing in the code size, so the scan stops at
//! the first violation, but only after checking that the next few sizes also
//! violate.

use serde::{Deserialize, Serialize};

use super::achievability::{achievability_general_or_normal, bec_achievability, bsc_achievability_by_size};
use super::{BoundPoint, Method};
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::packing::build_dmc_message_set_with_grid;
use crate::scalar::Real;

/// Sizes checked past the first violation before the scan gives up.
pub const LOOKAHEAD: usize = 3;
/// Hard stop on the scan (code size for binary channels, grid resolution
/// otherwise).
pub const MAX_SCAN: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelSpec<T> {
    Bsc { delta: T },
    Bec { eta: T },
    Matrix { w: ChannelMatrix<T> },
}

impl<T: Real> ChannelSpec<T> {
    /// The full-rank channel matrix the bound is taken over.
    pub fn matrix(&self) -> Result<ChannelMatrix<T>> {
        match self {
            ChannelSpec::Bsc { delta } => ChannelMatrix::bsc(*delta),
            ChannelSpec::Bec { eta } => ChannelMatrix::bec(*eta),
            ChannelSpec::Matrix { w } => Ok(w.clone()),
        }
    }

    pub fn bound_method(&self) -> Method {
        match self {
            ChannelSpec::Bsc { .. } => Method::Thm3Bsc,
            ChannelSpec::Bec { .. } => Method::Thm4Bec,
            ChannelSpec::Matrix { .. } => Method::Thm2Exact,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ChannelSpec::Bsc { delta } if !(*delta > T::zero() && *delta < T::lit(0.5)) => {
                Err(Error::InvalidParameter(format!("crossover must lie in (0, 1/2), got {delta}")))
            }
            ChannelSpec::Bec { eta } if !(*eta > T::zero() && *eta < T::one()) => {
                Err(Error::InvalidParameter(format!("erasure probability must lie in (0, 1), got {eta}")))
            }
            ChannelSpec::Matrix { w } => {
                if !w.strictly_positive() {
                    return Err(Error::InvalidParameter("channel matrix must be strictly positive".into()));
                }
                w.require_full_rank_square().map(|_| ())
            }
            _ => Ok(()),
        }
    }
}

/// Bound at a given size: code size `m` for BSC/BEC, grid resolution for a
/// general matrix. Returns the realized code size with the bound.
pub fn evaluate_bound<T: Real>(channel: &ChannelSpec<T>, n: u64, size: usize) -> Result<BoundPoint<T>> {
    channel.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    let (m, eps, method) = match channel {
        ChannelSpec::Bsc { delta } => (size, bsc_achievability_by_size(*delta, size, n)?, Method::Thm3Bsc),
        ChannelSpec::Bec { eta } => {
            let v = if size < 2 { T::zero() } else { bec_achievability(*eta, size, n)? };
            (size, v, Method::Thm4Bec)
        }
        ChannelSpec::Matrix { w } => {
            let set = build_dmc_message_set_with_grid(w, size)?;
            let (v, exact) = achievability_general_or_normal(&set, n)?;
            (set.len(), v, if exact { Method::Thm2Exact } else { Method::Thm2BerryEsseen })
        }
    };
    Ok(BoundPoint::from_count(n, None, m, Some(eps), method))
}

/// One scan step: `Ok(None)` when the size produces no usable code (an empty
/// or single-center grid), otherwise the realized size, bound and method.
fn probe<T: Real>(channel: &ChannelSpec<T>, n: u64, size: usize) -> Result<Option<(usize, T, Method)>> {
    match channel {
        ChannelSpec::Matrix { w } => match build_dmc_message_set_with_grid(w, size) {
            Ok(set) if set.len() >= 2 => {
                let (v, exact) = achievability_general_or_normal(&set, n)?;
                Ok(Some((set.len(), v, if exact { Method::Thm2Exact } else { Method::Thm2BerryEsseen })))
            }
            Ok(_) | Err(Error::EmptyMessageSet { .. }) => Ok(None),
            Err(e) => Err(e),
        },
        _ => {
            let p = evaluate_bound(channel, n, size)?;
            Ok(Some((size, p.eps_bound.unwrap_or(T::one()), p.method)))
        }
    }
}

/// Largest code size whose bound is at most `eps`, scanning upward from the
/// smallest size. Returns `m_achieved = 1` (`log2_m = 0`, bound 0) when even
/// two messages miss the target.
pub fn search_max_m<T: Real>(channel: &ChannelSpec<T>, n: u64, eps: T) -> Result<BoundPoint<T>> {
    channel.validate()?;
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    let start = match channel {
        ChannelSpec::Matrix { .. } => 1,
        _ => 2,
    };
    let mut best: Option<(usize, T, Method)> = None;
    let mut size = start;
    // Sizes that produced a usable code and violated the target, in a row.
    let mut misses = 0usize;
    while size <= MAX_SCAN {
        let step = match probe(channel, n, size) {
            // The grid outgrew the enumeration cap; finer grids only get larger.
            Err(Error::ResourceCap { .. }) => break,
            other => other?,
        };
        if let Some((m, v, method)) = step {
            if v <= eps {
                if best.is_none_or(|(bm, _, _)| m >= bm) {
                    best = Some((m, v, method));
                }
                misses = 0;
            } else {
                misses += 1;
                if misses > LOOKAHEAD {
                    break;
                }
            }
        }
        size += 1;
    }
    let method = channel.bound_method();
    Ok(match best {
        Some((m, v, used)) => BoundPoint::from_count(n, Some(eps), m, Some(v), used),
        None => BoundPoint::from_count(n, Some(eps), 1, Some(T::zero()), method),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_symbol_is_infeasible() {
        let p = search_max_m(&ChannelSpec::Bsc { delta: 0.11f64 }, 1, 1e-3).unwrap();
        assert_eq!(p.m_achieved, 1);
        assert_eq!(p.log2_m, 0.0);
        assert_eq!(p.rate, 0.0);
        assert_eq!(p.eps_bound, Some(0.0));
        assert_eq!(p.method, Method::Thm3Bsc);
    }

    #[test]
    fn bsc_and_bec_agree() {
        for n in [50u64, 300, 1000] {
            let a = search_max_m(&ChannelSpec::Bsc { delta: 0.11f64 }, n, 1e-3).unwrap();
            let b = search_max_m(&ChannelSpec::Bec { eta: 0.22f64 }, n, 1e-3).unwrap();
            assert_eq!(a.m_achieved, b.m_achieved);
            assert_eq!(a.eps_bound, b.eps_bound);
            assert_eq!(b.method, Method::Thm4Bec);
        }
    }

    #[test]
    fn result_meets_target_and_next_size_does_not() {
        let ch = ChannelSpec::Bsc { delta: 0.11f64 };
        let p = search_max_m(&ch, 300, 1e-3).unwrap();
        assert!(p.eps_bound.unwrap() <= 1e-3);
        let next = evaluate_bound(&ch, 300, p.m_achieved + 1).unwrap();
        assert!(next.eps_bound.unwrap() > 1e-3);
        assert!(p.rate > 0.25 && p.rate < 0.35, "{}", p.rate);
    }

    #[test]
    fn general_matrix_search() {
        let w = ChannelMatrix::bsc(0.11f64).unwrap();
        let p = search_max_m(&ChannelSpec::Matrix { w }, 200, 1e-3).unwrap();
        assert!(p.m_achieved >= 2);
        assert!(p.eps_bound.unwrap() <= 1e-3);
        assert_eq!(p.method, Method::Thm2Exact);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(search_max_m(&ChannelSpec::Bsc { delta: 0.6f64 }, 10, 1e-3).is_err());
        assert!(search_max_m(&ChannelSpec::Bsc { delta: 0.1f64 }, 10, 1.5).is_err());
        let w = ChannelMatrix::bec(0.2f64).unwrap();
        assert!(search_max_m(&ChannelSpec::Matrix { w }, 10, 1e-3).is_err());
    }
}
