//! Achievability bounds and the search for the largest admissible code size.

pub mod achievability;
pub mod exact;
pub mod neighbors;
pub mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Real;

pub use achievability::{
    achievability_general, achievability_general_or_normal, achievability_normal, bec_achievability,
    binary_achievability, binary_summands, bsc_achievability, bsc_achievability_by_size, general_summands,
    lower_threshold, threshold_fraction, upper_threshold,
};
pub use exact::{error_event_prob, error_event_prob_with_cap, type_count, DEFAULT_TYPE_CAP};
pub use neighbors::{max_neighbors, neighbor_set, NeighborSet};
pub use search::{evaluate_bound, search_max_m, ChannelSpec, MAX_SCAN};

/// How a [`BoundPoint`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    /// Neighbor-union bound with exact type enumeration.
    Thm2Exact,
    /// Neighbor-union bound with Berry–Esseen pairwise terms (type cap hit).
    Thm2BerryEsseen,
    /// Closed-form binomial-tail bound for the BSC.
    Thm3Bsc,
    /// The BSC bound at half the erasure probability.
    Thm4Bec,
    ApproxGeneral,
    ApproxBsc,
    ApproxBscCeil,
    ApproxBec,
    ApproxBecCeil,
    Simulation,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Thm2Exact,
        Method::Thm2BerryEsseen,
        Method::Thm3Bsc,
        Method::Thm4Bec,
        Method::ApproxGeneral,
        Method::ApproxBsc,
        Method::ApproxBscCeil,
        Method::ApproxBec,
        Method::ApproxBecCeil,
        Method::Simulation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Thm2Exact => "THM2_EXACT",
            Method::Thm2BerryEsseen => "THM2_BERRY_ESSEEN",
            Method::Thm3Bsc => "THM3_BSC",
            Method::Thm4Bec => "THM4_BEC",
            Method::ApproxGeneral => "APPROX_GENERAL",
            Method::ApproxBsc => "APPROX_BSC",
            Method::ApproxBscCeil => "APPROX_BSC_CEIL",
            Method::ApproxBec => "APPROX_BEC",
            Method::ApproxBecCeil => "APPROX_BEC_CEIL",
            Method::Simulation => "SIMULATION",
        }
    }

    /// Gaussian approximations carry no error bound.
    pub fn is_approximation(self) -> bool {
        matches!(
            self,
            Method::ApproxGeneral | Method::ApproxBsc | Method::ApproxBscCeil | Method::ApproxBec | Method::ApproxBecCeil
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == up)
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

/// One point of a rate–blocklength curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint<T> {
    pub n: u64,
    pub eps_target: Option<T>,
    pub m_achieved: usize,
    pub log2_m: T,
    /// `log2_m / log2 n`; zero when `log2_m` is zero.
    pub rate: T,
    /// Bound evaluated at `m_achieved`; absent for approximations.
    pub eps_bound: Option<T>,
    pub method: Method,
}

impl<T: Real> BoundPoint<T> {
    pub fn from_count(n: u64, eps_target: Option<T>, m: usize, eps_bound: Option<T>, method: Method) -> Self {
        let log2_m = if m <= 1 { T::zero() } else { T::from_usize_lossy(m).log2() };
        Self {
            n,
            eps_target,
            m_achieved: m,
            log2_m,
            rate: rate_of(log2_m, n),
            eps_bound,
            method,
        }
    }

    /// Point for an approximation that yields `log2 M` directly; `m_achieved`
    /// is `floor(2^log2_m)` (an exact integer survives rounding noise).
    pub fn from_log2(n: u64, eps_target: Option<T>, log2_m: T, method: Method) -> Self {
        let m = log2_m.exp2();
        let snapped = if (m - m.round()).abs() <= T::lit(1e-9) * m.max(T::one()) {
            m.round()
        } else {
            m.floor()
        };
        Self {
            n,
            eps_target,
            m_achieved: snapped.to_usize().unwrap_or(usize::MAX),
            log2_m,
            rate: rate_of(log2_m, n),
            eps_bound: None,
            method,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.m_achieved <= 1 && !self.method.is_approximation()
    }
}

/// `log2_m / log2 n`, defined as zero when `log2_m` is zero.
pub fn rate_of<T: Real>(log2_m: T, n: u64) -> T {
    if log2_m == T::zero() {
        T::zero()
    } else {
        log2_m / T::lit(n as f64).log2()
    }
}
