//! Gaussian approximations of the achievable `log2 M`, the Berry–Esseen
//! bound for iid log-likelihood sums, and the moment constants that control
//! the variance and third absolute moment of neighbor pairs.
//!
//! The approximations drop the constant remainder term; every value here is
//! the leading expression only.

use serde::{Deserialize, Serialize};

use crate::bounds::neighbor_set;
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::packing::{build_dmc_message_set, volume_ratio, MessageSet};
use crate::prob::{llr_moments, std_normal_cdf, std_normal_quantile, LlrMoments};
use crate::scalar::Real;

/// Default Berry–Esseen constant.
pub const BERRY_ESSEEN_C0: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentConstants<T> {
    pub p_min: T,
    pub p_max: T,
    /// `65 log2(e) / 72`.
    pub f0_lower: T,
    /// `5 log2(e) / (2 p_min (1 - p_max)^2)`.
    pub f0_upper: T,
    /// `36 sqrt(2) log2(e)^(3/2) / (p_min^2 (1 - p_max)^3)`.
    pub t_upper_coeff: T,
    /// `2 log2(e) / 9`, the largest radius the bounds cover.
    pub r0_cap: T,
}

/// Constants for a strictly positive, square, full-rank channel. The extreme
/// coordinates of the channel image are attained at its vertices, which are
/// the rows of `W`.
pub fn moment_constants<T: Real>(w: &ChannelMatrix<T>) -> Result<MomentConstants<T>> {
    if !w.strictly_positive() {
        return Err(Error::InvalidParameter("channel matrix must be strictly positive".into()));
    }
    w.require_full_rank_square()?;
    let entries = || w.rows().iter().flat_map(|r| r.probs().iter().copied());
    let p_min = entries().fold(T::infinity(), T::min);
    let p_max = entries().fold(T::neg_infinity(), T::max);
    Ok(constants_from_extremes(p_min, p_max))
}

pub fn constants_from_extremes<T: Real>(p_min: T, p_max: T) -> MomentConstants<T> {
    let log2e = T::LOG2_E();
    let one_minus = T::one() - p_max;
    MomentConstants {
        p_min,
        p_max,
        f0_lower: T::lit(65.0) * log2e / T::lit(72.0),
        f0_upper: T::lit(5.0) * log2e / (T::lit(2.0) * p_min * one_minus * one_minus),
        t_upper_coeff: T::lit(36.0) * T::SQRT_2() * log2e.powf(T::lit(1.5))
            / (p_min * p_min * one_minus.powi(3)),
        r0_cap: T::lit(2.0) * log2e / T::lit(9.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck<T> {
    pub owner: usize,
    pub neighbor: usize,
    pub variance: T,
    pub third_abs: T,
    pub variance_lower_ok: bool,
    pub variance_upper_ok: bool,
    pub third_ok: bool,
}

impl<T> PairCheck<T> {
    pub fn passed(&self) -> bool {
        self.variance_lower_ok && self.variance_upper_ok && self.third_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport<T> {
    pub r0: T,
    pub constants: MomentConstants<T>,
    /// Set when `r0` exceeds `r0_cap`; no pairs are checked in that case.
    pub cap_exceeded: bool,
    pub pairs: Vec<PairCheck<T>>,
}

impl<T> MomentReport<T> {
    pub fn all_passed(&self) -> bool {
        !self.cap_exceeded && self.pairs.iter().all(PairCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairCheck<T>> {
        self.pairs.iter().filter(|p| !p.passed())
    }
}

/// Builds the grid packing for `r0` and checks
/// `f0_lower r0 <= V(P||Q) <= f0_upper r0` and `T(P||Q) <= t_upper_coeff r0^(3/2)`
/// for every center `P` and neighbor `Q`. Violations are reported, not raised.
pub fn verify_moment_bounds<T: Real>(w: &ChannelMatrix<T>, r0: T) -> Result<MomentReport<T>> {
    let constants = moment_constants(w)?;
    if r0 > constants.r0_cap {
        return Ok(MomentReport {
            r0,
            constants,
            cap_exceeded: true,
            pairs: Vec::new(),
        });
    }
    let set = build_dmc_message_set(w, r0)?;
    let v_lo = constants.f0_lower * r0;
    let v_hi = constants.f0_upper * r0;
    let t_hi = constants.t_upper_coeff * r0.powf(T::lit(1.5));
    let mut pairs = Vec::new();
    for m in 0..set.len() {
        for j in neighbor_set(&set, m)?.indices() {
            let mom = llr_moments(set.center(m), set.center(j))?;
            pairs.push(PairCheck {
                owner: m,
                neighbor: j,
                variance: mom.variance,
                third_abs: mom.third_abs,
                variance_lower_ok: mom.variance >= v_lo,
                variance_upper_ok: mom.variance <= v_hi,
                third_ok: mom.third_abs <= t_hi,
            });
        }
    }
    Ok(MomentReport {
        r0,
        constants,
        cap_exceeded: false,
        pairs,
    })
}

/// Measured constants for a packing: `min V/r0`, `max V/r0`, `max T/r0^(3/2)`
/// over all neighbor pairs, with `r0` the set's recorded radius, plus the
/// largest Berry–Esseen constant `C0 T / V^(3/2)` (the correction term that
/// [`radius_for_target`] expects).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentWitness<T> {
    pub f0: T,
    pub f1: T,
    pub f2: T,
    pub berry_esseen: T,
}

pub fn moment_witness<T: Real>(set: &MessageSet<T>) -> Result<MomentWitness<T>> {
    let r0 = set.radius_r0();
    let mut w = MomentWitness {
        f0: T::infinity(),
        f1: T::zero(),
        f2: T::zero(),
        berry_esseen: T::zero(),
    };
    for m in 0..set.len() {
        for j in neighbor_set(set, m)?.indices() {
            let mom = llr_moments(set.center(m), set.center(j))?;
            w.f0 = w.f0.min(mom.variance / r0);
            w.f1 = w.f1.max(mom.variance / r0);
            w.f2 = w.f2.max(mom.third_abs / r0.powf(T::lit(1.5)));
            w.berry_esseen = w
                .berry_esseen
                .max(T::lit(BERRY_ESSEEN_C0) * mom.third_abs / mom.variance.powf(T::lit(1.5)));
        }
    }
    if !w.f0.is_finite() {
        return Err(Error::Degenerate("message set has no neighbor pairs".into()));
    }
    Ok(w)
}

/// Normal estimate of `P[sum <= n (mu + x sqrt(V/n))]` with its Berry–Esseen
/// half-width `C0 T / (V^(3/2) sqrt(n))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseen<T> {
    pub phi: T,
    pub half_width: T,
}

impl<T: Real> BerryEsseen<T> {
    pub fn lower(&self) -> T {
        (self.phi - self.half_width).max(T::zero())
    }

    pub fn upper(&self) -> T {
        (self.phi + self.half_width).min(T::one())
    }
}

pub fn berry_esseen_bound<T: Real>(moments: &LlrMoments<T>, n: u64, x: T) -> Result<BerryEsseen<T>> {
    berry_esseen_bound_with_constant(moments, n, x, T::lit(BERRY_ESSEEN_C0))
}

pub fn berry_esseen_bound_with_constant<T: Real>(moments: &LlrMoments<T>, n: u64, x: T, c0: T) -> Result<BerryEsseen<T>> {
    if !(moments.variance > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    let b_n = c0 * moments.third_abs / moments.variance.powf(T::lit(1.5));
    Ok(BerryEsseen {
        phi: std_normal_cdf(x),
        half_width: b_n / T::lit(n as f64).sqrt(),
    })
}

/// Berry–Esseen sandwich for the pairwise error event `sum LLR <= 0`, i.e.
/// `x = -sqrt(n) D / sqrt(V)`.
pub fn pairwise_error_estimate<T: Real>(moments: &LlrMoments<T>, n: u64) -> Result<BerryEsseen<T>> {
    if !(moments.variance > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    let x = -(T::lit(n as f64)).sqrt() * moments.mean / moments.variance.sqrt();
    berry_esseen_bound(moments, n, x)
}

fn quantile_arg<T: Real>(eps: T, r_count: usize) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let u = eps / T::from_usize_lossy(r_count);
    if !(u < T::lit(0.5)) {
        return Err(Error::Domain(format!(
            "eps/|R| = {u} must be below 1/2 for a negative quantile"
        )));
    }
    Ok(u)
}

/// `l log2(sqrt(n) / (-l Phi^{-1}(eps/|R|))) + log2(lambda)` with
/// `l = |Y| - 1` and `|R| = 2 C(|Y|, 2)`.
pub fn approx_general<T: Real>(w: &ChannelMatrix<T>, n: u64, eps: T) -> Result<T> {
    let lambda = volume_ratio(w)?;
    if n < 2 {
        return Err(Error::InvalidParameter("blocklength must be at least 2".into()));
    }
    let k = w.output_size();
    let ell = T::from_usize_lossy(k - 1);
    let u = quantile_arg(eps, k * (k - 1))?;
    let z = std_normal_quantile(u)?;
    Ok(ell * (T::lit(n as f64).sqrt() / (-ell * z)).log2() + lambda.log2())
}

fn binary_gaussian<T: Real>(width: T, n: u64, eps: T, ceil_variant: bool) -> Result<T> {
    let u = quantile_arg(eps, 2)?;
    let z = std_normal_quantile(u)?;
    let v = width * T::lit(n as f64).sqrt() / -z;
    Ok(if ceil_variant { v.ceil().log2() } else { v.log2() })
}

/// `log2((1 - 2 delta) sqrt(n) / -Phi^{-1}(eps/2))`, or the log of its
/// ceiling when `ceil_variant` (the interval-grid construction).
pub fn approx_bsc<T: Real>(delta: T, n: u64, eps: T, ceil_variant: bool) -> Result<T> {
    if !(delta > T::zero() && delta < T::lit(0.5)) {
        return Err(Error::Domain(format!("crossover must lie in (0, 1/2), got {delta}")));
    }
    binary_gaussian(T::one() - T::lit(2.0) * delta, n, eps, ceil_variant)
}

/// As [`approx_bsc`] with `1 - 2 delta` replaced by `1 - eta`.
pub fn approx_bec<T: Real>(eta: T, n: u64, eps: T, ceil_variant: bool) -> Result<T> {
    if !(eta >= T::zero() && eta < T::one()) {
        return Err(Error::Domain(format!("erasure probability must lie in [0, 1), got {eta}")));
    }
    binary_gaussian(T::one() - eta, n, eps, ceil_variant)
}

/// Packing radius `(Phi^{-1}(eps/|R| - F1/sqrt(n)))^2 F0 / n` that makes the
/// Berry–Esseen-corrected per-message error at most `eps`. Here `f1` is the
/// Berry–Esseen constant `C0 T / V^(3/2)`, not the variance ratio of
/// [`MomentWitness::f1`].
pub fn radius_for_target<T: Real>(eps: T, n: u64, f0: T, f1: T, r_count: usize) -> Result<T> {
    if n == 0 || r_count == 0 {
        return Err(Error::InvalidParameter("n and |R| must be positive".into()));
    }
    let arg = eps / T::from_usize_lossy(r_count) - f1 / T::lit(n as f64).sqrt();
    if !(arg > T::zero()) {
        return Err(Error::Infeasible(format!(
            "eps/|R| - F1/sqrt(n) = {arg} is not positive"
        )));
    }
    let z = std_normal_quantile(arg)?;
    Ok(z * z * f0 / T::lit(n as f64))
}
