//! Divergence packings: uniform grids on the simplex restricted to the image
//! of the channel, and evenly spaced interval grids for binary outputs.
//!
//! Both constructions place centers at integer grid coordinates. The grid
//! coordinates are kept next to the float centers so neighbor lookups are
//! exact integer comparisons.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::prob::{kl_divergence, total_variation, Distribution};
use crate::scalar::Real;

/// Default cap on the number of grid points enumerated in one call.
pub const DEFAULT_GRID_CAP: u128 = 10_000_000;
/// Default nonnegativity slack for the preimage in the channel-image test.
pub const IMAGE_TOL: f64 = 1e-10;
/// `1/r` within this relative distance of an integer snaps to that integer.
const FLOOR_SNAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PackingKind {
    /// Grid `a / N` on the full simplex, intersected with the channel image.
    DmcGrid,
    /// Interval grid `delta1 + xi * a / N` on binary outputs.
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryParams<T> {
    pub delta1: T,
    pub delta2: T,
    /// `1 - delta1 - delta2`, the width of the binary image interval.
    pub xi: T,
}

/// Ordered packing centers together with the grid they were drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageSet<T> {
    centers: Vec<Distribution<T>>,
    coords: Vec<Vec<u32>>,
    radius_r0: T,
    grid_n: usize,
    kind: PackingKind,
    binary: Option<BinaryParams<T>>,
}

impl<T: Real> MessageSet<T> {
    pub fn centers(&self) -> &[Distribution<T>] {
        &self.centers
    }

    pub fn center(&self, m: usize) -> &Distribution<T> {
        &self.centers[m]
    }

    /// Integer grid coordinates of center `m`; they sum to `grid_n`.
    pub fn coords(&self, m: usize) -> &[u32] {
        &self.coords[m]
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn radius_r0(&self) -> T {
        self.radius_r0
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn kind(&self) -> PackingKind {
        self.kind
    }

    pub fn binary_params(&self) -> Option<&BinaryParams<T>> {
        self.binary.as_ref()
    }

    pub fn alphabet_size(&self) -> usize {
        self.centers.first().map_or(0, Distribution::len)
    }

    /// Grid step in probability units: `1/N` or `xi/N`.
    pub fn step(&self) -> T {
        let n = T::from_usize_lossy(self.grid_n);
        match &self.binary {
            Some(b) => b.xi / n,
            None => T::one() / n,
        }
    }

    /// Lookup from grid coordinates to center index.
    pub(crate) fn index_by_coords(&self) -> HashMap<&[u32], usize> {
        self.coords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_slice(), i))
            .collect()
    }
}

/// Radius on the TV scale for a KL radius `r0`: `sqrt(r0 / (2 log2 e))`.
pub fn tv_radius<T: Real>(r0: T) -> T {
    (r0 / (T::lit(2.0) * T::LOG2_E())).sqrt()
}

/// KL radius guaranteed by a TV separation `r` through Pinsker's inequality.
pub fn kl_radius<T: Real>(r: T) -> T {
    T::lit(2.0) * T::LOG2_E() * r * r
}

/// `floor(1/r)`, snapping values within a relative 1e-9 of an integer so
/// that radii built from `1/N` recover `N` exactly.
pub fn grid_resolution<T: Real>(r: T) -> Result<usize> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let inv = (T::one() / r).as_f64();
    let nearest = inv.round();
    let n = if (inv - nearest).abs() <= FLOOR_SNAP * nearest.max(1.0) {
        nearest
    } else {
        inv.floor()
    };
    if n > usize::MAX as f64 / 2.0 {
        return Err(Error::InvalidParameter(format!("radius {r} is too small")));
    }
    Ok(n as usize)
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial_count(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// All compositions of `n` into `k` nonnegative parts, lexicographic order.
pub fn compositions(n: usize, k: usize, cap: u128) -> Result<Vec<Vec<u32>>> {
    let count = binomial_count((n + k - 1) as u64, (k - 1) as u64);
    if count > cap {
        return Err(Error::ResourceCap {
            what: "grid points",
            needed: count,
            cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut cur = vec![0u32; k];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let k = cur.len();
        if pos == k - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[pos] = a;
            rec(pos + 1, left - a, cur, out);
        }
    }
    rec(0, n as u32, &mut cur, &mut out);
    Ok(out)
}

fn grid_point<T: Real>(a: &[u32], n: usize) -> Distribution<T> {
    let nf = T::from_usize_lossy(n);
    Distribution::from_raw(a.iter().map(|&ai| T::lit(ai as f64) / nf).collect())
}

/// Points `(a_1, ..., a_k) / floor(1/r)` of the simplex, lexicographic in `a`.
pub fn grid_simplex<T: Real>(r: T, k: usize) -> Result<Vec<Distribution<T>>> {
    grid_simplex_with_cap(r, k, DEFAULT_GRID_CAP)
}

pub fn grid_simplex_with_cap<T: Real>(r: T, k: usize, cap: u128) -> Result<Vec<Distribution<T>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("alphabet size {k} < 2")));
    }
    let n = grid_resolution(r)?;
    if n < 1 {
        return Err(Error::Degenerate(format!("floor(1/r) = 0 for r = {r}")));
    }
    Ok(compositions(n, k, cap)?
        .iter()
        .map(|a| grid_point(a, n))
        .collect())
}

/// Whether `p` is an output marginal the channel can produce, i.e. the
/// solution of `x W = p` has no coordinate below `-tol`.
pub fn marginal_space_contains<T: Real>(w: &ChannelMatrix<T>, p: &Distribution<T>, tol: T) -> Result<bool> {
    let x = w.preimage(p)?;
    Ok(x.iter().all(|&xi| xi >= -tol))
}

/// Grid packing of the channel image with TV radius `sqrt(r0/(2 log2 e))`.
pub fn build_dmc_message_set<T: Real>(w: &ChannelMatrix<T>, r0: T) -> Result<MessageSet<T>> {
    if !(r0 > T::zero()) {
        return Err(Error::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    let n = grid_resolution(tv_radius(r0))?;
    let mut set = build_dmc_message_set_with_grid(w, n)?;
    set.radius_r0 = r0;
    Ok(set)
}

/// Grid packing at an explicit resolution `N`; the recorded radius is the KL
/// radius `2 log2(e) / N^2` certified by Pinsker.
pub fn build_dmc_message_set_with_grid<T: Real>(w: &ChannelMatrix<T>, grid_n: usize) -> Result<MessageSet<T>> {
    if !w.strictly_positive() {
        return Err(Error::InvalidParameter("channel matrix must be strictly positive".into()));
    }
    w.require_full_rank_square()?;
    if grid_n < 1 {
        return Err(Error::Degenerate("grid resolution 0".into()));
    }
    let k = w.output_size();
    let tol = T::lit(IMAGE_TOL);
    let mut centers = Vec::new();
    let mut coords = Vec::new();
    for a in compositions(grid_n, k, DEFAULT_GRID_CAP)? {
        let p = grid_point(&a, grid_n);
        if marginal_space_contains(w, &p, tol)? {
            centers.push(p);
            coords.push(a);
        }
    }
    if centers.is_empty() {
        return Err(Error::EmptyMessageSet { grid_n });
    }
    Ok(MessageSet {
        centers,
        coords,
        radius_r0: kl_radius(T::one() / T::from_usize_lossy(grid_n)),
        grid_n,
        kind: PackingKind::DmcGrid,
        binary: None,
    })
}

fn check_binary_params<T: Real>(delta1: T, delta2: T) -> Result<T> {
    if !(delta1 > T::zero() && delta2 > T::zero() && delta1 + delta2 < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "need delta1 > 0, delta2 > 0, delta1 + delta2 < 1; got {delta1}, {delta2}"
        )));
    }
    Ok(T::one() - delta1 - delta2)
}

/// Interval packing `delta1 + xi * a / N`, `a = 0..=N`, with
/// `N = floor(1/r)` and `r = sqrt(r0/(2 log2 e)) / xi`.
pub fn build_binary_message_set<T: Real>(delta1: T, delta2: T, r0: T) -> Result<MessageSet<T>> {
    let xi = check_binary_params(delta1, delta2)?;
    if !(r0 > T::zero()) {
        return Err(Error::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    let n = grid_resolution(tv_radius(r0) / xi)?;
    if n < 1 {
        return Err(Error::Degenerate(format!(
            "r0 = {r0} leaves floor(1/r) = 0 on an interval of width {xi}"
        )));
    }
    let mut set = build_binary_message_set_with_grid(delta1, delta2, n)?;
    set.radius_r0 = r0;
    Ok(set)
}

/// Interval packing at explicit resolution `N` (so `N + 1` centers).
pub fn build_binary_message_set_with_grid<T: Real>(delta1: T, delta2: T, grid_n: usize) -> Result<MessageSet<T>> {
    let xi = check_binary_params(delta1, delta2)?;
    if grid_n < 1 {
        return Err(Error::Degenerate("grid resolution 0".into()));
    }
    let nf = T::from_usize_lossy(grid_n);
    let mut centers = Vec::with_capacity(grid_n + 1);
    let mut coords = Vec::with_capacity(grid_n + 1);
    for a in 0..=grid_n {
        let q = xi * T::from_usize_lossy(a) / nf + delta1;
        centers.push(Distribution::from_raw(vec![q, T::one() - q]));
        coords.push(vec![a as u32, (grid_n - a) as u32]);
    }
    let step = xi / nf;
    Ok(MessageSet {
        centers,
        coords,
        radius_r0: kl_radius(step),
        grid_n,
        kind: PackingKind::Binary,
        binary: Some(BinaryParams { delta1, delta2, xi }),
    })
}

/// `m` evenly spaced binary centers from `delta1` to `1 - delta2`. The
/// recorded radius is the realized minimum pairwise divergence.
pub fn build_binary_message_set_by_size<T: Real>(delta1: T, delta2: T, m: usize) -> Result<MessageSet<T>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 messages, got {m}")));
    }
    let mut set = build_binary_message_set_with_grid(delta1, delta2, m - 1)?;
    set.radius_r0 = min_pairwise_kl(&set);
    Ok(set)
}

/// Single message at the image midpoint; used where a one-message code is a
/// meaningful degenerate case (zero error).
pub fn single_message_set<T: Real>(center: Distribution<T>) -> MessageSet<T> {
    let k = center.len();
    MessageSet {
        centers: vec![center],
        coords: vec![vec![0; k]],
        radius_r0: T::infinity(),
        grid_n: 0,
        kind: PackingKind::Binary,
        binary: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingCounts<T> {
    pub lower: T,
    pub upper: T,
    pub exact_grid: u128,
}

/// Size of the full-simplex grid for KL radius `r0` and its closed-form bracket.
pub fn packing_count_bounds<T: Real>(r0: T, k: usize) -> Result<PackingCounts<T>> {
    packing_count_bounds_for_radius(tv_radius(r0), k)
}

/// As [`packing_count_bounds`] but parameterized by the TV radius `r`.
pub fn packing_count_bounds_for_radius<T: Real>(r: T, k: usize) -> Result<PackingCounts<T>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("alphabet size {k} < 2")));
    }
    let n = grid_resolution(r)?;
    let kf = T::from_usize_lossy(k);
    let ell = kf - T::one();
    let inv_r = T::one() / r;
    let lower = ((inv_r + kf - T::lit(2.0)) / ell).powf(ell);
    let upper = ((inv_r + ell) * T::E() / ell).powf(ell);
    Ok(PackingCounts {
        lower,
        upper,
        exact_grid: binomial_count((n + k - 1) as u64, (k - 1) as u64),
    })
}

/// Lower bound on the number of grid centers inside a channel image of
/// volume ratio `lambda`:
/// `lambda ((1/r + k - 2)/(k - 1))^(k-1) - 2k C(floor(1/r) + k - 2, k - 2)`.
/// Not clamped; only informative when positive.
pub fn packing_lower_bound_subspace<T: Real>(r0: T, k: usize, lambda: T) -> Result<T> {
    packing_lower_bound_subspace_for_radius(tv_radius(r0), k, lambda)
}

pub fn packing_lower_bound_subspace_for_radius<T: Real>(r: T, k: usize, lambda: T) -> Result<T> {
    if !(lambda > T::zero() && lambda <= T::one()) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    let counts = packing_count_bounds_for_radius(r, k)?;
    let n = grid_resolution(r)?;
    let boundary = binomial_count((n + k - 2) as u64, (k - 2) as u64);
    let kf = T::from_usize_lossy(k);
    Ok(lambda * counts.lower - T::lit(2.0) * kf * T::lit(boundary as f64))
}

/// `vol(image) / vol(simplex)`, which for a square full-rank channel is `|det W|`.
pub fn volume_ratio<T: Real>(w: &ChannelMatrix<T>) -> Result<T> {
    w.require_full_rank_square()
}

fn min_pairwise<T: Real>(s: &MessageSet<T>, f: impl Fn(&Distribution<T>, &Distribution<T>) -> T) -> T {
    let c = s.centers();
    let mut best = T::infinity();
    for i in 0..c.len() {
        for j in 0..c.len() {
            if i != j {
                best = best.min(f(&c[i], &c[j]));
            }
        }
    }
    best
}

/// Minimum of `D(P_i || P_j)` over ordered pairs `i != j`.
pub fn min_pairwise_kl<T: Real>(s: &MessageSet<T>) -> T {
    min_pairwise(s, |p, q| kl_divergence(p, q).unwrap_or(T::infinity()))
}

pub fn min_pairwise_tv<T: Real>(s: &MessageSet<T>) -> T {
    min_pairwise(s, |p, q| total_variation(p, q).expect("equal lengths"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn firsts(s: &MessageSet<f64>) -> Vec<f64> {
        s.centers().iter().map(|c| c.get(0)).collect()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn grid_examples() {
        let g = grid_simplex(1.0f64, 2).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].probs(), &[0.0, 1.0]);
        assert_eq!(g[1].probs(), &[1.0, 0.0]);
        assert_eq!(grid_simplex(0.25f64, 3).unwrap().len(), 15);
        let g: Vec<f64> = grid_simplex(0.25f64, 2).unwrap().iter().map(|d| d.get(0)).collect();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn grid_cap() {
        assert!(matches!(
            grid_simplex_with_cap(0.01f64, 6, 1000),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn image_membership() {
        let w = ChannelMatrix::bsc(0.11f64).unwrap();
        let t = IMAGE_TOL;
        let p = |a: f64| Distribution::new(vec![a, 1.0 - a]).unwrap();
        assert!(marginal_space_contains(&w, &p(0.5), t).unwrap());
        assert!(!marginal_space_contains(&w, &p(0.05), t).unwrap());
        assert!(marginal_space_contains(&w, &p(0.11), t).unwrap());
        let singular = ChannelMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(marginal_space_contains(&singular, &p(0.5), t).is_err());
    }

    #[test]
    fn dmc_set_for_bsc() {
        let w = ChannelMatrix::bsc(0.11f64).unwrap();
        let r0 = kl_radius(0.25f64);
        let s = build_dmc_message_set(&w, r0).unwrap();
        assert_eq!(s.grid_n(), 4);
        assert!(close(&firsts(&s), &[0.25, 0.5, 0.75]));
        assert!(min_pairwise_kl(&s) >= r0);
        assert_eq!(s.kind(), PackingKind::DmcGrid);
    }

    #[test]
    fn dmc_set_nearly_identity() {
        let e = 1e-3;
        let w = ChannelMatrix::new(vec![vec![1.0 - e, e], vec![e, 1.0 - e]]).unwrap();
        let s = build_dmc_message_set_with_grid(&w, 2).unwrap();
        assert!(close(&firsts(&s), &[0.5]));
        let s = build_dmc_message_set_with_grid(&w, 1).unwrap_err();
        assert!(matches!(s, Error::EmptyMessageSet { grid_n: 1 }));
    }

    #[test]
    fn binary_examples() {
        let s = build_binary_message_set(0.11f64, 0.11, kl_radius(0.78 / 4.0)).unwrap();
        assert_eq!(s.grid_n(), 4);
        assert!(close(&firsts(&s), &[0.11, 0.305, 0.5, 0.695, 0.89]));
        assert!(min_pairwise_kl(&s) >= s.radius_r0());

        let s = build_binary_message_set_with_grid(0.25f64, 0.25, 1).unwrap();
        assert!(close(&firsts(&s), &[0.25, 0.75]));

        assert!(close(&firsts(&build_binary_message_set_by_size(0.11, 0.11, 2).unwrap()), &[0.11, 0.89]));
        assert!(close(&firsts(&build_binary_message_set_by_size(0.2, 0.3, 3).unwrap()), &[0.2, 0.45, 0.7]));
        let a = build_binary_message_set_by_size(0.11f64, 0.11, 5).unwrap();
        let b = build_binary_message_set_with_grid(0.11f64, 0.11, 4).unwrap();
        assert_eq!(a.centers(), b.centers());
    }

    #[test]
    fn binary_errors() {
        assert!(build_binary_message_set(0.0f64, 0.1, 0.1).is_err());
        assert!(build_binary_message_set(0.5f64, 0.5, 0.1).is_err());
        assert!(matches!(
            build_binary_message_set(0.25f64, 0.25, 10.0),
            Err(Error::Degenerate(_))
        ));
        assert!(build_binary_message_set_by_size(0.1f64, 0.1, 1).is_err());
    }

    #[test]
    fn count_examples() {
        let c = packing_count_bounds(kl_radius(0.25f64), 3).unwrap();
        assert_eq!(c.exact_grid, 15);
        assert!(c.lower <= 15.0 && 15.0 <= c.upper);
        let c = packing_count_bounds_for_radius(0.1f64, 4).unwrap();
        assert_eq!(c.exact_grid, 286);
        assert!(c.lower <= 286.0 && 286.0 <= c.upper);
        for n in 1..=12usize {
            let c = packing_count_bounds_for_radius(1.0 / n as f64, 2).unwrap();
            assert_eq!(c.exact_grid, n as u128 + 1);
        }
    }

    #[test]
    fn subspace_lower_bound_examples() {
        let v = packing_lower_bound_subspace_for_radius(0.1f64, 2, 0.78).unwrap();
        assert!((v - 3.8).abs() < 1e-12);
        let r = 0.3f64;
        let v = packing_lower_bound_subspace_for_radius(r, 2, 1.0).unwrap();
        assert!((v - (1.0 / r - 4.0)).abs() < 1e-12);
        // k = 3, N = 4: ((4 + 1)/2)^2 - 6 * C(5, 1)
        let v = packing_lower_bound_subspace_for_radius(0.25f64, 3, 1.0).unwrap();
        assert!((v - (6.25 - 30.0)).abs() < 1e-12);
    }

    #[test]
    fn volume_ratio_examples() {
        let v = volume_ratio(&ChannelMatrix::bsc(0.11f64).unwrap()).unwrap();
        assert!((v - 0.78).abs() < 1e-15);
        let id = ChannelMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(volume_ratio(&id).unwrap(), 1.0);
        let w3 = ChannelMatrix::new(vec![
            vec![0.8f64, 0.1, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        assert!((volume_ratio(&w3).unwrap() - 0.49).abs() < 1e-14);
    }

    #[test]
    fn duplicate_centers_have_zero_min_kl() {
        let c = Distribution::new(vec![0.3, 0.7]).unwrap();
        let mut s = build_binary_message_set_with_grid(0.3f64, 0.3, 1).unwrap();
        s.centers = vec![c.clone(), c];
        assert_eq!(min_pairwise_kl(&s), 0.0);
    }

    #[test]
    fn three_center_min_matches_brute_force() {
        let s = build_binary_message_set_by_size(0.11f64, 0.11, 3).unwrap();
        let c = s.centers();
        let mut brute = f64::INFINITY;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let d: f64 = (0..2).map(|y| c[i].get(y) * (c[i].get(y) / c[j].get(y)).log2()).sum();
                    brute = brute.min(d);
                }
            }
        }
        assert!((min_pairwise_kl(&s) - brute).abs() < 1e-14);
    }

    #[test]
    fn resolution_snaps_to_integers() {
        assert_eq!(grid_resolution(tv_radius(kl_radius(0.25f64))).unwrap(), 4);
        assert_eq!(grid_resolution(0.3f64).unwrap(), 3);
        assert_eq!(grid_resolution(1.0 / 7.0f64).unwrap(), 7);
    }
}
