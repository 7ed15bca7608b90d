//! Binomial probabilities in the log domain.
//!
//! Point masses use Loader's saddle-point form (Stirling remainder plus the
//! deviance `bd0`), which keeps full relative accuracy for `n` in the
//! hundreds of thousands. Tail sums anchor at the range point closest to the
//! mode, walk outwards with the exact pmf ratio, drop terms that are below
//! working precision relative to the anchor, and add the survivors from
//! smallest to largest with compensated summation.

use crate::scalar::{CompensatedSum, Real};

/// `ln(n!)`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n <= 20 {
        let mut prod = T::one();
        for k in 2..=n {
            prod = prod * T::lit(k as f64);
        }
        return prod.ln();
    }
    let nf = T::lit(n as f64);
    let half_ln_2pi = T::lit(0.5) * (T::TAU()).ln();
    (nf + T::lit(0.5)) * nf.ln() - nf + half_ln_2pi + stirling_tail(nf)
}

/// Series for `ln(n!) - [(n + 1/2) ln n - n + ln(2 pi)/2]`, valid for n > 15.
fn stirling_tail<T: Real>(n: T) -> T {
    let s0 = T::lit(1.0 / 12.0);
    let s1 = T::lit(1.0 / 360.0);
    let s2 = T::lit(1.0 / 1260.0);
    let s3 = T::lit(1.0 / 1680.0);
    let s4 = T::lit(1.0 / 1188.0);
    let nn = n * n;
    (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n
}

fn stirlerr<T: Real>(n: u64) -> T {
    if n > 15 {
        return stirling_tail(T::lit(n as f64));
    }
    let nf = T::lit(n as f64);
    let half_ln_2pi = T::lit(0.5) * (T::TAU()).ln();
    ln_factorial::<T>(n) - ((nf + T::lit(0.5)) * nf.ln() - nf + half_ln_2pi)
}

/// Deviance term `x ln(x/m) + m - x`, evaluated by series when `x ~ m`.
fn bd0<T: Real>(x: T, m: T) -> T {
    if (x - m).abs() < T::lit(0.1) * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = (x + x) * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej = ej * v2;
            let s1 = s + ej / T::from_usize_lossy(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln C(n, t)`.
pub fn ln_binomial_coeff<T: Real>(n: u64, t: u64) -> T {
    assert!(t <= n, "t = {t} exceeds n = {n}");
    ln_factorial::<T>(n) - ln_factorial::<T>(t) - ln_factorial::<T>(n - t)
}

/// `ln P[Bin(n, p) = t]`; `-inf` for impossible outcomes.
pub fn binomial_ln_pmf<T: Real>(n: u64, t: u64, p: T) -> T {
    if t > n {
        return T::neg_infinity();
    }
    let q = T::one() - p;
    if p <= T::zero() {
        return if t == 0 { T::zero() } else { T::neg_infinity() };
    }
    if q <= T::zero() {
        return if t == n { T::zero() } else { T::neg_infinity() };
    }
    let nf = T::lit(n as f64);
    if t == 0 {
        return nf * (-p).ln_1p();
    }
    if t == n {
        return nf * p.ln();
    }
    let tf = T::lit(t as f64);
    let rest = T::lit((n - t) as f64);
    let lc = stirlerr::<T>(n) - stirlerr::<T>(t) - stirlerr::<T>(n - t) - bd0(tf, nf * p) - bd0(rest, nf * q);
    let lf = T::TAU().ln() + tf.ln() + (-tf / nf).ln_1p();
    lc - T::lit(0.5) * lf
}

/// `sum_{t = t_lo}^{t_hi} C(n, t) p^t (1 - p)^(n - t)`.
///
/// Bounds are clamped into `[0, n]`; an empty range yields zero. `p` must lie
/// in `[0, 1]`.
pub fn binomial_tail<T: Real>(n: u64, t_lo: i64, t_hi: i64, p: T) -> T {
    debug_assert!(p >= T::zero() && p <= T::one(), "p = {p}");
    let lo = t_lo.max(0);
    let hi = t_hi.min(n as i64);
    if lo > hi {
        return T::zero();
    }
    let (lo, hi) = (lo as u64, hi as u64);
    if lo == 0 && hi == n {
        return T::one();
    }
    let q = T::one() - p;
    if p <= T::zero() {
        return if lo == 0 { T::one() } else { T::zero() };
    }
    if q <= T::zero() {
        return if hi == n { T::one() } else { T::zero() };
    }

    let mode = ((T::lit((n + 1) as f64) * p).floor().as_f64() as u64).min(n);
    let anchor = mode.clamp(lo, hi);
    let ln_anchor = binomial_ln_pmf(n, anchor, p);
    let odds = p / q;
    let cutoff = T::epsilon() * T::epsilon();

    let mut rel: Vec<T> = Vec::new();
    rel.push(T::one());
    let mut r = T::one();
    let mut t = anchor;
    while t < hi {
        r = r * T::lit((n - t) as f64) / T::lit((t + 1) as f64) * odds;
        if r < cutoff {
            break;
        }
        rel.push(r);
        t += 1;
    }
    let mut r = T::one();
    let mut t = anchor;
    while t > lo {
        r = r * T::lit(t as f64) / T::lit((n - t + 1) as f64) / odds;
        if r < cutoff {
            break;
        }
        rel.push(r);
        t -= 1;
    }
    rel.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let total: CompensatedSum<T> = rel.into_iter().collect();
    (ln_anchor.exp() * total.value()).min(T::one()).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_matches_direct_product() {
        let mut direct = 0.0f64;
        for n in 1..=170u64 {
            direct += (n as f64).ln();
            let got: f64 = ln_factorial(n);
            assert!((got - direct).abs() <= 1e-12 * direct.max(1.0), "n={n}");
        }
    }

    #[test]
    fn pmf_small_cases() {
        let p = 0.11f64;
        let v: f64 = binomial_ln_pmf(2, 0, p);
        assert!((v.exp() - 0.7921).abs() < 1e-15);
        let v: f64 = binomial_ln_pmf(2, 1, p);
        assert!((v.exp() - 2.0 * 0.11 * 0.89).abs() < 1e-15);
        assert_eq!(binomial_ln_pmf(3, 4, p), f64::NEG_INFINITY);
    }

    #[test]
    fn tail_examples() {
        assert_eq!(binomial_tail(10, 0, 10, 0.3f64), 1.0);
        assert!((binomial_tail(2, 0, 0, 0.11f64) - 0.7921).abs() < 1e-15);
        assert_eq!(binomial_tail(10, 5, 4, 0.3f64), 0.0);
        assert_eq!(binomial_tail(10, 11, 20, 0.3f64), 0.0);
        assert_eq!(binomial_tail(10, -5, -1, 0.3f64), 0.0);
        assert!((binomial_tail(10, -5, 20, 0.3f64) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_probabilities() {
        assert_eq!(binomial_tail(5, 0, 0, 0.0f64), 1.0);
        assert_eq!(binomial_tail(5, 1, 5, 0.0f64), 0.0);
        assert_eq!(binomial_tail(5, 5, 5, 1.0f64), 1.0);
        assert_eq!(binomial_tail(5, 0, 4, 1.0f64), 0.0);
    }

    #[test]
    fn large_n_complements_sum_to_one() {
        let n = 100_000u64;
        let p = 0.11f64;
        let lower = binomial_tail(n, 0, 11_000, p);
        let upper = binomial_tail(n, 11_001, n as i64, p);
        assert!((lower + upper - 1.0).abs() < 1e-12, "{lower} + {upper}");
    }

    #[test]
    fn single_precision_tail() {
        let v = binomial_tail(30, 0, 3, 0.11f32);
        let w = binomial_tail(30, 0, 3, 0.11f64);
        assert!((v as f64 - w).abs() < 1e-5);
    }
}
