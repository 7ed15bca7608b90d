//! Exact pairwise error-event probabilities by enumerating output types.

use crate::error::{Error, Result};
use crate::packing::binomial_count;
use crate::prob::{ln_factorial, Distribution};
use crate::scalar::{CompensatedSum, Real};

/// Default cap on the number of types enumerated for one pair.
pub const DEFAULT_TYPE_CAP: u128 = 10_000_000;

/// Number of types (compositions of `n` into `k` parts).
pub fn type_count(n: u64, k: usize) -> u128 {
    binomial_count(n + k as u64 - 1, k as u64 - 1)
}

/// `P[sum_i log2(p(Y_i)/q(Y_i)) <= 0]` for `Y_i` iid from `p`, exact up to
/// floating point. Totals within a relative `T::TIE_TOL` of zero count as
/// errors.
pub fn error_event_prob<T: Real>(p: &Distribution<T>, q: &Distribution<T>, n: u64) -> Result<T> {
    error_event_prob_with_cap(p, q, n, DEFAULT_TYPE_CAP)
}

pub fn error_event_prob_with_cap<T: Real>(p: &Distribution<T>, q: &Distribution<T>, n: u64, cap: u128) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
    }
    let k = p.len();
    let count = type_count(n, k);
    if count > cap {
        return Err(Error::ResourceCap {
            what: "output types",
            needed: count,
            cap,
        });
    }
    let mut ln_p = Vec::with_capacity(k);
    let mut llr = Vec::with_capacity(k);
    for y in 0..k {
        let (py, qy) = (p.get(y), q.get(y));
        if py > T::zero() && qy <= T::zero() {
            return Err(Error::SupportViolation { index: y });
        }
        if py > T::zero() {
            ln_p.push(Some(py.ln()));
            llr.push((py / qy).ln() * T::LOG2_E());
        } else {
            ln_p.push(None);
            llr.push(T::zero());
        }
    }
    let ln_fact: Vec<T> = (0..=n).map(ln_factorial::<T>).collect();
    let mut walker = TypeWalker {
        ln_p: &ln_p,
        llr: &llr,
        ln_fact: &ln_fact,
        tie: T::lit(T::TIE_TOL),
        acc: CompensatedSum::new(),
    };
    walker.walk(0, n, ln_fact[n as usize], T::zero(), T::zero());
    Ok(walker.acc.value().min(T::one()).max(T::zero()))
}

struct TypeWalker<'a, T> {
    ln_p: &'a [Option<T>],
    llr: &'a [T],
    ln_fact: &'a [T],
    tie: T,
    acc: CompensatedSum<T>,
}

impl<T: Real> TypeWalker<'_, T> {
    /// Assigns counts to symbols `y..`, with `left` symbols still unassigned.
    /// `ln_w` carries `ln n! - sum ln c! + sum c ln p` for the assigned part.
    fn walk(&mut self, y: usize, left: u64, ln_w: T, total: T, scale: T) {
        let k = self.llr.len();
        if y == k - 1 {
            let c = left;
            let (ln_w, total, scale) = match self.ln_p[y] {
                Some(lp) => {
                    let cf = T::lit(c as f64);
                    (
                        ln_w - self.ln_fact[c as usize] + cf * lp,
                        total + cf * self.llr[y],
                        scale + cf * self.llr[y].abs(),
                    )
                }
                None if c > 0 => return,
                None => (ln_w, total, scale),
            };
            if total <= self.tie * scale.max(T::one()) {
                self.acc.add(ln_w.exp());
            }
            return;
        }
        let max_c = match self.ln_p[y] {
            Some(_) => left,
            None => 0,
        };
        for c in 0..=max_c {
            let cf = T::lit(c as f64);
            let (lw, tot, sc) = match self.ln_p[y] {
                Some(lp) => (
                    ln_w - self.ln_fact[c as usize] + cf * lp,
                    total + cf * self.llr[y],
                    scale + cf * self.llr[y].abs(),
                ),
                None => (ln_w, total, scale),
            };
            self.walk(y + 1, left - c, lw, tot, sc);
        }
    }
}
