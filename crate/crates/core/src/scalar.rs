//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All probability, packing and bound code is written against [`Real`], so the
//! same implementation runs in `f64` (the default, used by the CLI) or `f32`.
//! Tolerances that cannot be met in single precision are exposed as associated
//! constants instead of being hard-coded at the call sites.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Maximum deviation of a distribution's total mass from one.
    const SIMPLEX_TOL: f64;
    /// Inputs within this distance of unit mass are renormalized on construction.
    const RENORM_TOL: f64;
    /// Two log-likelihood totals closer than this (relative) are a tie.
    const TIE_TOL: f64;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }
}

impl Real for f64 {
    const SIMPLEX_TOL: f64 = 1e-12;
    const RENORM_TOL: f64 = 1e-9;
    const TIE_TOL: f64 = 1e-12;
}

impl Real for f32 {
    const SIMPLEX_TOL: f64 = 1e-5;
    const RENORM_TOL: f64 = 1e-4;
    const TIE_TOL: f64 = 1e-5;
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
