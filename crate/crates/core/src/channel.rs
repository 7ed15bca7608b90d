use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::prob::Distribution;
use crate::scalar::Real;

/// Matrices with `|det|` at or below this are treated as singular.
pub const SINGULAR_DET_TOL: f64 = 1e-9;

/// Row-stochastic transition matrix `W(y|x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix<T> {
    rows: Vec<Distribution<T>>,
    strictly_positive: bool,
    det_abs: Option<T>,
}

impl<T: Real> ChannelMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "channel needs at least 2 inputs, got {}",
                rows.len()
            )));
        }
        let width = rows[0].len();
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != width {
                    return Err(Error::LengthMismatch {
                        left: width,
                        right: r.len(),
                    });
                }
                Distribution::new(r).map_err(|e| Error::InvalidParameter(format!("row {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let strictly_positive = rows.iter().all(Distribution::is_strictly_positive);
        let det_abs = (rows.len() == width).then(|| linalg::determinant(&Self::dense(&rows)).abs());
        Ok(Self {
            rows,
            strictly_positive,
            det_abs,
        })
    }

    /// Binary symmetric channel with crossover `delta`.
    pub fn bsc(delta: T) -> Result<Self> {
        if !(delta >= T::zero() && delta <= T::one()) {
            return Err(Error::InvalidParameter(format!("crossover {delta} outside [0, 1]")));
        }
        let keep = T::one() - delta;
        Self::new(vec![vec![keep, delta], vec![delta, keep]])
    }

    /// Binary erasure channel; outputs ordered `(0, e, 1)`.
    pub fn bec(eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidParameter(format!("erasure {eta} outside [0, 1]")));
        }
        let keep = T::one() - eta;
        Self::new(vec![vec![keep, eta, T::zero()], vec![T::zero(), eta, keep]])
    }

    /// Parses the plain-text matrix format: a header line `|X| |Y|` followed by
    /// `|X|*|Y|` whitespace-separated probabilities in row-major order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad dimension {s:?}"))))
            .collect::<Result<_>>()?;
        let [nx, ny] = dims[..] else {
            return Err(Error::Parse(format!("header must be '|X| |Y|', got {header:?}")));
        };
        let values: Vec<T> = lines
            .flat_map(str::split_whitespace)
            .map(|s| {
                s.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Parse(format!("bad probability {s:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != nx * ny {
            return Err(Error::Parse(format!(
                "expected {} probabilities, found {}",
                nx * ny,
                values.len()
            )));
        }
        let rows: Vec<Vec<T>> = values.chunks(ny.max(1)).map(<[T]>::to_vec).collect();
        for (i, r) in rows.iter().enumerate() {
            let s: T = r.iter().copied().sum();
            if (s - T::one()).abs() > T::lit(1e-9) {
                return Err(Error::Parse(format!("row {i} sums to {s}")));
            }
        }
        Self::new(rows)
    }

    fn dense(rows: &[Distribution<T>]) -> Vec<Vec<T>> {
        rows.iter().map(|r| r.probs().to_vec()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        Self::dense(&self.rows)
    }

    pub fn rows(&self) -> &[Distribution<T>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &Distribution<T> {
        &self.rows[x]
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_square(&self) -> bool {
        self.input_size() == self.output_size()
    }

    pub fn strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub fn det_abs(&self) -> Option<T> {
        self.det_abs
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.to_dense(), T::lit(SINGULAR_DET_TOL))
    }

    /// Plot reference `(rank - 1) / 2`.
    pub fn capacity(&self) -> T {
        T::from_usize_lossy(self.rank() - 1) * T::lit(0.5)
    }

    /// Fails unless the matrix is square with `|det| > SINGULAR_DET_TOL`.
    pub fn require_full_rank_square(&self) -> Result<T> {
        match self.det_abs {
            Some(d) if d > T::lit(SINGULAR_DET_TOL) => Ok(d),
            Some(d) => Err(Error::Singular { det_abs: d.as_f64() }),
            None => Err(Error::InvalidParameter(format!(
                "channel is {}x{}, a square matrix is required",
                self.input_size(),
                self.output_size()
            ))),
        }
    }

    /// Unique `x` with `x W = p` (no sign constraint).
    pub fn preimage(&self, p: &Distribution<T>) -> Result<Vec<T>> {
        self.require_full_rank_square()?;
        if p.len() != self.output_size() {
            return Err(Error::LengthMismatch {
                left: self.output_size(),
                right: p.len(),
            });
        }
        let wt = linalg::transpose(&self.to_dense());
        linalg::solve(&wt, p.probs()).ok_or(Error::Singular {
            det_abs: self.det_abs.map_or(0.0, Real::as_f64),
        })
    }

    /// Output marginal `x W`.
    pub fn push_forward(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.output_size()];
        for (xi, row) in x.iter().zip(&self.rows) {
            for (o, &w) in out.iter_mut().zip(row.probs()) {
                *o = *o + *xi * w;
            }
        }
        out
    }
}
