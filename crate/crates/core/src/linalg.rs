//! Dense Gaussian elimination for the small square systems that show up here
//! (channel matrices of a handful of symbols).

use crate::scalar::Real;

/// Row-echelon reduction with partial pivoting. Returns the determinant of
/// the leading square block (0 if singular) and the numerical rank.
fn eliminate<T: Real>(a: &mut [Vec<T>], mut rhs: Option<&mut [T]>, tol: T) -> (T, usize) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut det = T::one();
    let mut rank = 0;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, piv_abs) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= tol {
            det = T::zero();
            continue;
        }
        if piv != r {
            a.swap(piv, r);
            if let Some(b) = rhs.as_deref_mut() {
                b.swap(piv, r);
            }
            det = -det;
        }
        det = det * a[r][c];
        for i in (r + 1)..rows {
            let f = a[i][c] / a[r][c];
            if f == T::zero() {
                continue;
            }
            for j in c..cols {
                let v = a[r][j];
                a[i][j] = a[i][j] - f * v;
            }
            if let Some(b) = rhs.as_deref_mut() {
                let v = b[r];
                b[i] = b[i] - f * v;
            }
        }
        r += 1;
        rank += 1;
    }
    if rows != cols {
        det = T::zero();
    }
    (det, rank)
}

pub fn determinant<T: Real>(m: &[Vec<T>]) -> T {
    let mut a = m.to_vec();
    eliminate(&mut a, None, T::zero()).0
}

pub fn rank<T: Real>(m: &[Vec<T>], tol: T) -> usize {
    let mut a = m.to_vec();
    eliminate(&mut a, None, tol).1
}

/// Solves `a x = b` for square nonsingular `a`; `None` if a pivot vanishes.
pub fn solve<T: Real>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let (det, rank) = eliminate(&mut m, Some(&mut rhs), T::zero());
    if rank < n || det == T::zero() {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..n {
            s = s - m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

pub fn transpose<T: Real>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| (0..rows).map(|i| m[i][j]).collect()).collect()
}
