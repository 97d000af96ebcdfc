//! Small dense linear algebra helpers: fixed-order dot products and a
//! Cholesky solver for symmetric positive definite systems.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Dot product with four independent accumulators.
///
/// The accumulation pattern is fixed, so results are reproducible across
/// runs and thread counts for identical inputs.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let chunks = n / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..chunks {
        let i = 4 * c;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// Mean of elementwise products, used by Monte Carlo projections.
#[inline]
pub fn dot_mean(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / a.len() as f64
}

/// In-place lower Cholesky factorization of a symmetric positive definite
/// matrix. Fails on a nonpositive pivot.
pub fn cholesky_in_place(a: &mut Array2<f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::shape("cholesky needs a square matrix".to_string()));
    }
    let s = a.as_slice_mut().expect("standard layout");
    for j in 0..n {
        let rj0 = j * n;
        let diag = {
            let rj = &s[rj0..rj0 + j];
            s[rj0 + j] - dot(rj, rj)
        };
        if !(diag > 0.0) {
            return Err(Error::Numerical(format!(
                "cholesky pivot {diag:.3e} at column {j}; matrix not positive definite"
            )));
        }
        let ljj = diag.sqrt();
        s[rj0 + j] = ljj;
        for i in (j + 1)..n {
            // Row-slice dots keep the inner loops contiguous.
            let (head, tail) = s.split_at_mut(i * n);
            let rj = &head[rj0..rj0 + j];
            let ri = &mut tail[..n];
            ri[j] = (ri[j] - dot(&ri[..j], rj)) / ljj;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            s[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Solve A x = b for symmetric positive definite A via Cholesky.
pub fn solve_spd(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::shape(format!(
            "rhs length {} for {n} x {n} system",
            b.len()
        )));
    }
    let mut l = a.clone();
    cholesky_in_place(&mut l)?;
    // Forward substitution L y = b.
    let mut y = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let row = row.as_slice().expect("standard layout");
        let s = dot(&row[..i], &y[..i]);
        y[i] = (y[i] - s) / row[i];
    }
    // Back substitution L^T x = y.
    let mut x = y;
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..13).map(|i| i as f64 * 0.3).collect();
        let b: Vec<f64> = (0..13).map(|i| (i as f64).sin()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn solves_known_system() {
        let a = arr2(&[[4.0, 2.0, 0.6], [2.0, 5.0, 1.0], [0.6, 1.0, 3.0]]);
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[(i, j)] * x_true[j]).sum())
            .collect();
        let x = solve_spd(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = arr2(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(solve_spd(&a, &[1.0, 1.0]).is_err());
    }
}
