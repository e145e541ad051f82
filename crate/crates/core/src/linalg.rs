//! Hermitian positive semidefiniteness via cyclic Jacobi rotations.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest Hermitian matrix accepted by [`gram_report`].
pub const MAX_GRAM_ROWS: usize = 64;

const MAX_SWEEPS: usize = 100;

/// Outcome of a positive-semidefiniteness test on a Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    pub size: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub trace: f64,
    /// pass iff `min_eigenvalue >= -tolerance * trace`
    pub tolerance: f64,
    pub pass: bool,
    /// Some matrix entries were unavailable and taken as zero.
    pub missing_entries: bool,
}

/// Eigenvalues of a real symmetric matrix (row-major, `n * n`), ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: &[T], n: usize) -> Vec<T> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut a = a.to_vec();
    let norm = a.iter().map(|&v| v * v).sum::<T>().sqrt();
    let stop = (T::of(1e-12).max(T::epsilon() * T::of(4.0))) * norm;
    for _ in 0..MAX_SWEEPS {
        let off: T =
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j] * a[i * n + j]).sum();
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eig
}

/// PSD test of the Hermitian matrix `m` (rows of equal length).
///
/// Complex matrices are embedded as the real symmetric `[[A, -B], [B, A]]`,
/// which has the same spectrum with doubled multiplicities.
pub fn gram_report<T: Scalar>(m: &[Vec<Complex<T>>], tolerance: f64, missing_entries: bool) -> Result<GramReport> {
    let n = m.len();
    if n > MAX_GRAM_ROWS {
        return Err(Error::Capacity(format!("Gram matrix of {n} rows exceeds the {MAX_GRAM_ROWS}-row cap")));
    }
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::domain("Gram matrix must be square"));
    }
    let scale = m.iter().flatten().map(|v| v.norm().as_f64()).fold(0.0, f64::max);
    let herm_tol = 1e-9_f64.max(T::epsilon().as_f64() * 8.0 * scale);
    if let Some((i, j)) =
        (0..n).flat_map(|i| (0..=i).map(move |j| (i, j))).find(|&(i, j)| (m[i][j] - m[j][i].conj()).norm().as_f64() > herm_tol)
    {
        return Err(Error::domain(format!("Gram matrix not Hermitian at ({i}, {j})")));
    }
    let real = m.iter().flatten().all(|v| v.im.as_f64().abs() <= herm_tol);
    let eig = if real {
        let flat: Vec<T> = m.iter().flatten().map(|v| v.re).collect();
        symmetric_eigenvalues(&flat, n)
    } else {
        let w = 2 * n;
        let mut flat = vec![T::zero(); w * w];
        for i in 0..n {
            for j in 0..n {
                let Complex { re, im } = m[i][j];
                flat[i * w + j] = re;
                flat[(i + n) * w + j + n] = re;
                flat[i * w + j + n] = -im;
                flat[(i + n) * w + j] = im;
            }
        }
        symmetric_eigenvalues(&flat, w)
    };
    let trace: f64 = (0..n).map(|i| m[i][i].re.as_f64()).sum();
    let min_eigenvalue = eig.first().map_or(0.0, |v| v.as_f64());
    let max_eigenvalue = eig.last().map_or(0.0, |v| v.as_f64());
    Ok(GramReport {
        size: n,
        min_eigenvalue,
        max_eigenvalue,
        trace,
        tolerance,
        pass: min_eigenvalue >= -tolerance * trace,
        missing_entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn antidiagonal_fails() {
        let r = gram_report(&[vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]], 1e-8, false).unwrap();
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!((r.max_eigenvalue - 1.0).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn zero_matrix_passes() {
        let r = gram_report(&vec![vec![c(0.0); 3]; 3], 1e-8, false).unwrap();
        assert!(r.pass);
        assert_eq!(r.min_eigenvalue, 0.0);
    }

    #[test]
    fn complex_hermitian_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = vec![vec![c(2.0), Complex::new(0.0, 1.0)], vec![Complex::new(0.0, -1.0), c(2.0)]];
        let r = gram_report(&m, 1e-8, false).unwrap();
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-12);
        assert!((r.max_eigenvalue - 3.0).abs() < 1e-12);
        assert_eq!(r.trace, 4.0);
    }

    #[test]
    fn rejects_non_hermitian_and_oversize() {
        assert!(gram_report(&[vec![c(1.0), c(2.0)], vec![c(0.0), c(1.0)]], 1e-8, false).is_err());
        let big = vec![vec![c(0.0); 65]; 65];
        assert!(matches!(gram_report(&big, 1e-8, false), Err(Error::Capacity(_))));
    }

    #[test]
    fn f32_path() {
        let m = vec![vec![Complex::new(2.0f32, 0.0), Complex::new(1.0, 0.0)], vec![Complex::new(1.0, 0.0), Complex::new(2.0, 0.0)]];
        let r = gram_report(&m, 1e-6, false).unwrap();
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-5);
    }
}
