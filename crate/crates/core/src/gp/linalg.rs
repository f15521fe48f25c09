use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Cholesky factorization with escalating diagonal jitter.
///
/// Tries the matrix as given, then adds `1e-10 * mean(diag)` and escalates by
/// a factor of ten up to `1e-4 * mean(diag)`. An all-zero matrix factors to
/// the zero matrix. Returns the lower factor and the jitter that was used.
pub fn jittered_cholesky(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidInput("matrix is not square".into()));
    }
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), 0.0));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let mean_diag = a.diagonal().mean();
    if a.iter().all(|v| *v == 0.0) {
        return Ok((DMatrix::zeros(n, n), 0.0));
    }
    if let Some(c) = Cholesky::<f64, Dyn>::new(a.clone()) {
        return Ok((c.unpack(), 0.0));
    }
    if mean_diag <= 0.0 {
        return Err(Error::Numerical("covariance has non-positive mean diagonal".into()));
    }
    let mut rel = JITTER_START;
    while rel <= JITTER_MAX * (1.0 + 1e-9) {
        let jitter = rel * mean_diag;
        let mut b = a.clone();
        for i in 0..n {
            b[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::<f64, Dyn>::new(b) {
            return Ok((c.unpack(), jitter));
        }
        rel *= 10.0;
    }
    Err(Error::Numerical(format!(
        "Cholesky factorization failed with jitter up to {:e} * mean(diag)",
        JITTER_MAX
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pd_matrix_needs_no_jitter() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let (l, j) = jittered_cholesky(&a).unwrap();
        assert_eq!(j, 0.0);
        assert!((&l * l.transpose() - &a).norm() < 1e-12);
    }

    #[test]
    fn singular_psd_matrix_gets_jitter() {
        let a = DMatrix::from_element(3, 3, 1.0);
        let (l, j) = jittered_cholesky(&a).unwrap();
        assert!(j > 0.0 && j <= 1e-4);
        assert!((&l * l.transpose() - &a).norm() < 1e-3);
    }

    #[test]
    fn zero_matrix_factors_to_zero() {
        let (l, _) = jittered_cholesky(&DMatrix::zeros(3, 3)).unwrap();
        assert!(l.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn indefinite_matrix_fails() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(jittered_cholesky(&a), Err(Error::Numerical(_))));
    }
}
