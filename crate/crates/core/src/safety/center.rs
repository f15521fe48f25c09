use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gp::TrajectoryPosterior;

/// The centered process `X_t = (mu_t - Z_t) / mu_t` of a positive-mean
/// trajectory posterior.
///
/// `min_j Z_j <= 0` holds exactly when `max_j X_j >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredProcess {
    /// `C_ij = Sigma_ij / (mu_i mu_j)`.
    pub centered_cov: DMatrix<f64>,
    /// `max_j sqrt(Sigma_jj) / mu_j`.
    pub sigma_tilde: f64,
}

/// Below this the centered process is treated as deterministic.
pub const DETERMINISTIC_SIGMA: f64 = 1e-12;

impl CenteredProcess {
    /// Wraps an already centered covariance.
    pub fn from_cov(centered_cov: DMatrix<f64>) -> Self {
        let sigma_tilde = centered_cov.diagonal().iter().fold(0.0f64, |a, v| a.max(*v)).sqrt();
        Self { centered_cov, sigma_tilde }
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma_tilde < DETERMINISTIC_SIGMA
    }
}

/// Applies the centering transform, or reports the first non-positive mean.
pub fn center(tp: &TrajectoryPosterior) -> Result<CenteredProcess> {
    let mu = tp.mean();
    if let Some((index, value)) = mu.iter().copied().enumerate().find(|(_, v)| *v <= 0.0) {
        return Err(Error::MeanSignChange { index, value });
    }
    let cov = tp.cov();
    let m = mu.len();
    let c = DMatrix::from_fn(m, m, |i, j| cov[(i, j)] / (mu[i] * mu[j]));
    Ok(CenteredProcess::from_cov(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn scaled_identity() {
        let tp = TrajectoryPosterior::from_moments(DVector::from_vec(vec![2.0, 2.0]), DMatrix::identity(2, 2)).unwrap();
        let c = center(&tp).unwrap();
        assert_eq!(c.centered_cov, DMatrix::identity(2, 2) * 0.25);
        assert_eq!(c.sigma_tilde, 0.5);
    }

    #[test]
    fn sign_change_is_reported() {
        let tp = TrajectoryPosterior::from_moments(
            DVector::from_vec(vec![1.0, 0.5, -0.1, 2.0]),
            DMatrix::identity(4, 4),
        )
        .unwrap();
        assert!(matches!(center(&tp), Err(Error::MeanSignChange { index: 2, .. })));
    }

    #[test]
    fn unit_relative_deviation() {
        let sd = [0.3, 1.5, 4.0];
        let cov = DMatrix::from_fn(3, 3, |i, j| if i == j { sd[i] * sd[i] } else { 0.1 * sd[i] * sd[j] });
        let tp = TrajectoryPosterior::from_moments(DVector::from_row_slice(&sd), cov).unwrap();
        let c = center(&tp).unwrap();
        assert!((c.sigma_tilde - 1.0).abs() < 1e-14);
        let max_diag = c.centered_cov.diagonal().max();
        assert!((c.sigma_tilde.powi(2) - max_diag).abs() < 1e-14);
    }
}
