use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Squared-exponential kernel hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub signal_variance: f64,
    /// One lengthscale per input dimension.
    pub lengthscales: Vec<f64>,
    pub noise_variance: f64,
}

impl Hyperparams {
    pub fn new(signal_variance: f64, lengthscales: Vec<f64>, noise_variance: f64) -> Result<Self> {
        let h = Self { signal_variance, lengthscales, noise_variance };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(invalid("signal variance must be positive"));
        }
        if self.lengthscales.is_empty() {
            return Err(invalid("at least one lengthscale is required"));
        }
        if self.lengthscales.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("lengthscales must be positive"));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(invalid("noise variance must be non-negative"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Kernel evaluation without the dimension check; callers guarantee lengths.
    #[inline]
    pub(crate) fn eval(&self, x1: &[f64], x2: &[f64]) -> f64 {
        let mut q = 0.0;
        for ((a, b), l) in x1.iter().zip(x2).zip(&self.lengthscales) {
            let d = (a - b) / l;
            q += d * d;
        }
        self.signal_variance * (-0.5 * q).exp()
    }
}

/// `sigma_f^2 * exp(-1/2 * sum_d (x1_d - x2_d)^2 / l_d^2)`.
pub fn se_kernel(x1: &[f64], x2: &[f64], theta: &Hyperparams) -> Result<f64> {
    if x1.len() != theta.dim() || x2.len() != theta.dim() {
        return Err(invalid(format!(
            "point dimensions {} and {} do not match {} lengthscales",
            x1.len(),
            x2.len(),
            theta.dim()
        )));
    }
    Ok(theta.eval(x1, x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_distance_gives_signal_variance() {
        let h = Hyperparams::new(2.5, vec![0.3, 4.0], 0.0).unwrap();
        assert_eq!(se_kernel(&[0.1, -2.0], &[0.1, -2.0], &h).unwrap(), 2.5);
    }

    #[test]
    fn hand_evaluated_values() {
        let h = Hyperparams::new(1.0, vec![(1.0f64 / 32.0).sqrt()], 0.0).unwrap();
        assert_relative_eq!(se_kernel(&[0.0], &[1.0], &h).unwrap(), 1.1253517471925912e-07, max_relative = 1e-10);
        let h = Hyperparams::new(1.0, vec![1.0, 1.0], 0.0).unwrap();
        assert_relative_eq!(se_kernel(&[0.0, 0.0], &[1.0, 1.0], &h).unwrap(), 0.36787944117144233, max_relative = 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let h = Hyperparams::new(1.0, vec![1.0, 1.0], 0.0).unwrap();
        assert!(se_kernel(&[0.0], &[1.0, 1.0], &h).is_err());
    }

    #[test]
    fn invalid_hyperparams_are_rejected() {
        assert!(Hyperparams::new(0.0, vec![1.0], 0.0).is_err());
        assert!(Hyperparams::new(1.0, vec![-1.0], 0.0).is_err());
        assert!(Hyperparams::new(1.0, vec![1.0], -1e-3).is_err());
        assert!(Hyperparams::new(1.0, vec![], 0.0).is_err());
    }
}
