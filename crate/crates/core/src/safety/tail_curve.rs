use serde::{Deserialize, Serialize};

use super::bounds::{borell_tail, empirical_quantile, TailBound};
use super::center::center;
use super::source::{CenteredMaxima, MaximaSource};
use crate::error::{invalid, Result};
use crate::gp::TrajectoryPosterior;

/// One threshold of the tail comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub x: f64,
    /// Empirical `P(S > x)`.
    pub mc: f64,
    /// `1 - Phi((x - m) / sigma)`.
    pub b1: f64,
    /// `exp(-(x - m)^2 / (2 sigma^2)) / 2`.
    pub b2: f64,
    /// `exp(-(x - mean)^2 / (2 sigma^2))`.
    pub b3: f64,
}

/// Tail of the centered supremum against the three Borell-TIS bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    /// Sample median of the suprema.
    pub median: f64,
    /// Sample mean of the suprema.
    pub mean: f64,
    pub sigma_tilde: f64,
    pub samples: usize,
    pub rows: Vec<TailRow>,
}

/// Centered suprema summarised by median and mean.
pub struct MaximaSample {
    pub maxima: Vec<f64>,
    pub median: f64,
    pub mean: f64,
    pub sigma_tilde: f64,
}

impl MaximaSample {
    pub fn draw(tp: &TrajectoryPosterior, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(invalid("at least one sample is required"));
        }
        let process = center(tp)?;
        let source = CenteredMaxima::new(&process)?;
        let maxima = source.draw(samples, seed, 1);
        let median = empirical_quantile(&maxima, 0.5).unwrap_or_else(|_| maxima[0]);
        let mean = maxima.iter().sum::<f64>() / samples as f64;
        Ok(Self { maxima, median, mean, sigma_tilde: process.sigma_tilde })
    }

    pub fn curve(&self, thresholds: &[f64]) -> TailCurve {
        let n = self.maxima.len() as f64;
        let bound = |u: f64, kind| {
            if u < 0.0 {
                1.0
            } else {
                borell_tail(u, self.sigma_tilde, kind).unwrap_or(if u > 0.0 { 0.0 } else { 1.0 })
            }
        };
        let rows = thresholds
            .iter()
            .map(|&x| TailRow {
                x,
                mc: self.maxima.iter().filter(|s| **s > x).count() as f64 / n,
                b1: bound(x - self.median, TailBound::B1),
                b2: bound(x - self.median, TailBound::B2),
                b3: bound(x - self.mean, TailBound::B3),
            })
            .collect();
        TailCurve {
            median: self.median,
            mean: self.mean,
            sigma_tilde: self.sigma_tilde,
            samples: self.maxima.len(),
            rows,
        }
    }

    /// `points` equidistant thresholds from the median to `median + span * sigma_tilde`.
    pub fn default_grid(&self, points: usize, span: f64) -> Vec<f64> {
        match points {
            0 => Vec::new(),
            1 => vec![self.median],
            _ => (0..points)
                .map(|i| self.median + span * self.sigma_tilde * i as f64 / (points - 1) as f64)
                .collect(),
        }
    }
}

/// Empirical tail `P(S > x)` of the centered supremum and the Borell-TIS bounds
/// at each threshold. Offsets with negative `u` report a vacuous bound of 1.
pub fn tail_curve(tp: &TrajectoryPosterior, thresholds: &[f64], mc_samples: usize, seed: u64) -> Result<TailCurve> {
    Ok(MaximaSample::draw(tp, mc_samples, seed)?.curve(thresholds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use nalgebra::{DMatrix, DVector};

    fn process() -> TrajectoryPosterior {
        let mean = DVector::from_vec(vec![1.0, 1.5, 2.0, 1.2]);
        let cov = DMatrix::from_fn(4, 4, |i, j| 0.04 * (-0.5 * (i as f64 - j as f64).powi(2)).exp());
        TrajectoryPosterior::from_moments(mean, cov).unwrap()
    }

    #[test]
    fn b1_is_half_at_the_median() {
        let sample = MaximaSample::draw(&process(), 20_000, 1).unwrap();
        let curve = sample.curve(&[sample.median]);
        assert_eq!(curve.rows[0].b1, 0.5);
        assert_eq!(curve.rows[0].b2, 0.5);
    }

    #[test]
    fn bounds_are_ordered_on_shared_offsets() {
        let sample = MaximaSample::draw(&process(), 20_000, 2).unwrap();
        let curve = sample.curve(&sample.default_grid(20, 4.0));
        let shift = sample.mean - sample.median;
        for row in &curve.rows {
            assert!(row.b1 <= row.b2);
            let b3_shared = sample.curve(&[row.x + shift]).rows[0].b3;
            assert!(row.b2 <= b3_shared + 1e-15);
        }
    }

    #[test]
    fn thresholds_below_the_shift_are_vacuous() {
        let sample = MaximaSample::draw(&process(), 1000, 3).unwrap();
        let row = sample.curve(&[sample.median - 1.0]).rows[0];
        assert_eq!((row.b1, row.b2), (1.0, 1.0));
    }

    #[test]
    fn sign_change_propagates() {
        let tp = TrajectoryPosterior::from_moments(DVector::from_vec(vec![1.0, -1.0]), DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(tail_curve(&tp, &[0.0], 10, 1), Err(Error::MeanSignChange { .. })));
    }
}
