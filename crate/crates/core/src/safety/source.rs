//! Streams of centered suprema `S_i = max_j X_{t_j, i}` consumed by the deciders.
//!
//! A draw is unsafe when `S_i >= 1`. Draws for round `r` come from streams
//! keyed by `(seed, r, chunk)`, so every decider sees the same samples for the
//! same seed and the merged counts do not depend on the thread count.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use super::center::CenteredProcess;
use crate::error::Result;
use crate::gp::{map_draws, GaussianSampler, CHUNK_SIZE};
use crate::rng;

pub trait MaximaSource: Sync {
    /// `count` fresh suprema for round `round`.
    fn draw(&self, count: usize, seed: u64, round: usize) -> Vec<f64>;
}

/// Suprema of a zero-mean Gaussian vector with the centered covariance.
#[derive(Debug, Clone)]
pub struct CenteredMaxima {
    sampler: GaussianSampler,
}

impl CenteredMaxima {
    pub fn new(process: &CenteredProcess) -> Result<Self> {
        let m = process.centered_cov.nrows();
        let sampler = GaussianSampler::new(&DVector::zeros(m), &process.centered_cov)?;
        Ok(Self { sampler })
    }
}

fn max_of(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl MaximaSource for CenteredMaxima {
    fn draw(&self, count: usize, seed: u64, round: usize) -> Vec<f64> {
        map_draws(&self.sampler, count, seed, "decider-round", &[round as u64], max_of)
    }
}

/// Synthetic indicator stream: a draw is unsafe (`S = 1`) with probability `p`,
/// otherwise `S = 0`.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliIndicator {
    pub p: f64,
}

impl MaximaSource for BernoulliIndicator {
    fn draw(&self, count: usize, seed: u64, round: usize) -> Vec<f64> {
        let chunks = count.div_ceil(CHUNK_SIZE);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let n = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
                let mut rng = rng::stream(seed, "bernoulli-round", &[round as u64, c as u64]);
                (0..n)
                    .map(|_| if rng.random::<f64>() < self.p { 1.0 } else { 0.0 })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn bernoulli_rate_and_determinism() {
        let s = BernoulliIndicator { p: 0.3 };
        let a = s.draw(50_000, 4, 1);
        assert_eq!(a, s.draw(50_000, 4, 1));
        assert_ne!(a, s.draw(50_000, 4, 2));
        let rate = a.iter().filter(|v| **v >= 1.0).count() as f64 / 50_000.0;
        assert!((rate - 0.3).abs() < 4.0 * (0.21f64 / 50_000.0).sqrt());
    }

    #[test]
    fn degenerate_process_has_zero_maxima() {
        let p = CenteredProcess::from_cov(DMatrix::zeros(3, 3));
        let s = CenteredMaxima::new(&p).unwrap();
        assert!(s.draw(100, 1, 1).iter().all(|v| *v == 0.0));
    }
}
