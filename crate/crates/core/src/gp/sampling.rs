use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::linalg::jittered_cholesky;
use super::model::TrajectoryPosterior;
use crate::error::Result;
use crate::rng;

/// Draws per independently seeded chunk.
pub const CHUNK_SIZE: usize = 4096;

/// Multivariate normal sampler with a factorization computed once.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: Vec<f64>,
    /// Row-major lower factor; row `i` holds `i + 1` entries.
    factor: Vec<f64>,
    dim: usize,
}

impl GaussianSampler {
    pub fn new(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        let (l, _) = jittered_cholesky(cov)?;
        let dim = mean.len();
        let mut factor = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                factor.push(l[(i, j)]);
            }
        }
        Ok(Self { mean: mean.iter().copied().collect(), factor, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes one draw into `out` using `z` as scratch for standard normals.
    #[inline]
    pub fn draw_into(&self, rng: &mut ChaCha8Rng, z: &mut [f64], out: &mut [f64]) {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut k = 0;
        for i in 0..self.dim {
            let mut acc = self.mean[i];
            for zj in &z[..=i] {
                acc += self.factor[k] * zj;
                k += 1;
            }
            out[i] = acc;
        }
    }

    /// Draws `count` rows, chunked over streams `(seed, label, indices.., chunk)`.
    ///
    /// The result is identical for any thread count.
    pub fn sample(&self, count: usize, seed: u64, label: &str, indices: &[u64]) -> Vec<Vec<f64>> {
        map_draws(self, count, seed, label, indices, |row| row.to_vec())
    }
}

/// Draws `count` samples and maps each through `f`, in parallel over
/// independently seeded chunks. Output order is the draw order.
pub fn map_draws<T, F>(
    sampler: &GaussianSampler,
    count: usize,
    seed: u64,
    label: &str,
    indices: &[u64],
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let chunks = count.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
            let mut path: Vec<u64> = indices.to_vec();
            path.push(c as u64);
            let mut rng = rng::stream(seed, label, &path);
            let mut z = vec![0.0; sampler.dim];
            let mut row = vec![0.0; sampler.dim];
            (0..n)
                .map(|_| {
                    sampler.draw_into(&mut rng, &mut z, &mut row);
                    f(&row)
                })
                .collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Draws `count` i.i.d. joint samples from `N(mu, Sigma)`; one row per draw.
pub fn sample_trajectories(tp: &TrajectoryPosterior, count: usize, seed: u64) -> Result<DMatrix<f64>> {
    let sampler = GaussianSampler::new(tp.mean(), tp.cov())?;
    let m = tp.len();
    let rows = sampler.sample(count, seed, "trajectory-samples", &[]);
    Ok(DMatrix::from_fn(count, m, |i, j| rows[i][j]))
}
