use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::kernel::Hyperparams;
use super::linalg::jittered_cholesky;
use super::normal::std_normal_cdf;
use crate::error::{invalid, Error, Result};

/// Training inputs (one row per point) and their observed outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        let d = Self { inputs, outputs };
        d.validate(None)?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        self.inputs.push(x);
        self.outputs.push(y);
    }

    pub(crate) fn validate(&self, dim: Option<usize>) -> Result<()> {
        if self.inputs.len() != self.outputs.len() {
            return Err(invalid(format!(
                "{} inputs but {} outputs",
                self.inputs.len(),
                self.outputs.len()
            )));
        }
        let dim = dim.or_else(|| self.inputs.first().map(Vec::len));
        for x in &self.inputs {
            if Some(x.len()) != dim {
                return Err(invalid("inconsistent input dimensions"));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(invalid("non-finite input coordinate"));
            }
        }
        if self.outputs.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite output"));
        }
        Ok(())
    }
}

/// Exact GP regression model with a constant prior mean.
///
/// Immutable after construction. Holds the lower Cholesky factor `L` of
/// `K + sigma_n^2 I` and the weights `(K + sigma_n^2 I)^{-1} (y - m0)`.
#[derive(Debug, Clone)]
pub struct GpModel {
    hyperparams: Hyperparams,
    data: Dataset,
    prior_mean: f64,
    gram_factor: DMatrix<f64>,
    weights: DVector<f64>,
    jitter: f64,
}

impl GpModel {
    /// Conditions a zero-mean prior on `data`.
    pub fn fit(hyperparams: Hyperparams, data: Dataset) -> Result<Self> {
        Self::fit_with_prior_mean(hyperparams, data, 0.0)
    }

    pub fn fit_with_prior_mean(hyperparams: Hyperparams, data: Dataset, prior_mean: f64) -> Result<Self> {
        hyperparams.validate()?;
        data.validate(Some(hyperparams.dim()))?;
        if !prior_mean.is_finite() {
            return Err(invalid("prior mean must be finite"));
        }
        let n = data.len();
        let mut gram = DMatrix::from_fn(n, n, |i, j| hyperparams.eval(&data.inputs[i], &data.inputs[j]));
        for i in 0..n {
            gram[(i, i)] += hyperparams.noise_variance;
        }
        let (gram_factor, jitter) = jittered_cholesky(&gram)?;
        let centered = DVector::from_iterator(n, data.outputs.iter().map(|y| y - prior_mean));
        let weights = cholesky_solve(&gram_factor, &centered)?;
        Ok(Self { hyperparams, data, prior_mean, gram_factor, weights, jitter })
    }

    /// Adds one observation by extending the Cholesky factor with a new row,
    /// in `O(n^2)`. Falls back to a full refit when the new pivot is not
    /// safely positive.
    pub fn condition_on(&self, x: Vec<f64>, y: f64) -> Result<Self> {
        self.check_point(&x)?;
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("observation must be finite"));
        }
        let mut data = self.data.clone();
        data.push(x, y);
        let n = self.data.len();
        let new_x = &data.inputs[n];
        let k = self.cross_kernel(new_x);
        let l = if n == 0 {
            DVector::zeros(0)
        } else {
            self.gram_factor
                .solve_lower_triangular(&k)
                .ok_or_else(|| Error::Numerical("singular Gram factor".into()))?
        };
        let diag = self.hyperparams.eval(new_x, new_x) + self.hyperparams.noise_variance + self.jitter;
        let pivot = diag - l.norm_squared();
        if !(pivot > 1e-10 * diag) {
            return Self::fit_with_prior_mean(self.hyperparams.clone(), data, self.prior_mean);
        }
        let mut gram_factor = self.gram_factor.clone().resize(n + 1, n + 1, 0.0);
        for j in 0..n {
            gram_factor[(n, j)] = l[j];
        }
        gram_factor[(n, n)] = pivot.sqrt();
        let centered = DVector::from_iterator(n + 1, data.outputs.iter().map(|y| y - self.prior_mean));
        let weights = cholesky_solve(&gram_factor, &centered)?;
        Ok(Self {
            hyperparams: self.hyperparams.clone(),
            data,
            prior_mean: self.prior_mean,
            gram_factor,
            weights,
            jitter: self.jitter,
        })
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    /// Lower factor of `K + sigma_n^2 I` (plus any jitter that was needed).
    pub fn gram_factor(&self) -> &DMatrix<f64> {
        &self.gram_factor
    }

    /// `(K + sigma_n^2 I)^{-1} (y - m0)`.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.hyperparams.dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(invalid(format!("query has dimension {}, model has {}", x.len(), self.dim())));
        }
        Ok(())
    }

    fn cross_kernel(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.data.len(), self.data.inputs.iter().map(|xi| self.hyperparams.eval(x, xi)))
    }

    /// Posterior mean at `x`.
    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.mean_unchecked(x))
    }

    pub(crate) fn mean_unchecked(&self, x: &[f64]) -> f64 {
        let mut m = self.prior_mean;
        for (xi, w) in self.data.inputs.iter().zip(self.weights.iter()) {
            m += self.hyperparams.eval(x, xi) * w;
        }
        m
    }

    /// Posterior mean and (latent, noise-free) variance at `x`.
    pub fn mean_and_variance(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_point(x)?;
        let k = self.cross_kernel(x);
        let mean = self.prior_mean + k.dot(&self.weights);
        let prior_var = self.hyperparams.signal_variance;
        if self.data.is_empty() {
            return Ok((mean, prior_var));
        }
        let v = self
            .gram_factor
            .solve_lower_triangular(&k)
            .ok_or_else(|| Error::Numerical("singular Gram factor".into()))?;
        Ok((mean, (prior_var - v.norm_squared()).max(0.0)))
    }

    pub fn variance(&self, x: &[f64]) -> Result<f64> {
        Ok(self.mean_and_variance(x)?.1)
    }

    /// Joint posterior over a discretized trajectory.
    pub fn trajectory_posterior(&self, points: &[Vec<f64>]) -> Result<TrajectoryPosterior> {
        let m = points.len();
        if m == 0 {
            return Err(invalid("trajectory needs at least one point"));
        }
        for p in points {
            self.check_point(p)?;
        }
        let n = self.data.len();
        let mut cov = DMatrix::from_fn(m, m, |i, j| self.hyperparams.eval(&points[i], &points[j]));
        let mut mean = DVector::from_element(m, self.prior_mean);
        if n > 0 {
            let cross = DMatrix::from_fn(n, m, |i, j| self.hyperparams.eval(&self.data.inputs[i], &points[j]));
            mean += cross.tr_mul(&self.weights);
            let v = self
                .gram_factor
                .solve_lower_triangular(&cross)
                .ok_or_else(|| Error::Numerical("singular Gram factor".into()))?;
            cov -= v.tr_mul(&v);
        }
        symmetrize(&mut cov);
        for i in 0..m {
            if cov[(i, i)] < 0.0 {
                cov[(i, i)] = 0.0;
            }
        }
        TrajectoryPosterior::new(points.to_vec(), mean, cov)
    }

    /// Posterior probability that the latent function is below zero at `x`.
    pub fn pointwise_unsafe_prob(&self, x: &[f64]) -> Result<f64> {
        let (mu, var) = self.mean_and_variance(x)?;
        let sd = var.sqrt();
        if sd == 0.0 {
            return match mu.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => Ok(0.0),
                Some(std::cmp::Ordering::Less) => Ok(1.0),
                _ => Err(invalid("zero posterior variance with zero mean")),
            };
        }
        Ok(std_normal_cdf(-mu / sd))
    }
}

/// Solves `(L L^T) x = b`.
pub(crate) fn cholesky_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if l.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let y = l
        .solve_lower_triangular(b)
        .ok_or_else(|| Error::Numerical("singular Gram factor".into()))?;
    l.tr_solve_lower_triangular(&y)
        .ok_or_else(|| Error::Numerical("singular Gram factor".into()))
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Mean vector and covariance matrix of the posterior along a discretized
/// trajectory `tau(t_1), ..., tau(t_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPosterior {
    points: Vec<Vec<f64>>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl TrajectoryPosterior {
    /// Validates symmetry and positive semi-definiteness
    /// (eigenvalues `>= -1e-8 * trace / m`).
    pub fn new(points: Vec<Vec<f64>>, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let m = mean.len();
        if m == 0 {
            return Err(invalid("trajectory needs at least one point"));
        }
        if cov.nrows() != m || cov.ncols() != m {
            return Err(invalid("covariance shape does not match mean"));
        }
        if !points.is_empty() && points.len() != m {
            return Err(invalid("point count does not match mean"));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite mean or covariance"));
        }
        let scale = cov.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..m {
            for j in (i + 1)..m {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(invalid("covariance is not symmetric"));
                }
            }
        }
        let trace = cov.trace();
        let tol = 1e-8 * trace / m as f64 + 1e-14 * scale;
        let min_eig = SymmetricEigen::new(cov.clone()).eigenvalues.min();
        if min_eig < -tol {
            return Err(invalid(format!("covariance is not positive semi-definite (eigenvalue {min_eig:e})")));
        }
        Ok(Self { points, mean, cov })
    }

    /// Builds a posterior from raw mean and covariance, without trajectory points.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        Self::new(Vec::new(), mean, cov)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h1(noise: f64) -> Hyperparams {
        Hyperparams::new(1.0, vec![1.0], noise).unwrap()
    }

    #[test]
    fn empty_data_returns_prior() {
        let model = GpModel::fit_with_prior_mean(h1(0.1), Dataset::default(), 0.7).unwrap();
        let (m, v) = model.mean_and_variance(&[3.0]).unwrap();
        assert_eq!(m, 0.7);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn single_point_closed_form() {
        let data = Dataset::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let model = GpModel::fit(h1(0.0), data).unwrap();
        let (m, v) = model.mean_and_variance(&[1.0]).unwrap();
        assert_abs_diff_eq!(m, 0.6065306597126334, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.6321205588285577, epsilon = 1e-12);
    }

    #[test]
    fn interpolates_training_points_without_noise() {
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.7]).collect();
        let ys = vec![0.3, -1.0, 2.0, 0.5, 0.0];
        let model = GpModel::fit(h1(0.0), Dataset::new(xs.clone(), ys.clone()).unwrap()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_abs_diff_eq!(model.mean(x).unwrap(), *y, epsilon = 1e-6);
        }
    }

    #[test]
    fn appending_matches_refit() {
        let h = Hyperparams::new(1.3, vec![0.4, 0.9], 1e-3).unwrap();
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * x[1] - 0.2).collect();
        let mut inc = GpModel::fit_with_prior_mean(h.clone(), Dataset::default(), 0.1).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            inc = inc.condition_on(x.clone(), *y).unwrap();
        }
        let full = GpModel::fit_with_prior_mean(h, Dataset::new(xs, ys).unwrap(), 0.1).unwrap();
        for q in [[0.0, 0.0], [0.5, -0.3], [2.0, 1.0]] {
            let (a, b) = (inc.mean_and_variance(&q).unwrap(), full.mean_and_variance(&q).unwrap());
            assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-10);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-10);
        }
        // A duplicate input without noise forces the refit path.
        let h0 = Hyperparams::new(1.0, vec![1.0], 0.0).unwrap();
        let m = GpModel::fit(h0, Dataset::new(vec![vec![0.0]], vec![1.0]).unwrap()).unwrap();
        let m = m.condition_on(vec![0.0], 1.0).unwrap();
        assert!(m.jitter() > 0.0);
        assert_abs_diff_eq!(m.mean(&[0.0]).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn single_point_trajectory_is_pointwise_variance() {
        let data = Dataset::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let model = GpModel::fit(h1(0.0), data).unwrap();
        let tp = model.trajectory_posterior(&[vec![1.0]]).unwrap();
        assert_eq!(tp.len(), 1);
        assert_abs_diff_eq!(tp.cov()[(0, 0)], model.variance(&[1.0]).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn duplicated_trajectory_point_is_perfectly_correlated() {
        let data = Dataset::new(vec![vec![0.0], vec![0.5]], vec![1.0, 0.2]).unwrap();
        let model = GpModel::fit(h1(0.0), data).unwrap();
        let tp = model.trajectory_posterior(&[vec![1.3], vec![1.3]]).unwrap();
        let c = tp.cov();
        assert_abs_diff_eq!(c[(0, 0)], c[(0, 1)], epsilon = 1e-8);
        assert_abs_diff_eq!(c[(1, 1)], c[(0, 1)], epsilon = 1e-8);
    }

    #[test]
    fn pointwise_unsafe_prob_cases() {
        let model = GpModel::fit(h1(0.0), Dataset::default()).unwrap();
        assert_abs_diff_eq!(model.pointwise_unsafe_prob(&[0.0]).unwrap(), 0.5, epsilon = 1e-15);

        let model = GpModel::fit_with_prior_mean(h1(0.0), Dataset::default(), 2.0).unwrap();
        assert_abs_diff_eq!(model.pointwise_unsafe_prob(&[0.0]).unwrap(), 0.022750131948179195, epsilon = 1e-12);

        let model = GpModel::fit_with_prior_mean(h1(0.0), Dataset::default(), 1e3).unwrap();
        assert!(model.pointwise_unsafe_prob(&[0.0]).unwrap() < 1e-300);
    }

    #[test]
    fn pointwise_unsafe_prob_rejects_degenerate_zero_mean() {
        let data = Dataset::new(vec![vec![0.0]], vec![0.0]).unwrap();
        let model = GpModel::fit(h1(0.0), data).unwrap();
        assert!(model.pointwise_unsafe_prob(&[0.0]).is_err());
    }

    #[test]
    fn mismatched_dataset_is_rejected() {
        assert!(Dataset::new(vec![vec![0.0]], vec![]).is_err());
        let data = Dataset::new(vec![vec![0.0, 1.0]], vec![1.0]).unwrap();
        assert!(GpModel::fit(h1(0.0), data).is_err());
    }

    #[test]
    fn non_psd_posterior_is_rejected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(TrajectoryPosterior::from_moments(DVector::from_vec(vec![1.0, 1.0]), cov).is_err());
    }
}
