use rand::Rng;
use rand_distr::StandardNormal;

use super::functions::{himmelblau_point, toy1d_point};
use super::metrics::EvalGrid;
use crate::active::{Domain, MeasureMode};
use crate::error::{invalid, Result};
use crate::gp::{Dataset, Hyperparams};
use crate::rng;

/// How the initial training data of a benchmark is laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDesign {
    /// Fixed inputs observed without noise.
    Fixed(Vec<Vec<f64>>),
    /// `count` noisy measurements drawn uniformly in a ball around `center`
    /// (the first one exactly at `center`).
    Cluster { center: Vec<f64>, radius: f64, count: usize },
}

/// A ground-truth safety indicator together with its GP and exploration settings.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub ground_truth: fn(&[f64]) -> f64,
    pub domain: Domain,
    /// Standard deviation of the additive measurement noise.
    pub noise_std: f64,
    pub hyperparams: Hyperparams,
    pub prior_mean: f64,
    /// Trajectory discretization.
    pub m: usize,
    /// Evaluation grid points per axis.
    pub grid_resolution: usize,
    pub measure_mode: MeasureMode,
    pub initial: InitialDesign,
}

impl Benchmark {
    pub fn truth(&self, x: &[f64]) -> f64 {
        (self.ground_truth)(x)
    }

    pub fn eval_grid(&self) -> EvalGrid {
        self.eval_grid_with(self.grid_resolution)
    }

    pub fn eval_grid_with(&self, resolution: usize) -> EvalGrid {
        EvalGrid::new(&self.domain.lo, &self.domain.hi, resolution, self.ground_truth)
    }

    /// Noisy observation `f(x) + noise_std * xi`.
    pub fn measure<R: Rng>(&self, x: &[f64], rng: &mut R) -> f64 {
        let xi: f64 = rng.sample(StandardNormal);
        self.truth(x) + self.noise_std * xi
    }

    pub fn initial_data(&self, seed: u64) -> Dataset {
        match &self.initial {
            InitialDesign::Fixed(inputs) => Dataset {
                inputs: inputs.clone(),
                outputs: inputs.iter().map(|x| self.truth(x)).collect(),
            },
            InitialDesign::Cluster { center, radius, count } => {
                let mut rng = rng::stream(seed, "initial-data", &[]);
                let mut data = Dataset::default();
                for i in 0..*count {
                    let mut x = center.clone();
                    if i > 0 {
                        loop {
                            let offset: Vec<f64> = x.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
                            if offset.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                                for (xi, o) in x.iter_mut().zip(offset) {
                                    *xi += radius * o;
                                }
                                break;
                            }
                        }
                        self.domain.clamp(&mut x);
                    }
                    let y = self.measure(&x, &mut rng);
                    data.push(x, y);
                }
                data
            }
        }
    }

    pub fn with_initial_count(mut self, n: usize) -> Self {
        if let InitialDesign::Cluster { count, .. } = &mut self.initial {
            *count = n;
        }
        self
    }
}

/// One-dimensional toy problem: 21 equispaced noise-free training points on
/// `[0, 1]`, 50-point discretization, `sigma_f = 1`, `l^2 = 1/32`, `sigma_n^2 = 1e-3`.
pub fn toy_preset() -> Benchmark {
    let noise_variance = 1e-3;
    Benchmark {
        name: "toy1d",
        ground_truth: toy1d_point,
        domain: Domain::cube(0.0, 1.0, 1).expect("valid domain"),
        noise_std: f64::sqrt(noise_variance),
        hyperparams: Hyperparams::new(1.0, vec![(1.0f64 / 32.0).sqrt()], noise_variance).expect("valid"),
        prior_mean: 0.0,
        m: 50,
        grid_resolution: 1000,
        measure_mode: MeasureMode::EndpointOnly,
        initial: InitialDesign::Fixed((0..21).map(|i| vec![i as f64 / 20.0]).collect()),
    }
}

/// Himmelblau exploration on `[-3, 3]^2` with `l^2 = 1`, `sigma_f^2 = 1`,
/// noise std 0.01, `m = 5` and endpoint-only measurements.
pub fn himmelblau_preset() -> Benchmark {
    let noise_std = 0.01;
    Benchmark {
        name: "himmelblau",
        ground_truth: himmelblau_point,
        domain: Domain::cube(-3.0, 3.0, 2).expect("valid domain"),
        noise_std,
        hyperparams: Hyperparams::new(1.0, vec![1.0, 1.0], noise_std * noise_std).expect("valid"),
        prior_mean: 0.0,
        m: 5,
        grid_resolution: 100,
        measure_mode: MeasureMode::EndpointOnly,
        initial: InitialDesign::Cluster { center: vec![0.0, 0.0], radius: 0.3, count: 5 },
    }
}

/// Looks up a preset by its CLI name.
pub fn preset(name: &str) -> Result<Benchmark> {
    match name {
        "toy1d" => Ok(toy_preset()),
        "himmelblau" => Ok(himmelblau_preset()),
        other => Err(invalid(format!("unknown preset `{other}` (expected toy1d or himmelblau)"))),
    }
}

/// Discretization `{0, 1/(m-1), ..., 1}` of the toy trajectory.
pub fn toy_trajectory_points(m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|i| vec![i as f64 / (m - 1) as f64]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::GpModel;

    #[test]
    fn toy_preset_values() {
        let b = toy_preset();
        let data = b.initial_data(0);
        assert_eq!(data.len(), 21);
        assert_eq!(data.inputs[20], vec![1.0]);
        assert_eq!(b.m, 50);
        assert_eq!(b.hyperparams.signal_variance, 1.0);
        assert!((b.hyperparams.lengthscales[0].powi(2) - 1.0 / 32.0).abs() < 1e-15);
        assert_eq!(b.hyperparams.noise_variance, 1e-3);
        let t = toy_trajectory_points(50);
        assert_eq!(t[1], vec![1.0 / 49.0]);
        assert_eq!(t[49], vec![1.0]);
    }

    #[test]
    fn toy_posterior_variance_is_reduced() {
        let b = toy_preset();
        let model = GpModel::fit(b.hyperparams.clone(), b.initial_data(0)).unwrap();
        let tp = model.trajectory_posterior(&toy_trajectory_points(50)).unwrap();
        assert!(tp.cov().diagonal().iter().all(|v| *v <= 1.0));
    }

    #[test]
    fn himmelblau_preset_values() {
        let b = himmelblau_preset();
        assert_eq!(b.m, 5);
        assert_eq!(b.noise_std, 0.01);
        assert_eq!(b.measure_mode, MeasureMode::EndpointOnly);
        assert_eq!(b.hyperparams.lengthscales, vec![1.0, 1.0]);
        let data = b.initial_data(3);
        assert_eq!(data.len(), 5);
        assert!(data.inputs.iter().all(|x| b.truth(x) >= 0.0));
        assert_eq!(data, b.initial_data(3));
    }

    #[test]
    fn presets_by_name() {
        assert_eq!(preset("toy1d").unwrap().name, "toy1d");
        assert_eq!(preset("himmelblau").unwrap().name, "himmelblau");
        assert!(preset("engine").is_err());
    }

    #[test]
    fn prior_coverage_is_safe_fraction() {
        let b = himmelblau_preset();
        let grid = b.eval_grid();
        let model = GpModel::fit(b.hyperparams.clone(), Dataset::default()).unwrap();
        let mut safe = 0usize;
        for i in 0..100 {
            for j in 0..100 {
                let x = -3.0 + 6.0 * i as f64 / 99.0;
                let y = -3.0 + 6.0 * j as f64 / 99.0;
                if super::super::functions::himmelblau_safety(x, y) >= 0.0 {
                    safe += 1;
                }
            }
        }
        assert_eq!(grid.health_coverage(&model), safe as f64 / 1e4);
    }
}
