use crate::gp::GpModel;

/// Ground truth tabulated on a regular grid over the benchmark domain.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    pub points: Vec<Vec<f64>>,
    pub truth: Vec<f64>,
}

impl EvalGrid {
    /// Tensor grid with `resolution` points per axis, endpoints included.
    pub fn new(lo: &[f64], hi: &[f64], resolution: usize, f: impl Fn(&[f64]) -> f64) -> Self {
        assert!(resolution >= 2, "grid resolution must be at least 2");
        let dim = lo.len();
        let total = resolution.pow(dim as u32);
        let points: Vec<Vec<f64>> = (0..total)
            .map(|mut idx| {
                (0..dim)
                    .map(|d| {
                        let i = idx % resolution;
                        idx /= resolution;
                        lo[d] + (hi[d] - lo[d]) * i as f64 / (resolution - 1) as f64
                    })
                    .collect()
            })
            .collect();
        let truth = points.iter().map(|p| f(p)).collect();
        Self { points, truth }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn means(&self, model: &GpModel) -> Vec<f64> {
        self.points.iter().map(|p| model.mean_unchecked(p)).collect()
    }

    pub fn rmse(&self, model: &GpModel) -> f64 {
        let se: f64 = self.means(model).iter().zip(&self.truth).map(|(m, z)| (m - z).powi(2)).sum();
        (se / self.len() as f64).sqrt()
    }

    /// Fraction of grid points where the posterior-mean classifier agrees in
    /// sign with the ground truth (zero counts as safe).
    pub fn health_coverage(&self, model: &GpModel) -> f64 {
        let agree = self
            .means(model)
            .iter()
            .zip(&self.truth)
            .filter(|(m, z)| (**m >= 0.0) == (**z >= 0.0))
            .count();
        agree as f64 / self.len() as f64
    }

    /// Fraction of grid points that are safe under the ground truth.
    pub fn safe_fraction(&self) -> f64 {
        self.truth.iter().filter(|z| **z >= 0.0).count() as f64 / self.len() as f64
    }
}

/// Grid metrics for a model whose data only grows by appending.
///
/// Caches one kernel column per training input so each evaluation costs a
/// matrix-vector product plus the columns of new inputs.
#[derive(Debug, Clone)]
pub struct GridTracker<'a> {
    grid: &'a EvalGrid,
    columns: Vec<Vec<f64>>,
}

impl<'a> GridTracker<'a> {
    pub fn new(grid: &'a EvalGrid) -> Self {
        Self { grid, columns: Vec::new() }
    }

    /// `(rmse, health_coverage)` of `model`, which must extend the data seen
    /// in previous calls.
    pub fn metrics(&mut self, model: &GpModel) -> (f64, f64) {
        let inputs = &model.data().inputs;
        if self.columns.len() > inputs.len() {
            self.columns.clear();
        }
        let h = model.hyperparams();
        for x in &inputs[self.columns.len()..] {
            self.columns.push(self.grid.points.iter().map(|p| h.eval(p, x)).collect());
        }
        let mut means = vec![model.prior_mean(); self.grid.len()];
        for (col, w) in self.columns.iter().zip(model.weights().iter()) {
            for (m, k) in means.iter_mut().zip(col) {
                *m += w * k;
            }
        }
        let n = self.grid.len() as f64;
        let se: f64 = means.iter().zip(&self.grid.truth).map(|(m, z)| (m - z).powi(2)).sum();
        let agree = means.iter().zip(&self.grid.truth).filter(|(m, z)| (**m >= 0.0) == (**z >= 0.0)).count();
        ((se / n).sqrt(), agree as f64 / n)
    }
}
