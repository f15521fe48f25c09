use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trajectory::{generate_candidates, Domain, Trajectory};
use crate::benchmarks::{Benchmark, EvalGrid, GridTracker};
use crate::error::{invalid, Result};
use crate::gp::{Dataset, GpModel};
use crate::rng;
use crate::safety::{decide, DeciderConfig, Reason, SafetyVerdict};

/// Heuristic unsafety assigned to a candidate rejected for a sign change:
/// `0.5 + ||max(mu, 0)||_2`.
pub fn penalty_unsafe(mu: &[f64]) -> f64 {
    0.5 + mu.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt()
}

/// Which points of an accepted trajectory are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureMode {
    EndpointOnly,
    AllPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalConfig {
    pub decider: DeciderConfig,
    pub domain: Domain,
    /// Points per trajectory.
    pub m: usize,
    pub candidate_count: usize,
    /// Total simulated trajectories the run may spend on safety decisions.
    pub total_sample_budget: u64,
    pub measure_mode: MeasureMode,
    pub seed: u64,
    /// Consecutive iterations without a safe candidate before the run stops.
    pub max_retries: usize,
}

impl SalConfig {
    pub const DEFAULT_CANDIDATES: usize = 300;
    pub const DEFAULT_MAX_RETRIES: usize = 10;

    /// Configuration taking domain, discretization and measurement mode from a benchmark.
    pub fn for_benchmark(bench: &Benchmark, decider: DeciderConfig, total_sample_budget: u64, seed: u64) -> Self {
        Self {
            decider,
            domain: bench.domain.clone(),
            m: bench.m,
            candidate_count: Self::DEFAULT_CANDIDATES,
            total_sample_budget,
            measure_mode: bench.measure_mode,
            seed,
            max_retries: Self::DEFAULT_MAX_RETRIES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.decider.validate()?;
        if self.candidate_count == 0 {
            return Err(invalid("candidate_count must be at least 1"));
        }
        if self.m == 0 {
            return Err(invalid("trajectories need at least one point"));
        }
        Ok(())
    }
}

/// A candidate evaluated during acquisition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    /// Position in the generated candidate list.
    pub index: usize,
    /// Posterior standard deviation at the endpoint.
    pub endpoint_std: f64,
    pub verdict: SafetyVerdict,
    /// Logged for sign-change rejections only.
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Acquisition {
    /// Index of the accepted candidate.
    pub chosen: Option<usize>,
    /// Evaluated candidates, in ranked order.
    pub evaluated: Vec<CandidateVerdict>,
    pub samples_charged: u64,
    /// A verdict would have overrun the budget; it was discarded.
    pub budget_exhausted: bool,
}

impl Acquisition {
    pub fn chosen_verdict(&self) -> Option<&CandidateVerdict> {
        self.chosen.and_then(|c| self.evaluated.iter().find(|v| v.index == c))
    }
}

/// Screens candidates by decreasing endpoint uncertainty and accepts the
/// first one judged safe.
///
/// Every verdict's draws are charged against `budget`; a verdict that needs
/// more than what remains is discarded and acquisition stops. Candidates are
/// evaluated speculatively in parallel batches with per-candidate seeds, so
/// the outcome equals that of a sequential scan.
pub fn acquire(model: &GpModel, candidates: &[Trajectory], cfg: &SalConfig, budget: u64, seed: u64) -> Result<Acquisition> {
    if candidates.is_empty() {
        return Err(invalid("acquisition needs at least one candidate"));
    }
    let mut ranked: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, t)| Ok((i, model.variance(&t.end)?.max(0.0).sqrt())))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut out = Acquisition { chosen: None, evaluated: Vec::new(), samples_charged: 0, budget_exhausted: false };
    let batch = rayon::current_num_threads().max(1);
    for group in ranked.chunks(batch) {
        let results: Vec<Result<CandidateVerdict>> = group
            .par_iter()
            .map(|&(index, endpoint_std)| {
                let tp = model.trajectory_posterior(&candidates[index].points)?;
                let verdict = decide(&tp, &cfg.decider, rng::derive_seed(seed, "candidate", &[index as u64]))?;
                let penalty = (verdict.reason == Reason::MeanSignChange).then(|| penalty_unsafe(tp.mean().as_slice()));
                Ok(CandidateVerdict { index, endpoint_std, verdict, penalty })
            })
            .collect();
        for r in results {
            let cv = r?;
            let cost = cv.verdict.samples_used as u64;
            if out.samples_charged + cost > budget {
                out.samples_charged = budget;
                out.budget_exhausted = true;
                return Ok(out);
            }
            out.samples_charged += cost;
            let safe = cv.verdict.is_safe();
            let index = cv.index;
            out.evaluated.push(cv);
            if safe {
                out.chosen = Some(index);
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// One accepted trajectory and the state of the model after measuring it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// Number of successful measurements so far, starting at 1.
    pub iteration: usize,
    /// Acquisition attempts so far, including failed ones.
    pub attempt: usize,
    pub trajectory: Trajectory,
    pub verdict: SafetyVerdict,
    /// Posterior standard deviation at the endpoint before measuring.
    pub acquisition_value: f64,
    pub candidates_evaluated: usize,
    pub sign_change_rejections: usize,
    pub measured_inputs: Vec<Vec<f64>>,
    pub measured_outputs: Vec<f64>,
    /// Ground-truth values at the measured inputs.
    pub ground_truth: Vec<f64>,
    pub cumulative_samples: u64,
    /// Measured points with negative ground truth, cumulative.
    pub cumulative_unsafe: usize,
    pub rmse: f64,
    pub health_coverage: f64,
}

/// Flat per-iteration row for tabular output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub iteration: usize,
    pub attempt: usize,
    pub start: String,
    pub end: String,
    pub method: String,
    pub decision: String,
    pub reason: String,
    pub stop_round: usize,
    pub samples_used: usize,
    pub p_lower: f64,
    pub p_upper: f64,
    pub acquisition_value: f64,
    pub candidates_evaluated: usize,
    pub cumulative_samples: u64,
    pub cumulative_unsafe: usize,
    pub rmse: f64,
    pub health_coverage: f64,
}

fn join(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";")
}

impl ExperimentRecord {
    pub fn row(&self) -> RecordRow {
        let v = &self.verdict;
        RecordRow {
            iteration: self.iteration,
            attempt: self.attempt,
            start: join(&self.trajectory.start),
            end: join(&self.trajectory.end),
            method: v.method.to_string(),
            decision: format!("{:?}", v.decision),
            reason: format!("{:?}", v.reason),
            stop_round: v.stop_round,
            samples_used: v.samples_used,
            p_lower: v.lower_bound,
            p_upper: v.upper_bound,
            acquisition_value: self.acquisition_value,
            candidates_evaluated: self.candidates_evaluated,
            cumulative_samples: self.cumulative_samples,
            cumulative_unsafe: self.cumulative_unsafe,
            rmse: self.rmse,
            health_coverage: self.health_coverage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    BudgetExhausted,
    NoSafeCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalRun {
    pub records: Vec<ExperimentRecord>,
    pub stop_reason: StopReason,
    pub attempts: usize,
    pub samples_used: u64,
    /// Largest sample count of any charged verdict.
    pub largest_verdict_samples: usize,
    pub initial_rmse: f64,
    pub initial_health_coverage: f64,
}

impl SalRun {
    /// Successful measurements.
    pub fn n_sal(&self) -> usize {
        self.records.len()
    }

    /// Measured points whose ground truth is unsafe.
    pub fn n_f(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_unsafe)
    }

    pub fn final_rmse(&self) -> f64 {
        self.records.last().map_or(self.initial_rmse, |r| r.rmse)
    }

    pub fn final_health_coverage(&self) -> f64 {
        self.records.last().map_or(self.initial_health_coverage, |r| r.health_coverage)
    }

    pub fn summary(&self) -> SalSummary {
        SalSummary {
            n_sal: self.n_sal(),
            final_rmse: self.final_rmse(),
            final_health_coverage: self.final_health_coverage(),
            n_f: self.n_f(),
            samples_used: self.samples_used,
            attempts: self.attempts,
            stop_reason: self.stop_reason,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalSummary {
    #[serde(rename = "n_SAL")]
    pub n_sal: usize,
    pub final_rmse: f64,
    #[serde(rename = "final_c_h")]
    pub final_health_coverage: f64,
    pub n_f: usize,
    pub samples_used: u64,
    pub attempts: usize,
    pub stop_reason: StopReason,
}

/// Safe active learning on `bench` starting from `initial`.
///
/// Each iteration ramps from the last measured endpoint to random candidate
/// endpoints, accepts the most uncertain candidate judged safe, measures it
/// with additive Gaussian noise and conditions the GP on the new data with fixed hyperparameters.
pub fn run_sal(bench: &Benchmark, cfg: &SalConfig, initial: Dataset) -> Result<SalRun> {
    run_sal_on_grid(bench, cfg, initial, &bench.eval_grid())
}

/// [`run_sal`] with an explicit metric grid.
pub fn run_sal_on_grid(bench: &Benchmark, cfg: &SalConfig, initial: Dataset, grid: &EvalGrid) -> Result<SalRun> {
    cfg.validate()?;
    initial.validate(Some(cfg.domain.dim()))?;
    let Some(mut current) = initial.inputs.last().cloned() else {
        return Err(invalid("initial data must not be empty"));
    };
    if initial.inputs.iter().any(|x| bench.truth(x) < 0.0) {
        return Err(invalid("initial data contains a point that is unsafe under the ground truth"));
    }
    cfg.domain.clamp(&mut current);

    let mut model = GpModel::fit_with_prior_mean(bench.hyperparams.clone(), initial, bench.prior_mean)?;
    let mut tracker = GridTracker::new(grid);
    let (initial_rmse, initial_health_coverage) = tracker.metrics(&model);
    let mut run = SalRun {
        records: Vec::new(),
        stop_reason: StopReason::BudgetExhausted,
        attempts: 0,
        samples_used: 0,
        largest_verdict_samples: 0,
        initial_rmse,
        initial_health_coverage,
    };
    let mut noise = rng::stream(cfg.seed, "measurement-noise", &[]);
    let mut failures = 0usize;
    let mut unsafe_measured = 0usize;

    while run.samples_used < cfg.total_sample_budget {
        let attempt = run.attempts as u64;
        run.attempts += 1;
        let candidates = generate_candidates(
            &current,
            &cfg.domain,
            cfg.candidate_count,
            cfg.m,
            rng::derive_seed(cfg.seed, "candidate-set", &[attempt]),
        )?;
        let remaining = cfg.total_sample_budget - run.samples_used;
        let acq = acquire(&model, &candidates, cfg, remaining, rng::derive_seed(cfg.seed, "acquire", &[attempt]))?;
        run.samples_used += acq.samples_charged;
        for c in &acq.evaluated {
            run.largest_verdict_samples = run.largest_verdict_samples.max(c.verdict.samples_used);
        }
        if acq.budget_exhausted {
            run.stop_reason = StopReason::BudgetExhausted;
            break;
        }
        let Some(chosen) = acq.chosen_verdict().cloned() else {
            failures += 1;
            if failures >= cfg.max_retries {
                run.stop_reason = StopReason::NoSafeCandidate;
                break;
            }
            continue;
        };
        failures = 0;

        let trajectory = candidates[chosen.index].clone();
        let inputs: Vec<Vec<f64>> = match cfg.measure_mode {
            MeasureMode::EndpointOnly => vec![trajectory.end.clone()],
            MeasureMode::AllPoints => trajectory.points.clone(),
        };
        let truth: Vec<f64> = inputs.iter().map(|x| bench.truth(x)).collect();
        let outputs: Vec<f64> = inputs.iter().map(|x| bench.measure(x, &mut noise)).collect();
        unsafe_measured += truth.iter().filter(|z| **z < 0.0).count();

        for (x, y) in inputs.iter().zip(&outputs) {
            model = model.condition_on(x.clone(), *y)?;
        }
        current = trajectory.end.clone();
        let (rmse, health_coverage) = tracker.metrics(&model);

        run.records.push(ExperimentRecord {
            iteration: run.records.len() + 1,
            attempt: run.attempts,
            acquisition_value: chosen.endpoint_std,
            verdict: chosen.verdict,
            candidates_evaluated: acq.evaluated.len(),
            sign_change_rejections: acq.evaluated.iter().filter(|c| c.penalty.is_some()).count(),
            trajectory,
            measured_inputs: inputs,
            measured_outputs: outputs,
            ground_truth: truth,
            cumulative_samples: run.samples_used,
            cumulative_unsafe: unsafe_measured,
            rmse,
            health_coverage,
        });
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{himmelblau_preset, InitialDesign};
    use crate::gp::Hyperparams;
    use crate::safety::{Decision, Method, SamplingSchedule};

    #[test]
    fn penalty_values() {
        assert_eq!(penalty_unsafe(&[-1.0, -2.0]), 0.5);
        assert_eq!(penalty_unsafe(&[3.0, -4.0]), 3.5);
        assert_eq!(penalty_unsafe(&[0.0, 0.0, 0.0]), 0.5);
    }

    fn decider(method: Method) -> DeciderConfig {
        DeciderConfig::new(method, 0.01, 0.05, SamplingSchedule::doubling(10)).unwrap()
    }

    fn positive_bench() -> Benchmark {
        Benchmark {
            name: "constant",
            ground_truth: |_| 1.0,
            domain: Domain::cube(0.0, 1.0, 1).unwrap(),
            noise_std: 1e-6,
            hyperparams: Hyperparams::new(1.0, vec![0.3], 1e-6).unwrap(),
            prior_mean: 1.0,
            m: 4,
            grid_resolution: 20,
            measure_mode: MeasureMode::EndpointOnly,
            initial: InitialDesign::Fixed(vec![vec![0.5]]),
        }
    }

    fn sal_cfg(bench: &Benchmark, method: Method, budget: u64) -> SalConfig {
        SalConfig { candidate_count: 5, ..SalConfig::for_benchmark(bench, decider(method), budget, 11) }
    }

    #[test]
    fn single_deterministic_candidate_is_chosen() {
        let bench = positive_bench();
        let model = GpModel::fit_with_prior_mean(bench.hyperparams.clone(), bench.initial_data(0), 1.0).unwrap();
        let t = Trajectory::ramp(vec![0.5], vec![0.5], 1).unwrap();
        let cfg = sal_cfg(&bench, Method::Ab, 1_000_000);
        let acq = acquire(&model, &[t], &cfg, u64::MAX, 1).unwrap();
        assert_eq!(acq.chosen, Some(0));
        assert_eq!(acq.evaluated[0].verdict.decision, Decision::Safe);
    }

    #[test]
    fn higher_variance_safe_candidate_wins() {
        let bench = positive_bench();
        let data = Dataset::new(vec![vec![0.5]], vec![10.0]).unwrap();
        let model = GpModel::fit_with_prior_mean(bench.hyperparams.clone(), data, 10.0).unwrap();
        let near = Trajectory::ramp(vec![0.5], vec![0.55], 2).unwrap();
        let far = Trajectory::ramp(vec![0.5], vec![0.9], 2).unwrap();
        let cfg = sal_cfg(&bench, Method::Amc, 1_000_000);
        assert!(model.variance(&[0.9]).unwrap() > model.variance(&[0.55]).unwrap());
        let acq = acquire(&model, &[near, far], &cfg, u64::MAX, 1).unwrap();
        assert_eq!(acq.chosen, Some(1));
        assert_eq!(acq.evaluated.len(), 1);
    }

    #[test]
    fn sign_changes_are_rejected_for_free() {
        let bench = positive_bench();
        let data = Dataset::new(vec![vec![0.5]], vec![-1.0]).unwrap();
        let model = GpModel::fit(bench.hyperparams.clone(), data).unwrap();
        let cands = generate_candidates(&[0.5], &bench.domain, 6, 3, 2).unwrap();
        let acq = acquire(&model, &cands, &sal_cfg(&bench, Method::Ab, 10), 10, 1).unwrap();
        assert_eq!(acq.chosen, None);
        assert_eq!(acq.samples_charged, 0);
        assert_eq!(acq.evaluated.len(), 6);
        assert!(acq.evaluated.iter().all(|c| c.penalty.is_some()));
    }

    #[test]
    fn overrunning_verdict_exhausts_the_budget() {
        let bench = positive_bench();
        let model = GpModel::fit_with_prior_mean(bench.hyperparams.clone(), bench.initial_data(0), 1.0).unwrap();
        let cands = generate_candidates(&[0.5], &bench.domain, 3, 3, 2).unwrap();
        let acq = acquire(&model, &cands, &sal_cfg(&bench, Method::Mc, 10), 10, 1).unwrap();
        assert!(acq.budget_exhausted);
        assert_eq!(acq.chosen, None);
        assert_eq!(acq.samples_charged, 10);
    }

    #[test]
    fn zero_budget_gives_an_empty_log() {
        let bench = positive_bench();
        let run = run_sal(&bench, &sal_cfg(&bench, Method::Ab, 0), bench.initial_data(0)).unwrap();
        assert!(run.records.is_empty());
        assert_eq!(run.samples_used, 0);
    }

    #[test]
    fn constant_safe_oracle_measures_every_iteration() {
        let bench = positive_bench();
        let run = run_sal(&bench, &sal_cfg(&bench, Method::Ab, 20_000), bench.initial_data(0)).unwrap();
        assert!(run.n_sal() > 5);
        assert_eq!(run.stop_reason, StopReason::BudgetExhausted);
        assert!(run.attempts - run.n_sal() <= 1);
        assert_eq!(run.n_f(), 0);
        assert!(run.records.windows(2).all(|w| w[0].cumulative_samples <= w[1].cumulative_samples));
        assert!(run.samples_used <= 20_000);
    }

    #[test]
    fn himmelblau_smoke_is_reproducible() {
        let bench = himmelblau_preset();
        let cfg = sal_cfg(&bench, Method::Abm, 50_000);
        let grid = bench.eval_grid_with(20);
        let a = run_sal_on_grid(&bench, &cfg, bench.initial_data(1), &grid).unwrap();
        let b = run_sal_on_grid(&bench, &cfg, bench.initial_data(1), &grid).unwrap();
        assert_eq!(a, b);
        for r in &a.records {
            assert!(r.verdict.is_safe());
            assert_eq!(r.measured_inputs, vec![r.trajectory.end.clone()]);
        }
    }

    #[test]
    fn rejects_unsafe_initial_data() {
        let bench = himmelblau_preset();
        let data = Dataset::new(vec![vec![3.0, 2.0]], vec![-0.5]).unwrap();
        assert!(run_sal(&bench, &sal_cfg(&bench, Method::Ab, 10), data).is_err());
    }
}
