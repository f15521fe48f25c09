use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use safegp::active::{run_sal, SalConfig, SalSummary};
use safegp::benchmarks::{preset, toy_trajectory_points};
use safegp::safety::calibration::{calibrate, CalibrationSummary, SyntheticGp, SyntheticProcess};
use safegp::safety::MaximaSample;
use safegp::{decide, DeciderConfig, GpModel, Method, SafetyVerdict, SamplingSchedule, TrajectoryPosterior};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult};
use crate::manifest::ManifestGuard;

fn parse_method(s: &str) -> CliResult<Method> {
    Ok(s.parse()?)
}

fn decider(method: &str, alpha: f64, epsilon: f64, rounds: usize) -> CliResult<DeciderConfig> {
    Ok(DeciderConfig::new(parse_method(method)?, alpha, epsilon, SamplingSchedule::doubling(rounds))?)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBoundsConfig {
    pub preset: String,
    pub samples: usize,
    pub points: usize,
    pub span: f64,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for CompareBoundsConfig {
    fn default() -> Self {
        Self {
            preset: "toy1d".into(),
            samples: 1_000_000,
            points: 20,
            span: 4.0,
            seed: 0,
            out: "results/compare-bounds".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareBoundsSummary {
    pub preset: String,
    pub median: f64,
    pub mean: f64,
    pub sigma_tilde: f64,
    pub samples: usize,
}

/// Empirical tail of the centered supremum on the toy trajectory next to the
/// three Borell-TIS bounds. Writes `tail_curve.csv` and `summary.json`.
pub fn cmd_compare_bounds(cfg: &CompareBoundsConfig) -> CliResult<CompareBoundsSummary> {
    if cfg.preset != "toy1d" {
        return Err(usage(format!("compare-bounds supports only the toy1d preset, not `{}`", cfg.preset)));
    }
    if cfg.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    if cfg.points == 0 || !(cfg.span.is_finite() && cfg.span > 0.0) {
        return Err(usage("--points and --span must be positive"));
    }
    let guard = ManifestGuard::begin(&cfg.out, "compare-bounds", cfg.seed, cfg, &["tail_curve.csv", "summary.json"])?;
    let bench = preset(&cfg.preset)?;
    let model = GpModel::fit_with_prior_mean(bench.hyperparams.clone(), bench.initial_data(cfg.seed), bench.prior_mean)?;
    let tp = model.trajectory_posterior(&toy_trajectory_points(bench.m))?;
    let sample = MaximaSample::draw(&tp, cfg.samples, cfg.seed)?;
    let curve = sample.curve(&sample.default_grid(cfg.points, cfg.span));
    write_csv(&cfg.out.join("tail_curve.csv"), &curve.rows)?;
    let summary = CompareBoundsSummary {
        preset: cfg.preset.clone(),
        median: curve.median,
        mean: curve.mean,
        sigma_tilde: curve.sigma_tilde,
        samples: curve.samples,
    };
    write_json(&cfg.out.join("summary.json"), &summary)?;
    guard.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSalConfig {
    pub preset: String,
    pub method: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub rounds: usize,
    pub budget: u64,
    pub seed: u64,
    /// Points per trajectory; the preset's value when absent.
    pub m: Option<usize>,
    pub candidates: usize,
    pub max_retries: usize,
    /// Size of the initial design; the preset's value when absent.
    pub initial_points: Option<usize>,
    pub out: PathBuf,
}

impl Default for RunSalConfig {
    fn default() -> Self {
        Self {
            preset: "himmelblau".into(),
            method: "AB".into(),
            alpha: 0.01,
            epsilon: 0.05,
            rounds: 10,
            budget: 5_000_000,
            seed: 0,
            m: None,
            candidates: SalConfig::DEFAULT_CANDIDATES,
            max_retries: SalConfig::DEFAULT_MAX_RETRIES,
            initial_points: None,
            out: "results/run-sal".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSalSummary {
    pub preset: String,
    pub method: Method,
    pub alpha: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub initial_rmse: f64,
    pub initial_c_h: f64,
    #[serde(flatten)]
    pub result: SalSummary,
}

/// Safe active learning on a preset. Writes `records.csv`, `records.jsonl`
/// (full records, one per line) and `summary.json`.
pub fn cmd_run_sal(cfg: &RunSalConfig) -> CliResult<RunSalSummary> {
    let mut bench = preset(&cfg.preset)?;
    if let Some(n) = cfg.initial_points {
        if n == 0 {
            return Err(usage("--initial-points must be positive"));
        }
        bench = bench.with_initial_count(n);
    }
    let decider = decider(&cfg.method, cfg.alpha, cfg.epsilon, cfg.rounds)?;
    let mut sal = SalConfig::for_benchmark(&bench, decider, cfg.budget, cfg.seed);
    sal.m = cfg.m.unwrap_or(bench.m);
    sal.candidate_count = cfg.candidates;
    sal.max_retries = cfg.max_retries;
    sal.validate()?;

    let guard = ManifestGuard::begin(
        &cfg.out,
        "run-sal",
        cfg.seed,
        cfg,
        &["records.csv", "records.jsonl", "summary.json"],
    )?;
    let run = run_sal(&bench, &sal, bench.initial_data(cfg.seed))?;
    let rows: Vec<_> = run.records.iter().map(|r| r.row()).collect();
    write_csv(&cfg.out.join("records.csv"), &rows)?;
    let mut jsonl = BufWriter::new(File::create(cfg.out.join("records.jsonl"))?);
    for record in &run.records {
        serde_json::to_writer(&mut jsonl, record)?;
        jsonl.write_all(b"\n")?;
    }
    jsonl.flush()?;
    let summary = RunSalSummary {
        preset: bench.name.to_string(),
        method: decider.method,
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        initial_rmse: run.initial_rmse,
        initial_c_h: run.initial_health_coverage,
        result: run.summary(),
    };
    write_json(&cfg.out.join("summary.json"), &summary)?;
    guard.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub method: String,
    /// `bernoulli` (indicator stream with P* = p_true) or `gaussian`
    /// (centered process whose Borell bound P-dagger equals p_true).
    pub process: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub rounds: usize,
    pub p_true: f64,
    pub runs: usize,
    /// Draws used to pin the median and P* of the gaussian process.
    pub oracle_samples: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            method: "AMC".into(),
            process: "bernoulli".into(),
            alpha: 0.01,
            epsilon: 0.05,
            rounds: 12,
            p_true: 0.02,
            runs: 1000,
            oracle_samples: 1_000_000,
            seed: 0,
            out: "results/calibrate".into(),
        }
    }
}

/// Repeated decisions on a synthetic process with known truth. Writes
/// `runs.csv` and `summary.json`.
pub fn cmd_calibrate(cfg: &CalibrateConfig) -> CliResult<CalibrationSummary> {
    if cfg.runs == 0 {
        return Err(usage("--runs must be positive"));
    }
    let dc = decider(&cfg.method, cfg.alpha, cfg.epsilon, cfg.rounds)?;
    let process = match cfg.process.as_str() {
        "bernoulli" => SyntheticProcess::Bernoulli { p: cfg.p_true },
        "gaussian" => {
            if cfg.oracle_samples == 0 {
                return Err(usage("--oracle-samples must be positive"));
            }
            SyntheticProcess::CenteredGp(SyntheticGp::with_borell_bound(cfg.p_true, cfg.oracle_samples, cfg.seed)?)
        }
        other => return Err(usage(format!("unknown process `{other}` (expected bernoulli or gaussian)"))),
    };
    process.protected_truth(dc.method)?;
    let guard = ManifestGuard::begin(&cfg.out, "calibrate", cfg.seed, cfg, &["runs.csv", "summary.json"])?;
    let report = calibrate(dc.method, &dc, &process, cfg.runs, cfg.seed)?;
    write_csv(&cfg.out.join("runs.csv"), &report.runs)?;
    write_json(&cfg.out.join("summary.json"), &report.summary)?;
    guard.finish()?;
    Ok(report.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    /// JSON file `{"mean": [..], "cov": [[..], ..]}`.
    pub input: PathBuf,
    pub method: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub rounds: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            input: "posterior.json".into(),
            method: "ABM".into(),
            alpha: 0.01,
            epsilon: 0.05,
            rounds: 10,
            seed: 0,
            out: "results/evaluate".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorInput {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl PosteriorInput {
    pub fn into_posterior(self) -> CliResult<TrajectoryPosterior> {
        let n = self.mean.len();
        if self.cov.len() != n || self.cov.iter().any(|row| row.len() != n) {
            return Err(usage(format!("covariance must be {n} x {n}")));
        }
        let cov = DMatrix::from_fn(n, n, |i, j| self.cov[i][j]);
        Ok(TrajectoryPosterior::from_moments(DVector::from_vec(self.mean), cov)?)
    }
}

/// Safety verdict for a single posterior given by its moments. Writes `verdict.json`.
pub fn cmd_evaluate(cfg: &EvaluateConfig) -> CliResult<SafetyVerdict> {
    let dc = decider(&cfg.method, cfg.alpha, cfg.epsilon, cfg.rounds)?;
    let text = std::fs::read_to_string(&cfg.input)
        .map_err(|e| usage(format!("cannot read {}: {e}", cfg.input.display())))?;
    let input: PosteriorInput =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid posterior JSON: {e}")))?;
    let tp = input.into_posterior()?;
    let guard = ManifestGuard::begin(&cfg.out, "evaluate", cfg.seed, cfg, &["verdict.json"])?;
    let verdict = decide(&tp, &dc, cfg.seed)?;
    write_json(&cfg.out.join("verdict.json"), &verdict)?;
    guard.finish()?;
    Ok(verdict)
}
