//! Empirical error rates of the deciders against synthetic processes whose
//! unsafe probability is known.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::empirical_quantile;
use super::center::CenteredProcess;
use super::config::{DeciderConfig, Method};
use super::deciders::run_decider;
use super::source::{BernoulliIndicator, CenteredMaxima, MaximaSource};
use super::verdict::{Decision, Reason};
use crate::error::{invalid, Result};
use crate::gp::std_normal_quantile;
use crate::rng;

/// Centered Gaussian process on a few points, scaled so that its Borell-TIS
/// bound `1 - Phi((1 - median) / sigma)` hits a prescribed value.
#[derive(Debug, Clone)]
pub struct SyntheticGp {
    source: CenteredMaxima,
    pub sigma_tilde: f64,
    /// Borell-TIS bound computed from the oracle median.
    pub p_dagger: f64,
    /// Oracle estimate of `P(sup X >= 1)`.
    pub p_star: f64,
    /// Oracle median of the supremum.
    pub median: f64,
}

/// Points of the synthetic process.
const SYNTHETIC_POINTS: usize = 5;
const SYNTHETIC_LENGTHSCALE: f64 = 0.5;

impl SyntheticGp {
    pub fn with_borell_bound(p_dagger: f64, oracle_samples: usize, seed: u64) -> Result<Self> {
        if !(p_dagger > 0.0 && p_dagger < 0.5) {
            return Err(invalid("target bound must lie in (0, 1/2)"));
        }
        if oracle_samples < 2 {
            return Err(invalid("oracle needs at least two samples"));
        }
        let m = SYNTHETIC_POINTS;
        let unit_cov = DMatrix::from_fn(m, m, |i, j| {
            let d = (i as f64 - j as f64) / (m - 1) as f64;
            (-0.5 * (d / SYNTHETIC_LENGTHSCALE).powi(2)).exp()
        });
        let unit = CenteredMaxima::new(&CenteredProcess::from_cov(unit_cov.clone()))?;
        let unit_median =
            empirical_quantile(&unit.draw(oracle_samples, rng::derive_seed(seed, "oracle-median", &[]), 1), 0.5)?;
        // Scaling by sigma scales the median too, so the bound is
        // 1 - Phi(1/sigma - unit_median).
        let sigma = 1.0 / (std_normal_quantile(1.0 - p_dagger) + unit_median);
        let tail = unit.draw(oracle_samples, rng::derive_seed(seed, "oracle-tail", &[]), 1);
        let p_star = tail.iter().filter(|s| **s * sigma >= 1.0).count() as f64 / oracle_samples as f64;
        let source = CenteredMaxima::new(&CenteredProcess::from_cov(unit_cov * (sigma * sigma)))?;
        Ok(Self { source, sigma_tilde: sigma, p_dagger, p_star, median: unit_median * sigma })
    }
}

impl MaximaSource for SyntheticGp {
    fn draw(&self, count: usize, seed: u64, round: usize) -> Vec<f64> {
        self.source.draw(count, seed, round)
    }
}

#[derive(Debug, Clone)]
pub enum SyntheticProcess {
    /// Indicator stream with `P* = p`.
    Bernoulli { p: f64 },
    CenteredGp(SyntheticGp),
}

impl SyntheticProcess {
    pub fn name(&self) -> &'static str {
        match self {
            SyntheticProcess::Bernoulli { .. } => "bernoulli",
            SyntheticProcess::CenteredGp(_) => "gaussian",
        }
    }

    /// The probability whose comparison with `alpha` the method's guarantee is about:
    /// the Borell bound for AB, the unsafe probability otherwise.
    pub fn protected_truth(&self, method: Method) -> Result<f64> {
        match (self, method) {
            (SyntheticProcess::Bernoulli { .. }, Method::Ab) => {
                Err(invalid("the AB decider needs a Gaussian process, not an indicator stream"))
            }
            (SyntheticProcess::Bernoulli { p }, _) => Ok(*p),
            (SyntheticProcess::CenteredGp(gp), Method::Ab) => Ok(gp.p_dagger),
            (SyntheticProcess::CenteredGp(gp), _) => Ok(gp.p_star),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRun {
    pub run: usize,
    pub decision: Decision,
    pub reason: Reason,
    pub stop_round: usize,
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub method: Method,
    pub process: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub rounds: usize,
    pub runs: usize,
    /// Unsafe probability (or Borell bound for AB) the error rates refer to.
    pub protected_truth: f64,
    pub p_star: f64,
    pub p_dagger: Option<f64>,
    pub safe_rate: f64,
    pub unsafe_rate: f64,
    /// Fraction of Safe verdicts when the protected truth is at least alpha.
    pub false_safe_rate: Option<f64>,
    /// Fraction of Unsafe verdicts when the protected truth is at most alpha.
    pub false_unsafe_rate: Option<f64>,
    /// Unsafe verdicts that came from a crossed bound (excludes budget exhaustion).
    pub bound_unsafe_rate: f64,
    pub mean_samples: f64,
    pub mean_stop_round: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub summary: CalibrationSummary,
    /// Sorted by run index.
    pub runs: Vec<CalibrationRun>,
}

/// Runs `method` `runs` times against `process`, each run on its own derived seed.
pub fn calibrate(
    method: Method,
    cfg: &DeciderConfig,
    process: &SyntheticProcess,
    runs: usize,
    seed: u64,
) -> Result<CalibrationReport> {
    cfg.validate()?;
    if runs == 0 {
        return Err(invalid("at least one run is required"));
    }
    let truth = process.protected_truth(method)?;
    let bernoulli;
    let (source, sigma_tilde): (&dyn MaximaSource, f64) = match process {
        SyntheticProcess::Bernoulli { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(invalid("p must lie in [0, 1]"));
            }
            bernoulli = BernoulliIndicator { p: *p };
            (&bernoulli, 1.0)
        }
        SyntheticProcess::CenteredGp(gp) => (gp, gp.sigma_tilde),
    };
    let results: Vec<CalibrationRun> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let run_seed = rng::derive_seed(seed, "calibration-run", &[run as u64]);
            let v = run_decider(method, source, sigma_tilde, cfg, run_seed);
            CalibrationRun {
                run,
                decision: v.decision,
                reason: v.reason,
                stop_round: v.stop_round,
                samples_used: v.samples_used,
            }
        })
        .collect();

    let n = runs as f64;
    let frac = |f: &dyn Fn(&CalibrationRun) -> bool| results.iter().filter(|r| f(r)).count() as f64 / n;
    let safe_rate = frac(&|r| r.decision == Decision::Safe);
    let unsafe_rate = 1.0 - safe_rate;
    let (p_star, p_dagger) = match process {
        SyntheticProcess::Bernoulli { p } => (*p, None),
        SyntheticProcess::CenteredGp(gp) => (gp.p_star, Some(gp.p_dagger)),
    };
    let summary = CalibrationSummary {
        method,
        process: process.name().to_string(),
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        rounds: cfg.schedule.rounds,
        runs,
        protected_truth: truth,
        p_star,
        p_dagger,
        safe_rate,
        unsafe_rate,
        false_safe_rate: (truth >= cfg.alpha).then_some(safe_rate),
        false_unsafe_rate: (truth <= cfg.alpha).then_some(unsafe_rate),
        bound_unsafe_rate: frac(&|r| r.decision == Decision::Unsafe && r.reason == Reason::BoundCrossed),
        mean_samples: results.iter().map(|r| r.samples_used as f64).sum::<f64>() / n,
        mean_stop_round: results.iter().map(|r| r.stop_round as f64).sum::<f64>() / n,
    };
    Ok(CalibrationReport { summary, runs: results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::std_normal_sf;
    use crate::safety::config::SamplingSchedule;

    #[test]
    fn synthetic_gp_hits_target_bound() {
        let gp = SyntheticGp::with_borell_bound(0.02, 200_000, 1).unwrap();
        let bound = std_normal_sf((1.0 - gp.median) / gp.sigma_tilde);
        assert!((bound - 0.02).abs() < 1e-9);
        // The Borell bound dominates the true tail.
        assert!(gp.p_star <= gp.p_dagger);
        assert!(gp.p_star > 0.0);
    }

    #[test]
    fn zero_probability_stream_is_always_safe() {
        let cfg = DeciderConfig::new(Method::Amc, 0.05, 0.05, SamplingSchedule::doubling(12)).unwrap();
        let rep = calibrate(Method::Amc, &cfg, &SyntheticProcess::Bernoulli { p: 0.0 }, 50, 3).unwrap();
        assert_eq!(rep.summary.safe_rate, 1.0);
        assert!(rep.runs.iter().all(|r| r.stop_round == 2));
        assert_eq!(rep.summary.false_unsafe_rate, Some(0.0));
        assert_eq!(rep.summary.false_safe_rate, None);
    }

    #[test]
    fn runs_are_sorted_and_reproducible() {
        let cfg = DeciderConfig::new(Method::Amc, 0.01, 0.05, SamplingSchedule::doubling(8)).unwrap();
        let p = SyntheticProcess::Bernoulli { p: 0.02 };
        let a = calibrate(Method::Amc, &cfg, &p, 64, 11).unwrap();
        let b = calibrate(Method::Amc, &cfg, &p, 64, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.runs.iter().enumerate().all(|(i, r)| r.run == i));
    }

    #[test]
    fn ab_rejects_indicator_streams() {
        let cfg = DeciderConfig::new(Method::Ab, 0.01, 0.05, SamplingSchedule::doubling(8)).unwrap();
        assert!(calibrate(Method::Ab, &cfg, &SyntheticProcess::Bernoulli { p: 0.02 }, 5, 1).is_err());
        assert!(calibrate(Method::Amc, &cfg, &SyntheticProcess::Bernoulli { p: 0.02 }, 0, 1).is_err());
    }
}
