//! Fixed-budget and adaptive trajectory safety deciders.
//!
//! All adaptive deciders accumulate draws across rounds: round `r` simulates
//! only `M_r - M_{r-1}` new trajectories. Stopping comparisons are strict.

use super::bounds::{
    borell_value, mc_lower, mc_upper, median_quantile_levels, okamoto_radius, select_quantile,
};
use super::center::center;
use super::config::{DeciderConfig, Method};
use super::source::{CenteredMaxima, MaximaSource};
use super::verdict::{Decision, Reason, SafetyVerdict};
use crate::error::{Error, Result};
use crate::gp::TrajectoryPosterior;

/// Runs the decider selected by `cfg.method`.
pub fn decide(tp: &TrajectoryPosterior, cfg: &DeciderConfig, seed: u64) -> Result<SafetyVerdict> {
    decide_posterior(cfg.method, tp, cfg, seed)
}

/// Fixed budget of `M_{R-1}` draws with the single-round radius.
pub fn mc_decide(tp: &TrajectoryPosterior, cfg: &DeciderConfig, seed: u64) -> Result<SafetyVerdict> {
    decide_posterior(Method::Mc, tp, cfg, seed)
}

/// Adaptive Monte-Carlo.
pub fn amc_decide(tp: &TrajectoryPosterior, cfg: &DeciderConfig, seed: u64) -> Result<SafetyVerdict> {
    decide_posterior(Method::Amc, tp, cfg, seed)
}

/// Adaptive Borell-TIS bound with a sampled median.
pub fn ab_decide(tp: &TrajectoryPosterior, cfg: &DeciderConfig, seed: u64) -> Result<SafetyVerdict> {
    decide_posterior(Method::Ab, tp, cfg, seed)
}

/// Hybrid: safe if either the Borell bound or the MC bound (each at `eps/2`)
/// is below `alpha`; unsafe only through the MC lower bound at `eps`.
pub fn abm_decide(tp: &TrajectoryPosterior, cfg: &DeciderConfig, seed: u64) -> Result<SafetyVerdict> {
    decide_posterior(Method::Abm, tp, cfg, seed)
}

fn decide_posterior(method: Method, tp: &TrajectoryPosterior, cfg: &DeciderConfig, seed: u64) -> Result<SafetyVerdict> {
    cfg.validate()?;
    match center(tp) {
        Ok(process) => {
            let source = CenteredMaxima::new(&process)?;
            Ok(run_decider(method, &source, process.sigma_tilde, cfg, seed))
        }
        Err(Error::MeanSignChange { .. }) => Ok(sign_change_verdict(method, cfg)),
        Err(e) => Err(e),
    }
}

/// Immediate rejection: some `mu_j <= 0`, so the unsafe probability is at least 1/2.
pub fn sign_change_verdict(method: Method, cfg: &DeciderConfig) -> SafetyVerdict {
    SafetyVerdict {
        method,
        decision: Decision::Unsafe,
        reason: Reason::MeanSignChange,
        stop_round: 0,
        samples_used: 0,
        lower_bound: 0.5,
        upper_bound: 1.0,
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
    }
}

/// Runs `method` on an arbitrary stream of centered suprema.
///
/// `sigma_tilde` is only read by the Borell arms. `cfg.method` is ignored.
pub fn run_decider(
    method: Method,
    source: &dyn MaximaSource,
    sigma_tilde: f64,
    cfg: &DeciderConfig,
    seed: u64,
) -> SafetyVerdict {
    match method {
        Method::Mc => fixed_budget(source, cfg, seed),
        _ => adaptive(method, source, sigma_tilde, cfg, seed),
    }
}

fn verdict(
    method: Method,
    cfg: &DeciderConfig,
    decision: Decision,
    reason: Reason,
    stop_round: usize,
    samples_used: usize,
    (lower, upper): (f64, f64),
) -> SafetyVerdict {
    SafetyVerdict {
        method,
        decision,
        reason,
        stop_round,
        samples_used,
        lower_bound: lower,
        upper_bound: upper,
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
    }
}

fn count_unsafe(maxima: &[f64]) -> usize {
    maxima.iter().filter(|s| **s >= 1.0).count()
}

fn fixed_budget(source: &dyn MaximaSource, cfg: &DeciderConfig, seed: u64) -> SafetyVerdict {
    let alpha = cfg.alpha;
    let m = cfg.schedule.fixed_budget();
    let draws = source.draw(m, seed, 1);
    let p_hat = count_unsafe(&draws) as f64 / m as f64;
    let c = okamoto_radius(m, 1, cfg.epsilon);
    let bounds = (mc_lower(p_hat, c, alpha), mc_upper(p_hat, c, alpha));
    let (decision, reason) = if bounds.1 < alpha {
        (Decision::Safe, Reason::BoundCrossed)
    } else if bounds.0 > alpha {
        (Decision::Unsafe, Reason::BoundCrossed)
    } else {
        (Decision::Unsafe, Reason::BudgetExhausted)
    };
    verdict(Method::Mc, cfg, decision, reason, 1, m, bounds)
}

/// Borell-TIS bounds from the current order statistics.
struct BorellRound {
    /// From `q_-`; above 1/2 whenever `q_- > 1`.
    lower: f64,
    /// From `q_+`; `None` when `q_+ >= 1`.
    upper: Option<f64>,
}

fn borell_round(
    maxima: &mut [f64],
    round: usize,
    epsilon: f64,
    sigma_tilde: f64,
    need_lower: bool,
) -> Option<BorellRound> {
    let (beta_lo, beta_hi) = median_quantile_levels(maxima.len(), round, epsilon).ok()?;
    let q_hi = select_quantile(maxima, beta_hi).ok()?;
    let upper = (q_hi < 1.0).then(|| borell_value(q_hi, sigma_tilde));
    let lower = if need_lower {
        borell_value(select_quantile(maxima, beta_lo).ok()?, sigma_tilde)
    } else {
        0.0
    };
    Some(BorellRound { lower, upper })
}

struct Step {
    lower: f64,
    upper: f64,
    safe: bool,
    unsafe_reason: Option<Reason>,
}

fn adaptive(
    method: Method,
    source: &dyn MaximaSource,
    sigma_tilde: f64,
    cfg: &DeciderConfig,
    seed: u64,
) -> SafetyVerdict {
    let alpha = cfg.alpha;
    let eps = cfg.epsilon;
    let keep_maxima = matches!(method, Method::Ab | Method::Abm);
    let mut maxima: Vec<f64> = Vec::new();
    let mut unsafe_count = 0usize;
    let mut drawn = 0usize;
    let mut bounds = (0.0, 1.0);
    let mut borell_ever_feasible = false;

    for round in 1..=cfg.schedule.rounds {
        let m_r = cfg.schedule.size(round);
        let fresh = source.draw(m_r - drawn, seed, round);
        drawn = m_r;
        unsafe_count += count_unsafe(&fresh);
        if keep_maxima {
            maxima.extend_from_slice(&fresh);
        }
        let p_hat = unsafe_count as f64 / m_r as f64;

        let step = match method {
            Method::Amc => {
                let c = okamoto_radius(m_r, round, eps);
                let (lower, upper) = (mc_lower(p_hat, c, alpha), mc_upper(p_hat, c, alpha));
                Step { lower, upper, safe: upper < alpha, unsafe_reason: (lower > alpha).then_some(Reason::BoundCrossed) }
            }
            Method::Ab => match borell_round(&mut maxima, round, eps, sigma_tilde, true) {
                Some(b) => {
                    borell_ever_feasible |= b.upper.is_some();
                    let reason = if b.upper.is_some() { Reason::BoundCrossed } else { Reason::MedianInfeasible };
                    Step {
                        lower: b.lower,
                        upper: b.upper.unwrap_or(1.0),
                        safe: b.upper.is_some_and(|u| u < alpha),
                        unsafe_reason: (b.lower > alpha).then_some(reason),
                    }
                }
                None => Step { lower: 0.0, upper: 1.0, safe: false, unsafe_reason: None },
            },
            Method::Abm => {
                let mc_up = mc_upper(p_hat, okamoto_radius(m_r, round, eps / 2.0), alpha);
                let mc_lo = mc_lower(p_hat, okamoto_radius(m_r, round, eps), alpha);
                let borell_up = borell_round(&mut maxima, round, eps / 2.0, sigma_tilde, false)
                    .and_then(|b| b.upper)
                    .unwrap_or(f64::INFINITY);
                let upper = mc_up.min(borell_up);
                Step {
                    lower: mc_lo.min(upper),
                    upper,
                    safe: upper < alpha,
                    unsafe_reason: (mc_lo > alpha).then_some(Reason::BoundCrossed),
                }
            }
            Method::Mc => unreachable!("fixed-budget MC is not adaptive"),
        };
        bounds = (step.lower, step.upper);
        if step.safe {
            return verdict(method, cfg, Decision::Safe, Reason::BoundCrossed, round, m_r, bounds);
        }
        if let Some(reason) = step.unsafe_reason {
            return verdict(method, cfg, Decision::Unsafe, reason, round, m_r, bounds);
        }
    }

    let reason = if method == Method::Ab && !borell_ever_feasible {
        Reason::MedianInfeasible
    } else {
        Reason::BudgetExhausted
    };
    let rounds = cfg.schedule.rounds;
    verdict(method, cfg, Decision::Unsafe, reason, rounds, cfg.schedule.size(rounds), bounds)
}
