//! Confidence radii, median quantile levels, order statistics and the
//! Borell-TIS tail bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::center::DETERMINISTIC_SIGMA;
use crate::error::{invalid, Error, Result};
use crate::gp::{std_normal_quantile, std_normal_sf};

/// Per-round error share `6 eps / (pi^2 r^2)`; sums to `eps` over all rounds.
pub fn round_error_share(round: usize, epsilon: f64) -> f64 {
    6.0 * epsilon / (PI * PI * (round as f64).powi(2))
}

/// Anytime-valid radius `c_r = sqrt(2 / M_r * |log(6 eps / (pi^2 r^2))|)`.
pub fn okamoto_radius(samples: usize, round: usize, epsilon: f64) -> f64 {
    (2.0 / samples as f64 * round_error_share(round, epsilon).ln().abs()).sqrt()
}

/// Upper confidence bound `P + sqrt(alpha (1 - alpha)) c`, used to conclude safety.
pub fn mc_upper(p_hat: f64, radius: f64, alpha: f64) -> f64 {
    p_hat + (alpha * (1.0 - alpha)).sqrt() * radius
}

/// Lower confidence bound `P - c^2/4 - c sqrt(alpha)`, used to conclude unsafety.
pub fn mc_lower(p_hat: f64, radius: f64, alpha: f64) -> f64 {
    p_hat - radius * radius / 4.0 - radius * alpha.sqrt()
}

/// Quantile levels `beta_-, beta_+ = 1/2 -+ Phi^{-1}(chi) / sqrt(4M)` whose
/// order statistics bracket the median with one-sided confidence
/// `chi = 1 - 6 eps / (pi^2 r^2)` each.
///
/// Fails with [`Error::InsufficientSamples`] when `beta_+ >= 1` or
/// `floor(M beta_-) < 1`.
pub fn median_quantile_levels(samples: usize, round: usize, epsilon: f64) -> Result<(f64, f64)> {
    if samples == 0 || round == 0 {
        return Err(invalid("sample count and round must be positive"));
    }
    let chi = 1.0 - round_error_share(round, epsilon);
    if !(chi > 0.5 && chi < 1.0) {
        return Err(invalid(format!("confidence level {chi} outside (1/2, 1)")));
    }
    let half_width = std_normal_quantile(chi) / (4.0 * samples as f64).sqrt();
    let lower = 0.5 - half_width;
    let upper = 0.5 + half_width;
    if upper >= 1.0 || lower <= 0.0 || order_index(samples, lower) < 1 {
        return Err(Error::InsufficientSamples);
    }
    Ok((lower, upper))
}

fn order_index(len: usize, level: f64) -> usize {
    (len as f64 * level).floor() as usize
}

/// The `floor(M beta)`-th smallest sample (1-based).
pub fn empirical_quantile(samples: &[f64], level: f64) -> Result<f64> {
    let mut v = samples.to_vec();
    select_quantile(&mut v, level)
}

/// As [`empirical_quantile`] but reorders `samples` in place.
pub(crate) fn select_quantile(samples: &mut [f64], level: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&level) {
        return Err(invalid(format!("quantile level {level} outside [0, 1]")));
    }
    let k = order_index(samples.len(), level);
    if k < 1 {
        return Err(Error::InsufficientSamples);
    }
    let (_, v, _) = samples.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*v)
}

/// Which Borell-TIS tail bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailBound {
    /// `1 - Phi(u / sigma)`, shift by the median.
    B1,
    /// `exp(-u^2 / (2 sigma^2)) / 2`, shift by the median.
    B2,
    /// `exp(-u^2 / (2 sigma^2))`, shift by the mean.
    B3,
}

/// Bound on `P(sup X > u + shift)` for a centered GP with maximal standard deviation `sigma`.
pub fn borell_tail(u: f64, sigma: f64, kind: TailBound) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(invalid(format!("tail offset must be non-negative, got {u}")));
    }
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let gauss = (-0.5 * (u / sigma).powi(2)).exp();
    Ok(match kind {
        TailBound::B1 => std_normal_sf(u / sigma),
        TailBound::B2 => 0.5 * gauss,
        TailBound::B3 => gauss,
    })
}

/// Upper bound `1 - Phi((1 - q) / sigma_tilde)` on the unsafe probability,
/// with `q` an estimate of the median of the centered supremum.
///
/// `q > 1` is [`Error::MedianInfeasible`]. A deterministic process
/// (`sigma_tilde < 1e-12`) gives 0 for `q < 1`.
pub fn borell_point_bound(q_med: f64, sigma_tilde: f64) -> Result<f64> {
    if q_med > 1.0 {
        return Err(Error::MedianInfeasible(q_med));
    }
    if !(sigma_tilde >= 0.0) {
        return Err(invalid("sigma_tilde must be non-negative"));
    }
    Ok(borell_value(q_med, sigma_tilde))
}

/// `1 - Phi((1 - q) / sigma_tilde)` for any `q`, with the deterministic limit.
pub(crate) fn borell_value(q: f64, sigma_tilde: f64) -> f64 {
    if sigma_tilde < DETERMINISTIC_SIGMA {
        return if q < 1.0 {
            0.0
        } else if q > 1.0 {
            1.0
        } else {
            0.5
        };
    }
    std_normal_sf((1.0 - q) / sigma_tilde)
}
