//! Standard normal distribution function and quantile.
//!
//! Both are expressed through the complementary error function so the upper
//! tail `1 - Phi(x)` keeps full relative precision for large `x`.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal CDF `Phi(x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)`, computed without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal quantile `Phi^{-1}(p)` for `p` in `[0, 1]`.
///
/// Returns `-inf` at 0 and `+inf` at 1.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // One Newton step against the accurate CDF.
    let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    if density > 0.0 {
        let residual = if x > 0.0 { (1.0 - p) - std_normal_sf(x) } else { std_normal_cdf(x) - p };
        x - residual / density
    } else {
        x
    }
}
