/// `-0.2 sin(10x) - x + 1.1` on `[0, 1]`.
pub fn toy1d(x: f64) -> f64 {
    -0.2 * (10.0 * x).sin() - x + 1.1
}

/// Himmelblau's function `(x^2 + y - 11)^2 + (x + y^2 - 7)^2`.
pub fn himmelblau(x: f64, y: f64) -> f64 {
    (x * x + y - 11.0).powi(2) + (x + y * y - 7.0).powi(2)
}

/// Safety indicator `0.01 (f(x, y) - 50)`; safe where non-negative.
pub fn himmelblau_safety(x: f64, y: f64) -> f64 {
    0.01 * (himmelblau(x, y) - 50.0)
}

pub(crate) fn toy1d_point(x: &[f64]) -> f64 {
    toy1d(x[0])
}

pub(crate) fn himmelblau_point(x: &[f64]) -> f64 {
    himmelblau_safety(x[0], x[1])
}
