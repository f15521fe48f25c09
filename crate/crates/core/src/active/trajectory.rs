use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;

/// Axis-aligned operating box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid("domain bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(invalid("domain requires lo < hi in every coordinate"));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| rng.random_range(*a..=*b)).collect()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (a, b)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*a, *b);
        }
    }
}

/// Linear ramp from `start` to `end`, discretized into equidistant points
/// including both endpoints. A single-point discretization is the endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn ramp(start: Vec<f64>, end: Vec<f64>, m: usize) -> Result<Self> {
        if start.len() != end.len() {
            return Err(invalid("ramp endpoints differ in dimension"));
        }
        if m == 0 {
            return Err(invalid("a trajectory needs at least one point"));
        }
        let points = if m == 1 {
            vec![end.clone()]
        } else {
            (0..m)
                .map(|i| {
                    let t = i as f64 / (m - 1) as f64;
                    start.iter().zip(&end).map(|(a, b)| (1.0 - t) * a + t * b).collect()
                })
                .collect()
        };
        Ok(Self { start, end, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `count` ramps from `current` to endpoints drawn uniformly over the domain.
pub fn generate_candidates(current: &[f64], domain: &Domain, count: usize, m: usize, seed: u64) -> Result<Vec<Trajectory>> {
    if !domain.contains(current) {
        return Err(invalid("current point lies outside the domain"));
    }
    let mut rng = rng::stream(seed, "candidates", &[]);
    (0..count)
        .map(|_| Trajectory::ramp(current.to_vec(), domain.sample_uniform(&mut rng), m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_ramp() {
        let t = Trajectory::ramp(vec![0.0, 0.0], vec![4.0, 0.0], 5).unwrap();
        let expected: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 0.0]).collect();
        assert_eq!(t.points, expected);
        let single = Trajectory::ramp(vec![0.0], vec![0.7], 1).unwrap();
        assert_eq!(single.points, vec![vec![0.7]]);
    }

    #[test]
    fn ramp_hits_endpoints_exactly() {
        let (a, b) = (vec![-0.05645807616528091, 0.1], vec![0.7888404884566405, -2.9]);
        for m in 2..40 {
            let t = Trajectory::ramp(a.clone(), b.clone(), m).unwrap();
            assert_eq!(t.points[0], a);
            assert_eq!(t.points[m - 1], b);
        }
    }

    #[test]
    fn candidates_are_deterministic_and_inside() {
        let d = Domain::cube(-3.0, 3.0, 2).unwrap();
        let a = generate_candidates(&[0.0, 0.0], &d, 200, 5, 42).unwrap();
        let b = generate_candidates(&[0.0, 0.0], &d, 200, 5, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|t| t.points.iter().all(|p| d.contains(p))));
        let one = generate_candidates(&[0.5], &Domain::cube(0.0, 1.0, 1).unwrap(), 1, 3, 7).unwrap();
        assert_eq!(one, generate_candidates(&[0.5], &Domain::cube(0.0, 1.0, 1).unwrap(), 1, 3, 7).unwrap());
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::new(vec![0.0], vec![0.0]).is_err());
        assert!(Domain::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let d = Domain::cube(0.0, 1.0, 1).unwrap();
        assert!(generate_candidates(&[2.0], &d, 3, 3, 1).is_err());
    }
}
