use serde::{Deserialize, Serialize};

use super::config::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Safe,
    Unsafe,
}

/// Why a decider stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    /// A confidence bound crossed `alpha`.
    BoundCrossed,
    /// All rounds ran without a decision; the trajectory is treated as unsafe.
    BudgetExhausted,
    /// Some posterior mean on the trajectory is non-positive; rejected before sampling.
    MeanSignChange,
    /// The median of the centered supremum could not be placed below the threshold.
    MedianInfeasible,
}

/// Outcome of one safety evaluation.
///
/// Serializes to the flat record
/// `{method, decision, reason, stop_round, samples_used, p_lower, p_upper, alpha, epsilon}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub method: Method,
    pub decision: Decision,
    pub reason: Reason,
    /// Round at which the decision was taken; 0 for immediate rejection.
    pub stop_round: usize,
    /// Cumulative number of simulated trajectories.
    pub samples_used: usize,
    #[serde(rename = "p_lower")]
    pub lower_bound: f64,
    #[serde(rename = "p_upper")]
    pub upper_bound: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl SafetyVerdict {
    pub fn is_safe(&self) -> bool {
        self.decision == Decision::Safe
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_record_layout() {
        let v = SafetyVerdict {
            method: Method::Abm,
            decision: Decision::Safe,
            reason: Reason::BoundCrossed,
            stop_round: 2,
            samples_used: 200,
            lower_bound: -0.01,
            upper_bound: 0.004,
            alpha: 0.01,
            epsilon: 0.05,
        };
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(
            json,
            r#"{"method":"ABM","decision":"Safe","reason":"BoundCrossed","stop_round":2,"samples_used":200,"p_lower":-0.01,"p_upper":0.004,"alpha":0.01,"epsilon":0.05}"#
        );
        let back: SafetyVerdict = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
