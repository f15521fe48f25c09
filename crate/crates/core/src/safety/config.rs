use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Safety decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Fixed-budget Monte-Carlo.
    #[serde(rename = "MC")]
    Mc,
    /// Adaptive Monte-Carlo.
    #[serde(rename = "AMC")]
    Amc,
    /// Adaptive Borell-TIS with a sampled median.
    #[serde(rename = "AB")]
    Ab,
    /// Hybrid of AB (safe side only) and AMC.
    #[serde(rename = "ABM")]
    Abm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mc, Method::Amc, Method::Ab, Method::Abm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mc => "MC",
            Method::Amc => "AMC",
            Method::Ab => "AB",
            Method::Abm => "ABM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MC" => Ok(Method::Mc),
            "AMC" => Ok(Method::Amc),
            "AB" => Ok(Method::Ab),
            "ABM" => Ok(Method::Abm),
            other => Err(invalid(format!("unknown method `{other}` (expected MC, AMC, AB or ABM)"))),
        }
    }
}

/// Geometric batch schedule `M_r = initial * growth^(r-1)`, `r = 1..=rounds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingSchedule {
    pub initial: usize,
    pub growth: usize,
    pub rounds: usize,
}

impl Default for SamplingSchedule {
    /// `M_r = 100 * 2^(r-1)` with 14 rounds.
    fn default() -> Self {
        Self { initial: 100, growth: 2, rounds: 14 }
    }
}

impl SamplingSchedule {
    pub fn new(initial: usize, growth: usize, rounds: usize) -> Result<Self> {
        let s = Self { initial, growth, rounds };
        s.validate()?;
        Ok(s)
    }

    /// Doubling schedule starting at 100 samples.
    pub fn doubling(rounds: usize) -> Self {
        Self { initial: 100, growth: 2, rounds }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial < 1 {
            return Err(invalid("initial batch size must be at least 1"));
        }
        if self.growth < 2 {
            return Err(invalid("growth factor must be at least 2"));
        }
        if self.rounds < 1 {
            return Err(invalid("at least one round is required"));
        }
        let exp = u32::try_from(self.rounds - 1).map_err(|_| invalid("too many rounds"))?;
        self.growth
            .checked_pow(exp)
            .and_then(|g| g.checked_mul(self.initial))
            .filter(|m| *m <= 1 << 40)
            .ok_or_else(|| invalid("schedule overflows the sample-size range"))?;
        Ok(())
    }

    /// Cumulative sample size `M_r` for round `r >= 1`; `M_0 = 0`.
    pub fn size(&self, round: usize) -> usize {
        if round == 0 {
            return 0;
        }
        self.initial * self.growth.pow((round - 1) as u32)
    }

    /// `M_R`, the largest cumulative size.
    pub fn max_size(&self) -> usize {
        self.size(self.rounds)
    }

    /// Fixed budget of the non-adaptive baseline, `M_{R-1}` (or `M_1` when `R = 1`).
    pub fn fixed_budget(&self) -> usize {
        self.size(self.rounds.saturating_sub(1).max(1))
    }
}

/// Parameters shared by all deciders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeciderConfig {
    /// Maximal tolerated probability of an unsafe trajectory, in `(0, 1/2]`.
    pub alpha: f64,
    /// Probability of a wrong decision, in `(0, 1)`.
    pub epsilon: f64,
    pub schedule: SamplingSchedule,
    pub method: Method,
}

impl DeciderConfig {
    pub fn new(method: Method, alpha: f64, epsilon: f64, schedule: SamplingSchedule) -> Result<Self> {
        let c = Self { alpha, epsilon, schedule, method };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(invalid(format!("alpha must lie in (0, 1/2], got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        self.schedule.validate()
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }
}
