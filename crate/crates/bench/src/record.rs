use anyhow::{bail, Result};
use cvrp_core::island::StopReason;
use cvrp_core::{MemeticParams, Weight};
use serde::{Deserialize, Serialize};

/// How offspring pairs are drawn; echoed in every record.
pub const PAIRING_RULE: &str = "every unordered pair of members recombines with probability pr_cross";

/// Percentage relative deviation `100·(found − optimum)/optimum`.
pub fn prd(found: Weight, optimum: Weight) -> Result<f64> {
    if optimum == 0 {
        bail!("optimum must be positive");
    }
    Ok(100.0 * (found as f64 - optimum as f64) / optimum as f64)
}

/// PRD rounded to two decimals for display.
pub fn format_prd(value: f64) -> String {
    let s = format!("{value:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Memetic,
    ExactC2,
}

/// One solve, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub command: Vec<String>,
    pub instance: String,
    pub dimension: usize,
    pub capacity: usize,
    pub solver: Solver,
    pub islands: Option<usize>,
    pub params: Option<MemeticParams>,
    pub pairing_rule: Option<String>,
    pub result_weight: Weight,
    pub optimum: Option<Weight>,
    pub prd: Option<f64>,
    pub iterations_used: usize,
    pub reached_target_at: Option<usize>,
    pub stop_reason: Option<StopReason>,
    pub plan: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
    pub available_parallelism: usize,
}

impl ExperimentRecord {
    /// Sets the optimum and PRD, warning when the result beats the optimum.
    pub fn with_optimum(mut self, optimum: Option<Weight>) -> Result<Self> {
        self.optimum = optimum;
        self.prd = optimum.map(|o| prd(self.result_weight, o)).transpose()?;
        if self.prd.is_some_and(|p| p < 0.0) {
            self.warnings.push(format!(
                "result {} is below the optimum {}; the optimum is probably wrong",
                self.result_weight,
                optimum.unwrap_or_default()
            ));
        }
        Ok(self)
    }

    /// The record with timing fields cleared, for replay comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_secs: 0.0,
            available_parallelism: 0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prd_examples() {
        assert_eq!(format_prd(prd(2085, 2085).unwrap()), "0.00");
        assert_eq!(format_prd(prd(101, 100).unwrap()), "1.00");
        assert!(prd(99, 100).unwrap() < 0.0);
        assert!(prd(5, 0).is_err());
    }
}
