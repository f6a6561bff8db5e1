//! JSON run reports: config echo, mask summary, acceptance statistics,
//! thresholds, diagnostics, wall-clock and the budget ledger.

use crate::harness::budget::BudgetLedger;
use crate::harness::config::ExperimentConfig;
use crate::optimize::OptimizationRecord;
use crate::sensitivity::Mask;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaskSummary {
    pub output_dim: usize,
    pub active_count: usize,
    pub threshold: f64,
    pub active: Vec<bool>,
    pub estimates: Vec<f64>,
}

impl MaskSummary {
    pub fn from_mask(mask: &Mask) -> Self {
        Self {
            output_dim: mask.len(),
            active_count: mask.active_count(),
            threshold: mask.threshold(),
            active: mask.active().to_vec(),
            estimates: mask.estimates().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcceptanceStats {
    pub total_records: usize,
    pub accepted_per_observation: Vec<usize>,
    pub failed_records: usize,
    pub d_star_min: f64,
    pub d_star_median: f64,
    pub d_star_max_accepted: f64,
}

impl AcceptanceStats {
    pub fn from_records(records: &[OptimizationRecord], n_obs: usize) -> Self {
        let mut per_obs = vec![0usize; n_obs];
        for r in records.iter().filter(|r| r.accepted) {
            per_obs[r.obs_index] += 1;
        }
        let mut distances: Vec<f64> =
            records.iter().filter(|r| !r.failed).map(|r| r.d_star).collect();
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max_accepted = records
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.d_star)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            total_records: records.len(),
            accepted_per_observation: per_obs,
            failed_records: records.iter().filter(|r| r.failed).count(),
            d_star_min: distances.first().copied().unwrap_or(f64::NAN),
            d_star_median: distances.get(distances.len() / 2).copied().unwrap_or(f64::NAN),
            d_star_max_accepted: max_accepted,
        }
    }
}

/// One inference run, fully described. Every field is always present.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub config: ExperimentConfig,
    pub mask: MaskSummary,
    pub acceptance: AcceptanceStats,
    pub epsilon: f64,
    pub weight_epsilon: f64,
    pub ess: f64,
    pub positive_weight_fraction: f64,
    pub eigen_fallbacks: usize,
    pub factorized_image_mode: bool,
    /// Per-repetition two-sample scores against the oracle, when evaluated.
    pub c2st_scores: Vec<f64>,
    pub runtime_seconds: f64,
    pub budget: BudgetLedger,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
