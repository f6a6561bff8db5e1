//! Simulation-budget accounting.
//!
//! `vectorized_calls` counts independent invocations of a (conceptually)
//! vectorized simulator — a batched optimizer step over all seeds of one
//! observation is one call, as is one lockstep step of all line searches of
//! an observation group, or one indicator pass of one accepted seed over
//! every candidate. `instance_evaluations` counts the underlying (θ, u)
//! pairs actually evaluated; it never hides true work. `fused_estimate` is
//! the informational headline under the "compiled steps cost about one
//! call" reading: one unit per (observation, seed).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub vectorized_calls: u64,
    pub instance_evaluations: u64,
    pub fused_estimate: u64,
}

impl BudgetLedger {
    pub fn add_vectorized(&mut self, calls: u64, instances_per_call: u64) {
        self.vectorized_calls += calls;
        self.instance_evaluations += calls * instances_per_call;
    }

    pub fn add_instances(&mut self, instances: u64) {
        self.instance_evaluations += instances;
    }

    pub fn merge(&mut self, other: &BudgetLedger) {
        self.vectorized_calls += other.vectorized_calls;
        self.instance_evaluations += other.instance_evaluations;
        self.fused_estimate += other.fused_estimate;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorized_calls_never_exceed_instances() {
        let mut l = BudgetLedger::default();
        l.add_vectorized(3, 100);
        l.add_instances(7);
        assert_eq!(l.vectorized_calls, 3);
        assert_eq!(l.instance_evaluations, 307);
        assert!(l.instance_evaluations >= l.vectorized_calls);
    }
}
