//! Replicate fan-out on the rayon pool.
//!
//! Each replicate is a pure function of the seed and its index, so the
//! results are identical to sequential execution whatever the scheduling.

use rayon::prelude::*;

use runoff_core::simulator::{simulate_replicate, RecoveryPlan, SimulatedTriangle};
use runoff_core::{GenerativeSpec, RecoverySummary, Result};

/// All replicates of `spec`, in replicate order.
pub fn simulate_batch(spec: &GenerativeSpec) -> Vec<Result<SimulatedTriangle>> {
    (0..spec.replications())
        .into_par_iter()
        .map(|r| simulate_replicate(spec, r))
        .collect()
}

/// Parallel [`RecoveryPlan::run`].
pub fn run_recovery(plan: &RecoveryPlan) -> RecoverySummary {
    let outcomes: Vec<_> = (0..plan.spec().replications())
        .into_par_iter()
        .map(|r| (r, plan.replicate(r)))
        .collect();
    plan.summarize(outcomes)
}
