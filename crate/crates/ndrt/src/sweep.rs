use std::time::Instant;

use ndrt_core::bench::{run_trial, work_items, Clock, ExperimentPlan, SweepSummary, TrialOutcome};
use rayon::prelude::*;

use crate::error::CliResult;

/// Monotonic wall clock measured from its creation.
#[derive(Debug, Clone, Copy)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Runs the plan's trials on the rayon pool. Outcomes come back in the same
/// order as a sequential sweep, so everything except timing is reproducible
/// regardless of the thread count.
pub fn run_sweep_parallel(plan: &ExperimentPlan) -> CliResult<(Vec<TrialOutcome>, SweepSummary)> {
    plan.validate()?;
    let clock = StdClock::new();
    let items = if plan.algorithms.is_empty() {
        Vec::new()
    } else {
        work_items(plan)
    };
    let total = items.len();
    let per_trial: Vec<Vec<TrialOutcome>> = items
        .into_par_iter()
        .enumerate()
        .map(|(i, (k, t))| {
            let out = run_trial(plan, k, t, &clock);
            if t + 1 == plan.trials_per_k {
                log::info!("k = {k} finished ({}/{total} trials)", i + 1);
            }
            out
        })
        .collect::<Result<_, _>>()?;
    let outcomes: Vec<TrialOutcome> = per_trial.into_iter().flatten().collect();
    let summary = SweepSummary::from_outcomes(plan, &outcomes)?;
    Ok((outcomes, summary))
}
