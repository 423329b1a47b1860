//! Rayon front ends for the embarrassingly parallel parts: order-finding
//! trials and slice subtasks. Both reduce in a fixed order so the result does
//! not depend on scheduling.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use zxcontract_core::engine::{combine_subtasks, num_subtasks, run_subtask, Execution, Network};
use zxcontract_core::orderfinder::{better_plan, plan_with_precontraction, ContractionPlan};
use zxcontract_core::twtools::{ExpansionLimit, SearchBudget};
use zxcontract_core::{Error, Result};

/// Branch-and-bound budget bounded by wall-clock time.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    end: Instant,
}

impl Deadline {
    pub fn after(d: Duration) -> Self {
        Deadline { end: Instant::now() + d }
    }
}

impl SearchBudget for Deadline {
    fn exhausted(&mut self) -> bool {
        Instant::now() >= self.end
    }
}

/// Node expansions granted per millisecond of `--bb-budget-ms` when a run
/// must be reproducible.
pub const EXPANSIONS_PER_MS: u64 = 20;

/// How each branch-and-bound search is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetSpec {
    WallClock(Duration),
    Expansions(u64),
}

impl BudgetSpec {
    /// Wall-clock budget normally; a fixed expansion count when
    /// `deterministic`, since a clock makes the search depend on load.
    pub fn from_millis(ms: u64, deterministic: bool) -> Self {
        if deterministic {
            BudgetSpec::Expansions(ms.saturating_mul(EXPANSIONS_PER_MS))
        } else {
            BudgetSpec::WallClock(Duration::from_millis(ms))
        }
    }

    pub fn make(self) -> Box<dyn SearchBudget> {
        match self {
            BudgetSpec::WallClock(d) => Box::new(Deadline::after(d)),
            BudgetSpec::Expansions(n) => Box::new(ExpansionLimit::new(n)),
        }
    }
}

/// Best plan over `seeds`, one rayon task per seed. Ties go to the lower
/// seed exactly as in the sequential version.
pub fn parallel_trials(
    net: &Network,
    seeds: &[u64],
    target_rank: usize,
    budget: BudgetSpec,
) -> Result<ContractionPlan> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one trial seed is needed".into()));
    }
    let g = net.net_graph();
    let plans = seeds
        .par_iter()
        .map(|&s| plan_with_precontraction(&g, s, target_rank, &|| budget.make()))
        .collect::<Result<Vec<_>>>()?;
    Ok(plans.into_iter().reduce(better_plan).expect("nonempty"))
}

/// Same result as [`zxcontract_core::engine::execute_plan`], with slice
/// subtasks spread over the rayon pool.
pub fn parallel_execute(net: &Network, plan: &ContractionPlan) -> Result<Execution> {
    let n = num_subtasks(plan)?;
    let results = (0..n).into_par_iter().map(|a| run_subtask(net, plan, a)).collect::<Result<Vec<_>>>()?;
    Ok(combine_subtasks(net, &results))
}
