#![allow(dead_code)]

use std::sync::Arc;

use costplan::bench::Task;
use costplan::cost::{resolve_budget, BudgetRegime, CostSchedule};
use costplan::oracle::Oracle;
use costplan::scorer::{CostMaps, Scorer, ScorerConfig, ScorerKind};
use costplan::search::{PlannerKind, Problem, RunOutcome, SearchConfig, SearchError};

pub fn problem(task: &Task, regime: BudgetRegime) -> Problem {
    Problem {
        initial: task.initial,
        goal: task.goal.clone(),
        schedule: task.schedule,
        budget: resolve_budget(regime, task.c_opt, &task.schedule),
    }
}

pub fn maps(oracle: &Oracle, task: &Task) -> Arc<CostMaps> {
    Arc::new(CostMaps::build(oracle, &task.initial, &task.goal, &task.schedule).unwrap())
}

pub fn scorer(kind: ScorerKind, seed: u64, maps: Arc<CostMaps>) -> Box<dyn Scorer + Send> {
    ScorerConfig::new(kind).build(seed, Some(maps)).unwrap()
}

pub fn run(
    planner: PlannerKind,
    task: &Task,
    regime: BudgetRegime,
    kind: ScorerKind,
    maps: Arc<CostMaps>,
    cfg: &SearchConfig,
) -> Result<RunOutcome, SearchError> {
    let p = problem(task, regime);
    let mut s = scorer(kind, cfg.seed, maps);
    planner.run(&p, s.as_mut(), cfg)
}

pub fn study_schedule(i: usize) -> CostSchedule {
    CostSchedule::shift_study()[i % 10]
}
