//! Tree-search planners over budgeted BlocksWorld: level-order and depth-first
//! Tree-of-Thoughts search, MCTS, and bidirectional search.
//!
//! All planners share one node/expansion machinery ([`engine`]): expanding a
//! node requests up to `m` ranked proposals from the scorer and creates one child
//! per proposal, optionally dropping children whose accumulated cost already
//! exceeds the budget. One expansion is one proposal request, with MCTS rollout
//! steps counted the same way.

mod bidir;
mod engine;
mod mcts;
mod tot;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bidir::{bi_search, extract_plan};
pub use mcts::{mcts, uct_score};
pub use tot::{tot_bfs, tot_dfs};
pub use tree::{NodeId, SearchNode, SearchTree};

use crate::cost::{Budget, Cost, CostSchedule};
use crate::domain::{Action, DomainError, Goal, StateKey, WorldState};
use crate::scorer::{Scorer, ScorerError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("trees met at different states ({forward} vs {backward})")]
    IncompatibleMeet { forward: StateKey, backward: StateKey },
    #[error("planner produced an invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Maximum node expansions per run (shared by both trees in bidirectional search).
    pub expansion_limit: usize,
    /// Maximum actions per trajectory; nodes at this depth are terminal.
    pub max_depth: usize,
    /// Proposals requested per expansion.
    pub branching: usize,
    /// Drop children whose accumulated cost exceeds the budget.
    pub hard_pruning: bool,
    /// Exploration weight in the UCT rule.
    pub uct_beta: f64,
    /// Maximum greedy rollout steps per MCTS simulation.
    pub rollout_depth: usize,
    pub seed: u64,
    /// Bidirectional search: expand every candidate instead of the top `branching`.
    pub expand_all: bool,
    /// MCTS: back up the squashed child reward instead of running a rollout.
    pub reward_only_backup: bool,
    /// Bidirectional search: maximum number of goal states used as backward roots.
    pub backward_root_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            expansion_limit: 500,
            max_depth: 24,
            branching: 5,
            hard_pruning: false,
            uct_beta: 1.0,
            rollout_depth: 24,
            seed: 0,
            expand_all: false,
            reward_only_backup: false,
            backward_root_cap: 32,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.expansion_limit == 0 {
            return Err(SearchError::InvalidConfig("expansion_limit must be >= 1"));
        }
        if self.branching == 0 {
            return Err(SearchError::InvalidConfig("branching must be >= 1"));
        }
        if self.max_depth == 0 {
            return Err(SearchError::InvalidConfig("max_depth must be >= 1"));
        }
        if self.backward_root_cap == 0 {
            return Err(SearchError::InvalidConfig("backward_root_cap must be >= 1"));
        }
        if !(self.uct_beta.is_finite() && self.uct_beta >= 0.0) {
            return Err(SearchError::InvalidConfig("uct_beta must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Everything a planner may know about a task. Ground truth is deliberately absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub initial: WorldState,
    pub goal: Goal,
    pub schedule: CostSchedule,
    pub budget: Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Solved,
    /// A goal-reaching plan was found but every one exceeded the budget.
    BudgetViolation,
    /// No goal-reaching plan within the expansion limit or the reachable tree.
    SearchExhaustion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Root,
    Child,
    /// A state visited by an MCTS greedy rollout; not a tree node.
    Rollout,
    /// A forward/backward overlap; `g` is the combined plan cost.
    Meet,
}

/// One trace line. Every tree node, pruned child, rollout step and meet gets one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub index: usize,
    pub parent: Option<usize>,
    pub kind: RecordKind,
    pub direction: Direction,
    pub depth: usize,
    pub key: StateKey,
    pub action: Option<Action>,
    pub g: Cost,
    pub reward: f64,
    /// MCTS visit count N at the end of the run.
    pub visits: u32,
    /// MCTS value estimate Q at the end of the run.
    pub value: f64,
    /// Ordinal of the expansion that requested proposals at this record.
    pub expanded: Option<usize>,
    pub pruned: bool,
    /// The record closes a complete plan of cost `g` (goal reached forward,
    /// initial state reached backward, or a meet).
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub plan: Option<Vec<Action>>,
    pub cost: Option<Cost>,
    pub expansions_used: usize,
    pub expansion_limit: usize,
    pub budget: Budget,
    pub trace: Vec<TraceRecord>,
}

impl RunOutcome {
    pub fn solved(&self) -> bool {
        self.status == RunStatus::Solved
    }

    /// Complete, unpruned records whose plan cost exceeds the budget.
    pub fn over_budget_plans(&self) -> impl Iterator<Item = &TraceRecord> {
        self.trace
            .iter()
            .filter(|r| r.complete && !r.pruned && !self.budget.allows(r.g))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Bfs,
    Dfs,
    Mcts,
    Bi,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [PlannerKind::Bfs, PlannerKind::Dfs, PlannerKind::Mcts, PlannerKind::Bi];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Bfs => "bfs",
            PlannerKind::Dfs => "dfs",
            PlannerKind::Mcts => "mcts",
            PlannerKind::Bi => "bi",
        }
    }

    pub fn run(
        self,
        problem: &Problem,
        scorer: &mut dyn Scorer,
        cfg: &SearchConfig,
    ) -> Result<RunOutcome, SearchError> {
        match self {
            PlannerKind::Bfs => tot_bfs(problem, scorer, cfg),
            PlannerKind::Dfs => tot_dfs(problem, scorer, cfg),
            PlannerKind::Mcts => mcts(problem, scorer, cfg),
            PlannerKind::Bi => bi_search(problem, scorer, cfg),
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfs" => Ok(PlannerKind::Bfs),
            "dfs" => Ok(PlannerKind::Dfs),
            "mcts" => Ok(PlannerKind::Mcts),
            "bi" => Ok(PlannerKind::Bi),
            _ => Err(format!("unknown planner `{s}` (expected bfs|dfs|mcts|bi)")),
        }
    }
}
