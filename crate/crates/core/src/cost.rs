//! Action-cost schedules, plan cost accounting and budget regimes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Action, ActionKind};

/// Integral cost units (minutes in BlocksWorld prompts).
pub type Cost = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("action costs must be >= 1, got {0:?}")]
    NonPositive([Cost; 4]),
    #[error("bad cost schedule `{0}`: expected four comma-separated integers (pu,un,pd,st)")]
    Parse(String),
    #[error("unknown budget regime `{0}`")]
    Regime(String),
}

/// Cost per action kind. Serialized as a 4-tuple in (pick-up, unstack, put-down, stack) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[Cost; 4]", into = "[Cost; 4]")]
pub struct CostSchedule {
    costs: [Cost; 4],
}

/// The ten non-uniform schedules of the solution-shift study, (pu, un, pd, st).
pub const SHIFT_STUDY_SCHEDULES: [[Cost; 4]; 10] = [
    [20, 1, 1, 1],
    [1, 20, 1, 1],
    [1, 1, 20, 1],
    [1, 1, 1, 20],
    [20, 1, 20, 1],
    [1, 20, 1, 20],
    [20, 20, 1, 1],
    [1, 1, 20, 20],
    [20, 1, 1, 20],
    [1, 20, 20, 1],
];

impl CostSchedule {
    pub fn new(pick_up: Cost, unstack: Cost, put_down: Cost, stack: Cost) -> Result<Self, CostError> {
        Self::try_from([pick_up, unstack, put_down, stack])
    }

    pub fn uniform() -> Self {
        Self { costs: [1; 4] }
    }

    pub fn shift_study() -> Vec<CostSchedule> {
        SHIFT_STUDY_SCHEDULES
            .iter()
            .map(|&c| Self::try_from(c).expect("positive"))
            .collect()
    }

    pub fn of(&self, kind: ActionKind) -> Cost {
        self.costs[kind as usize]
    }

    pub fn action_cost(&self, action: &Action) -> Cost {
        self.of(action.kind())
    }

    pub fn plan_cost(&self, plan: &[Action]) -> Cost {
        plan.iter().map(|a| self.action_cost(a)).sum()
    }

    /// The maximum cost among all four action types.
    pub fn max_cost(&self) -> Cost {
        *self.costs.iter().max().unwrap()
    }

    pub fn as_array(&self) -> [Cost; 4] {
        self.costs
    }

    pub fn is_uniform(&self) -> bool {
        self.costs.iter().all(|&c| c == self.costs[0])
    }
}

impl Default for CostSchedule {
    fn default() -> Self {
        Self::uniform()
    }
}

impl TryFrom<[Cost; 4]> for CostSchedule {
    type Error = CostError;

    fn try_from(costs: [Cost; 4]) -> Result<Self, Self::Error> {
        if costs.contains(&0) {
            return Err(CostError::NonPositive(costs));
        }
        Ok(Self { costs })
    }
}

impl From<CostSchedule> for [Cost; 4] {
    fn from(s: CostSchedule) -> Self {
        s.costs
    }
}

/// `[pu, un, pd, st]`, e.g. `[1, 1, 20, 1]`.
impl fmt::Display for CostSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [pu, un, pd, st] = self.costs;
        write!(f, "[{pu}, {un}, {pd}, {st}]")
    }
}

/// Accepts `1,1,20,1` with optional brackets and spaces.
impl FromStr for CostSchedule {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<Cost> = inner
            .split(',')
            .map(|p| p.trim().parse::<Cost>())
            .collect::<Result<_, _>>()
            .map_err(|_| CostError::Parse(s.to_string()))?;
        let costs: [Cost; 4] = parts.try_into().map_err(|_| CostError::Parse(s.to_string()))?;
        Self::try_from(costs)
    }
}

pub fn action_cost(schedule: &CostSchedule, action: &Action) -> Cost {
    schedule.action_cost(action)
}

pub fn plan_cost(schedule: &CostSchedule, plan: &[Action]) -> Cost {
    schedule.plan_cost(plan)
}

/// Total-cost cap. `Infinite` sorts above every finite limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    Finite(Cost),
    Infinite,
}

impl Budget {
    pub fn allows(&self, cost: Cost) -> bool {
        match self {
            Budget::Finite(limit) => cost <= *limit,
            Budget::Infinite => true,
        }
    }

    pub fn limit(&self) -> Option<Cost> {
        match self {
            Budget::Finite(limit) => Some(*limit),
            Budget::Infinite => None,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Finite(c) => write!(f, "{c}"),
            Budget::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetRegime {
    /// Budget equals the optimal cost.
    Tight,
    /// Optimal cost plus `2 * c_max`.
    Loose,
    Unlimited,
}

impl BudgetRegime {
    pub const ALL: [BudgetRegime; 3] = [BudgetRegime::Tight, BudgetRegime::Loose, BudgetRegime::Unlimited];

    pub fn name(self) -> &'static str {
        match self {
            BudgetRegime::Tight => "tight",
            BudgetRegime::Loose => "loose",
            BudgetRegime::Unlimited => "unlimited",
        }
    }
}

impl fmt::Display for BudgetRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BudgetRegime {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tight" => Ok(BudgetRegime::Tight),
            "loose" => Ok(BudgetRegime::Loose),
            "unlimited" => Ok(BudgetRegime::Unlimited),
            _ => Err(CostError::Regime(s.to_string())),
        }
    }
}

pub fn resolve_budget(regime: BudgetRegime, c_opt: Cost, schedule: &CostSchedule) -> Budget {
    match regime {
        BudgetRegime::Tight => Budget::Finite(c_opt),
        BudgetRegime::Loose => Budget::Finite(c_opt + 2 * schedule.max_cost()),
        BudgetRegime::Unlimited => Budget::Infinite,
    }
}
