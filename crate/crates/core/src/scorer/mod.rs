//! Pluggable action-ranking policies.
//!
//! A scorer assigns each candidate transition two log-probability signals: an
//! action-evaluation confidence and a self-evaluation ("is this a good choice")
//! confidence. Their sum is the node reward. Scorers only rank candidates that the
//! domain produced, so no scorer can introduce an invalid transition.

mod heuristic;
mod oracle_policy;
mod random;
mod remote;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use heuristic::HeuristicScorer;
pub use oracle_policy::OracleScorer;
pub use random::RandomScorer;
pub use remote::{RemoteScorer, ScoreRequest, ScoreResponse, SCORER_ENDPOINT_ENV};

use crate::cost::{Budget, Cost, CostSchedule};
use crate::domain::{self, Action, Goal, StateKey, WorldState};
use crate::oracle::{CostMap, Oracle, OracleError};
use crate::search::Direction;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("no applicable action in state {0}")]
    EmptyActionSet(StateKey),
    #[error("remote scorer unavailable: {0}")]
    RemoteUnavailable(String),
    #[error("remote scorer protocol error: {0}")]
    Protocol(String),
    #[error("scorer returned an invalid confidence {value} for {action}")]
    InvalidConfidence { action: Action, value: f64 },
    #[error("no cost estimate for state {0}")]
    MissingEstimate(StateKey),
}

/// What a scorer sees when asked about one node.
#[derive(Clone, Copy, Debug)]
pub struct NodeContext<'a> {
    pub direction: Direction,
    pub initial: &'a WorldState,
    /// Parent state whose successors (forward) or predecessors (backward) are ranked.
    pub state: &'a WorldState,
    /// Forward: actions from the initial state to `state`. Backward: actions from
    /// `state` to the backward root.
    pub plan: &'a [Action],
    pub goal: &'a Goal,
    pub budget: Budget,
    /// Accumulated cost of `plan`.
    pub g: Cost,
    pub schedule: &'a CostSchedule,
}

/// A transition offered to the scorer. For backward nodes `successor` is the
/// predecessor state and `action` leads from it to the parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub action: Action,
    pub successor: WorldState,
}

/// Candidates for `ctx`, in canonical action order.
pub fn candidates(ctx: &NodeContext<'_>) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = match ctx.direction {
        Direction::Forward => domain::applicable_actions(ctx.state)
            .into_iter()
            .map(|action| Candidate {
                action,
                successor: domain::apply(ctx.state, &action).expect("applicable"),
            })
            .collect(),
        Direction::Backward => domain::backward_expansions(ctx.state)
            .into_iter()
            .map(|(action, successor)| Candidate { action, successor })
            .collect(),
    };
    out.sort_by_key(|c| c.action);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub action: f64,
    pub self_eval: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proposal {
    pub action: Action,
    pub successor: WorldState,
    pub action_confidence: f64,
    pub self_confidence: f64,
}

impl Proposal {
    pub fn reward(&self) -> f64 {
        node_reward(self)
    }
}

pub fn node_reward(p: &Proposal) -> f64 {
    p.action_confidence + p.self_confidence
}

pub trait Scorer {
    fn name(&self) -> &'static str;

    /// One confidence pair per candidate, same order. Both values are log-probabilities.
    fn confidences(
        &mut self,
        ctx: &NodeContext<'_>,
        candidates: &[Candidate],
    ) -> Result<Vec<Confidence>, ScorerError>;

    /// Scores for candidate backward roots (goal states). Higher is better;
    /// `-inf` drops a root. Defaults to no preference.
    fn rank_roots(
        &mut self,
        _ctx: &NodeContext<'_>,
        states: &[WorldState],
    ) -> Result<Vec<f64>, ScorerError> {
        Ok(vec![0.0; states.len()])
    }
}

/// Up to `m` proposals ranked by reward, ties broken by canonical action order.
/// Zero-probability candidates (reward `-inf`) are never proposed.
pub fn propose(
    scorer: &mut dyn Scorer,
    ctx: &NodeContext<'_>,
    m: usize,
) -> Result<Vec<Proposal>, ScorerError> {
    let cands = candidates(ctx);
    if cands.is_empty() {
        return Err(ScorerError::EmptyActionSet(ctx.state.key()));
    }
    let conf = scorer.confidences(ctx, &cands)?;
    if conf.len() != cands.len() {
        return Err(ScorerError::Protocol(format!(
            "{} confidences for {} candidates",
            conf.len(),
            cands.len()
        )));
    }
    let mut out = Vec::with_capacity(cands.len());
    for (c, k) in cands.into_iter().zip(conf) {
        for value in [k.action, k.self_eval] {
            if value.is_nan() || value > 0.0 {
                return Err(ScorerError::InvalidConfidence {
                    action: c.action,
                    value,
                });
            }
        }
        let p = Proposal {
            action: c.action,
            successor: c.successor,
            action_confidence: k.action,
            self_confidence: k.self_eval,
        };
        if p.reward() > f64::NEG_INFINITY {
            out.push(p);
        }
    }
    out.sort_by(|a, b| b.reward().total_cmp(&a.reward()).then(a.action.cmp(&b.action)));
    out.truncate(m.max(1));
    Ok(out)
}

/// Exact cost estimates a scorer may consult: remaining cost to the goal (forward
/// ranking) and cost from the initial state (backward ranking).
#[derive(Clone, Debug)]
pub struct CostMaps {
    pub to_goal: CostMap,
    pub from_initial: CostMap,
}

impl CostMaps {
    pub fn build(
        oracle: &Oracle,
        initial: &WorldState,
        goal: &Goal,
        schedule: &CostSchedule,
    ) -> Result<Self, OracleError> {
        Ok(Self {
            to_goal: oracle.remaining_cost_map(goal, schedule),
            from_initial: oracle.cost_from_map(initial, schedule)?,
        })
    }

    /// Distance that a candidate successor still has to cover in `direction`.
    pub(crate) fn remaining(&self, direction: Direction, state: &WorldState) -> Result<Cost, ScorerError> {
        let map = match direction {
            Direction::Forward => &self.to_goal,
            Direction::Backward => &self.from_initial,
        };
        map.get(state).ok_or(ScorerError::MissingEstimate(state.key()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScorerKind {
    Heuristic,
    /// Heuristic confidences plus seeded Gaussian noise of standard deviation `sigma`.
    Noisy { sigma: f64 },
    Random,
    Oracle,
    Remote { endpoint: String },
}

impl ScorerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScorerKind::Heuristic => "heuristic",
            ScorerKind::Noisy { .. } => "noisy",
            ScorerKind::Random => "random",
            ScorerKind::Oracle => "oracle",
            ScorerKind::Remote { .. } => "remote",
        }
    }

    pub fn needs_cost_maps(&self) -> bool {
        matches!(self, ScorerKind::Heuristic | ScorerKind::Noisy { .. } | ScorerKind::Oracle)
    }
}

/// Scorer selection plus its knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorerConfig {
    #[serde(flatten)]
    pub kind: ScorerKind,
    /// Softmax temperature for action confidences.
    #[serde(default = "one")]
    pub temperature: f64,
    /// Slope of the feasibility judgment in self confidences.
    #[serde(default = "one")]
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}

impl ScorerConfig {
    pub fn new(kind: ScorerKind) -> Self {
        Self {
            kind,
            temperature: 1.0,
            kappa: 1.0,
        }
    }

    /// Builds a scorer for one run. `maps` is required by the oracle-backed kinds.
    pub fn build(&self, seed: u64, maps: Option<Arc<CostMaps>>) -> Result<Box<dyn Scorer + Send>, ScorerError> {
        let need = || maps.clone().ok_or_else(|| ScorerError::Protocol("scorer requires cost maps".into()));
        Ok(match &self.kind {
            ScorerKind::Heuristic => Box::new(HeuristicScorer::new(need()?, self.temperature, self.kappa)),
            ScorerKind::Noisy { sigma } => Box::new(
                HeuristicScorer::new(need()?, self.temperature, self.kappa).with_noise(*sigma, seed),
            ),
            ScorerKind::Random => Box::new(RandomScorer::new(seed)),
            ScorerKind::Oracle => Box::new(OracleScorer::new(need()?)),
            ScorerKind::Remote { endpoint } => Box::new(RemoteScorer::new(endpoint.clone())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BlockId;

    /// Scores by a fixed per-action table.
    struct Table(Vec<(Action, Confidence)>);

    impl Scorer for Table {
        fn name(&self) -> &'static str {
            "table"
        }

        fn confidences(&mut self, _: &NodeContext<'_>, c: &[Candidate]) -> Result<Vec<Confidence>, ScorerError> {
            Ok(c.iter()
                .map(|c| {
                    self.0
                        .iter()
                        .find(|(a, _)| *a == c.action)
                        .map(|(_, k)| *k)
                        .unwrap_or(Confidence { action: -5.0, self_eval: -5.0 })
                })
                .collect())
        }
    }

    fn ctx<'a>(state: &'a WorldState, goal: &'a Goal, sched: &'a CostSchedule) -> NodeContext<'a> {
        NodeContext {
            direction: Direction::Forward,
            initial: state,
            state,
            plan: &[],
            goal,
            budget: Budget::Infinite,
            g: 0,
            schedule: sched,
        }
    }

    #[test]
    fn reward_is_sum() {
        let p = Proposal {
            action: Action::PickUp(BlockId(0)),
            successor: WorldState::all_on_table(1).unwrap(),
            action_confidence: -0.1,
            self_confidence: -0.2,
        };
        assert!((node_reward(&p) + 0.3).abs() < 1e-12);
        let certain = Proposal { action_confidence: 0.0, self_confidence: 0.0, ..p };
        assert_eq!(node_reward(&certain), 0.0);
    }

    #[test]
    fn ranking_and_truncation() {
        let s = WorldState::all_on_table(3).unwrap();
        let g = Goal::new([]).unwrap();
        let sched = CostSchedule::uniform();
        let mut t = Table(vec![
            (Action::PickUp(BlockId(2)), Confidence { action: -0.1, self_eval: 0.0 }),
            (Action::PickUp(BlockId(1)), Confidence { action: -0.05, self_eval: -0.05 }),
        ]);
        let props = propose(&mut t, &ctx(&s, &g, &sched), 2).unwrap();
        let acts: Vec<Action> = props.iter().map(|p| p.action).collect();
        // Equal rewards fall back to canonical order.
        assert_eq!(acts, vec![Action::PickUp(BlockId(1)), Action::PickUp(BlockId(2))]);
    }

    #[test]
    fn rejects_positive_confidence() {
        let s = WorldState::all_on_table(2).unwrap();
        let g = Goal::new([]).unwrap();
        let sched = CostSchedule::uniform();
        let mut t = Table(vec![(Action::PickUp(BlockId(0)), Confidence { action: 0.5, self_eval: 0.0 })]);
        assert!(matches!(
            propose(&mut t, &ctx(&s, &g, &sched), 5),
            Err(ScorerError::InvalidConfidence { .. })
        ));
    }

    #[test]
    fn single_candidate() {
        let s = WorldState::from_stacks(3, &[vec![BlockId(2), BlockId(1), BlockId(0)]], None).unwrap();
        let g = Goal::new([]).unwrap();
        let sched = CostSchedule::uniform();
        let mut r = RandomScorer::new(3);
        let props = propose(&mut r, &ctx(&s, &g, &sched), 5).unwrap();
        assert_eq!(props.len(), 1);
        assert_eq!(props[0].action, Action::Unstack(BlockId(0), BlockId(1)));
    }
}
