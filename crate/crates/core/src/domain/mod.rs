//! Deterministic BlocksWorld transition system.
//!
//! Four actions, precondition checking, inverse actions for backward search, and
//! canonical state keys. All types are immutable values.

mod action;
mod goal;
mod state;
pub mod text;

pub use action::{Action, ActionKind};
pub use goal::Goal;
pub use state::{hand_empty_states, BlockId, StateKey, Support, WorldState, MAX_BLOCKS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("precondition violated for {action}: {reason}")]
    PreconditionViolated { action: Action, reason: String },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("block count {0} outside 1..={max}", max = MAX_BLOCKS)]
    BlockCount(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Why `action` cannot be applied in `state`, or `None` if it can.
fn violation(state: &WorldState, action: &Action) -> Option<&'static str> {
    let n = state.len();
    let in_range = |b: BlockId| b.index() < n;
    match *action {
        Action::PickUp(b) => {
            if !in_range(b) {
                Some("unknown block")
            } else if !state.hand_empty() {
                Some("hand is not empty")
            } else if !state.is_on_table(b) {
                Some("block is not on the table")
            } else if !state.is_clear(b) {
                Some("block is not clear")
            } else {
                None
            }
        }
        Action::Unstack(b, x) => {
            if !in_range(b) || !in_range(x) {
                Some("unknown block")
            } else if b == x {
                Some("block cannot be unstacked from itself")
            } else if !state.hand_empty() {
                Some("hand is not empty")
            } else if state.support(b) != Some(Support::Block(x)) {
                Some("block is not on top of the other block")
            } else if !state.is_clear(b) {
                Some("block is not clear")
            } else {
                None
            }
        }
        Action::PutDown(b) => {
            if !in_range(b) {
                Some("unknown block")
            } else if !state.is_held(b) {
                Some("block is not held")
            } else {
                None
            }
        }
        Action::Stack(b, x) => {
            if !in_range(b) || !in_range(x) {
                Some("unknown block")
            } else if b == x {
                Some("block cannot be stacked on itself")
            } else if !state.is_held(b) {
                Some("block is not held")
            } else if !state.is_clear(x) {
                Some("target block is not clear")
            } else {
                None
            }
        }
    }
}

pub fn is_applicable(state: &WorldState, action: &Action) -> bool {
    violation(state, action).is_none()
}

/// Actions whose preconditions hold, in canonical order.
pub fn applicable_actions(state: &WorldState) -> Vec<Action> {
    let mut out = Vec::new();
    match state.held() {
        None => {
            for b in state.blocks().filter(|&b| state.is_clear(b)) {
                match state.support(b) {
                    Some(Support::Table) => out.push(Action::PickUp(b)),
                    Some(Support::Block(x)) => out.push(Action::Unstack(b, x)),
                    None => unreachable!("hand is empty"),
                }
            }
        }
        Some(h) => {
            out.push(Action::PutDown(h));
            out.extend(
                state
                    .blocks()
                    .filter(|&x| x != h && state.is_clear(x))
                    .map(|x| Action::Stack(h, x)),
            );
        }
    }
    out.sort();
    out
}

/// The successor of `state` under `action`. The input is left untouched.
pub fn apply(state: &WorldState, action: &Action) -> Result<WorldState, DomainError> {
    if let Some(reason) = violation(state, action) {
        return Err(DomainError::PreconditionViolated {
            action: *action,
            reason: reason.to_string(),
        });
    }
    let mut next = *state;
    match *action {
        Action::PickUp(b) | Action::Unstack(b, _) => next.set_held(b),
        Action::PutDown(b) => next.set_support(b, Support::Table),
        Action::Stack(b, x) => next.set_support(b, Support::Block(x)),
    }
    Ok(next)
}

/// Replays `plan` from `state`, returning the final state.
pub fn replay(state: &WorldState, plan: &[Action]) -> Result<WorldState, DomainError> {
    plan.iter().try_fold(*state, |s, a| apply(&s, a))
}

pub fn inverse(action: &Action) -> Action {
    action.inverse()
}

/// All `(a, s')` with `apply(s', a) == state`. Each `a` is the forward-direction
/// action that would appear in a final plan.
pub fn backward_expansions(state: &WorldState) -> Vec<(Action, WorldState)> {
    applicable_actions(state)
        .into_iter()
        .map(|r| {
            let prev = apply(state, &r).expect("applicable action");
            (r.inverse(), prev)
        })
        .collect()
}

pub fn satisfies_goal(state: &WorldState, goal: &Goal) -> bool {
    goal.satisfied_by(state)
}

pub fn canonical_key(state: &WorldState) -> StateKey {
    state.key()
}
