//! Prose renderings of states, goals and plans in the style of BlocksWorld prompts.
//!
//! State grammar, clauses joined by `", "` with the last two joined by `" and "`:
//!
//! 1. `the <color> block is clear` for every clear block, in id order;
//! 2. `the hand is empty` or `I am holding the <color> block`;
//! 3. for every block that is not held, in id order, either
//!    `the <color> block is on the table` or
//!    `the <color> block is on top of the <color> block`.
//!
//! Actions render through [`Action::describe`](super::Action::describe) and goals through
//! [`Goal::describe`](super::Goal::describe).

use super::{Action, Support, WorldState};

pub(crate) fn join_and(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// e.g. "the red block is clear, the hand is empty, the red block is on the table and ...".
pub fn describe_state(state: &WorldState) -> String {
    let mut parts = Vec::new();
    for b in state.blocks().filter(|&b| state.is_clear(b)) {
        parts.push(format!("the {} block is clear", b.label()));
    }
    parts.push(match state.held() {
        None => "the hand is empty".to_string(),
        Some(h) => format!("I am holding the {} block", h.label()),
    });
    for b in state.blocks() {
        match state.support(b) {
            Some(Support::Table) => parts.push(format!("the {} block is on the table", b.label())),
            Some(Support::Block(t)) => parts.push(format!(
                "the {} block is on top of the {} block",
                b.label(),
                t.label()
            )),
            None => {}
        }
    }
    join_and(&parts)
}

/// One action per line.
pub fn describe_plan(plan: &[Action]) -> String {
    plan.iter()
        .map(|a| a.describe())
        .collect::<Vec<_>>()
        .join("\n")
}
