use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{hand_empty_states, BlockId, DomainError, Support, WorldState};

/// A set of `on(x, y)` atoms, `y` a block or the table. Partial goals are allowed.
///
/// Keyed by the first argument, so a block can never appear twice there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Goal {
    on: BTreeMap<BlockId, Support>,
}

impl Goal {
    pub fn new(atoms: impl IntoIterator<Item = (BlockId, Support)>) -> Result<Self, DomainError> {
        let mut on = BTreeMap::new();
        for (x, y) in atoms {
            if y == Support::Block(x) {
                return Err(DomainError::InvalidGoal(format!("{x} on itself")));
            }
            if let Some(prev) = on.insert(x, y) {
                if prev != y {
                    return Err(DomainError::InvalidGoal(format!(
                        "{x} required on two different supports"
                    )));
                }
            }
        }
        let goal = Self { on };
        goal.check_satisfiable()?;
        Ok(goal)
    }

    /// The goal that pins every block exactly where it sits in `state`.
    pub fn from_state(state: &WorldState) -> Result<Self, DomainError> {
        if !state.hand_empty() {
            return Err(DomainError::InvalidGoal("full goal from a held state".into()));
        }
        Self::new(state.blocks().filter_map(|b| state.support(b).map(|s| (b, s))))
    }

    fn check_satisfiable(&self) -> Result<(), DomainError> {
        let mut carried = BTreeMap::new();
        for (&x, &y) in &self.on {
            if let Support::Block(t) = y {
                if let Some(other) = carried.insert(t, x) {
                    return Err(DomainError::InvalidGoal(format!(
                        "{other} and {x} both required on {t}"
                    )));
                }
            }
        }
        for &x in self.on.keys() {
            let mut cur = x;
            for _ in 0..=self.on.len() {
                match self.on.get(&cur) {
                    Some(Support::Block(t)) => cur = *t,
                    _ => break,
                }
                if cur == x {
                    return Err(DomainError::InvalidGoal("cyclic on-relations".into()));
                }
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> impl Iterator<Item = (BlockId, Support)> + '_ {
        self.on.iter().map(|(&x, &y)| (x, y))
    }

    pub fn len(&self) -> usize {
        self.on.len()
    }

    pub fn is_empty(&self) -> bool {
        self.on.is_empty()
    }

    /// Largest block id referenced, for checking against a state's block count.
    pub fn max_block(&self) -> Option<BlockId> {
        self.atoms()
            .flat_map(|(x, y)| match y {
                Support::Block(t) => [Some(x), Some(t)],
                Support::Table => [Some(x), None],
            })
            .flatten()
            .max()
    }

    /// True iff every atom holds and the hand is empty.
    pub fn satisfied_by(&self, state: &WorldState) -> bool {
        state.hand_empty() && self.atoms().all(|(x, y)| state.support(x) == Some(y))
    }

    /// All hand-empty states of `n` blocks satisfying this goal, sorted by key.
    pub fn goal_states(&self, n: usize) -> Result<Vec<WorldState>, DomainError> {
        if let Some(b) = self.max_block().filter(|b| b.index() >= n) {
            return Err(DomainError::UnknownBlock(b));
        }
        Ok(hand_empty_states(n)?
            .into_iter()
            .filter(|s| self.satisfied_by(s))
            .collect())
    }

    /// Prose form, e.g. "the blue block is on top of the orange block".
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .atoms()
            .map(|(x, y)| match y {
                Support::Table => format!("the {} block is on the table", x.label()),
                Support::Block(t) => {
                    format!("the {} block is on top of the {} block", x.label(), t.label())
                }
            })
            .collect();
        super::text::join_and(&parts)
    }
}

impl<'de> Deserialize<'de> for Goal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let on = BTreeMap::<BlockId, Support>::deserialize(deserializer)?;
        Goal::new(on).map_err(serde::de::Error::custom)
    }
}
