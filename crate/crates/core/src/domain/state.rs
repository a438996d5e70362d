use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DomainError;

/// Largest block count a [`WorldState`] can represent (4 bits per block in a [`StateKey`]).
pub const MAX_BLOCKS: usize = 15;

const COLORS: [&str; MAX_BLOCKS] = [
    "red", "blue", "orange", "yellow", "green", "purple", "white", "black", "pink", "brown",
    "gray", "cyan", "magenta", "silver", "gold",
];

/// Dense block index within one task, `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u8);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Color label used in prose renderings ("the red block").
    pub fn label(self) -> &'static str {
        COLORS[self.index()]
    }

    /// Single-letter label used in compact renderings (A, B, C, ...).
    pub fn letter(self) -> char {
        (b'A' + self.0) as char
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// What a block rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Support {
    Table,
    Block(BlockId),
}

impl Serialize for Support {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Support::Table => serializer.serialize_str("table"),
            Support::Block(b) => serializer.serialize_u8(b.0),
        }
    }
}

impl<'de> Deserialize<'de> for Support {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Block(u8),
            Name(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Block(b) => Ok(Support::Block(BlockId(b))),
            Repr::Name(s) if s == "table" => Ok(Support::Table),
            Repr::Name(s) => Err(D::Error::custom(format!("unknown support `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
enum Slot {
    #[default]
    Table,
    On(u8),
    Held,
}

/// Full BlocksWorld configuration: where every block rests, plus the held block.
///
/// Value type; every operation that changes a configuration returns a new state.
/// Unused slots beyond `n` are always [`Slot::Table`] so the derived `Eq`/`Hash`
/// agree with [`WorldState::key`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldState {
    n: u8,
    slots: [Slot; MAX_BLOCKS],
}

impl WorldState {
    /// All `n` blocks on the table, hand empty.
    pub fn all_on_table(n: usize) -> Result<Self, DomainError> {
        if n == 0 || n > MAX_BLOCKS {
            return Err(DomainError::BlockCount(n));
        }
        Ok(Self {
            n: n as u8,
            slots: [Slot::Table; MAX_BLOCKS],
        })
    }

    /// Builds a state from stacks listed bottom to top, plus an optional held block.
    /// Every block `0..n` must appear exactly once.
    pub fn from_stacks(
        n: usize,
        stacks: &[Vec<BlockId>],
        held: Option<BlockId>,
    ) -> Result<Self, DomainError> {
        let mut state = Self::all_on_table(n)?;
        let mut seen = [false; MAX_BLOCKS];
        let mut mark = |b: BlockId| -> Result<(), DomainError> {
            if b.index() >= n {
                return Err(DomainError::UnknownBlock(b));
            }
            if std::mem::replace(&mut seen[b.index()], true) {
                return Err(DomainError::InvalidState(format!("block {b} placed twice")));
            }
            Ok(())
        };
        for stack in stacks {
            let mut below = Slot::Table;
            for &b in stack {
                mark(b)?;
                state.slots[b.index()] = below;
                below = Slot::On(b.0);
            }
        }
        if let Some(h) = held {
            mark(h)?;
            state.slots[h.index()] = Slot::Held;
        }
        if let Some(missing) = (0..n).find(|&i| !seen[i]) {
            return Err(DomainError::InvalidState(format!(
                "block {} not placed",
                BlockId(missing as u8)
            )));
        }
        Ok(state)
    }

    /// Builds a state from an explicit support map; blocks absent from `support`
    /// must be the held block.
    pub fn from_support(
        n: usize,
        support: impl IntoIterator<Item = (BlockId, Support)>,
        held: Option<BlockId>,
    ) -> Result<Self, DomainError> {
        let mut state = Self::all_on_table(n)?;
        let mut seen = [false; MAX_BLOCKS];
        for (b, s) in support {
            if b.index() >= n {
                return Err(DomainError::UnknownBlock(b));
            }
            if std::mem::replace(&mut seen[b.index()], true) {
                return Err(DomainError::InvalidState(format!("block {b} has two supports")));
            }
            state.slots[b.index()] = match s {
                Support::Table => Slot::Table,
                Support::Block(t) if t.index() >= n => return Err(DomainError::UnknownBlock(t)),
                Support::Block(t) if t == b => {
                    return Err(DomainError::InvalidState(format!("block {b} on itself")))
                }
                Support::Block(t) => Slot::On(t.0),
            };
        }
        if let Some(h) = held {
            if h.index() >= n {
                return Err(DomainError::UnknownBlock(h));
            }
            if seen[h.index()] {
                return Err(DomainError::InvalidState(format!("held block {h} has a support")));
            }
            seen[h.index()] = true;
            state.slots[h.index()] = Slot::Held;
        }
        if let Some(missing) = (0..n).find(|&i| !seen[i]) {
            return Err(DomainError::InvalidState(format!(
                "block {} has no support",
                BlockId(missing as u8)
            )));
        }
        state.validate()?;
        Ok(state)
    }

    /// Checks acyclicity and that no block carries two blocks or the held block.
    pub fn validate(&self) -> Result<(), DomainError> {
        let n = self.len();
        let mut carried = [false; MAX_BLOCKS];
        for b in self.blocks() {
            if let Slot::On(t) = self.slots[b.index()] {
                let t = t as usize;
                if t >= n || t == b.index() {
                    return Err(DomainError::InvalidState(format!("bad support for {b}")));
                }
                if self.slots[t] == Slot::Held {
                    return Err(DomainError::InvalidState(format!("{b} rests on the held block")));
                }
                if std::mem::replace(&mut carried[t], true) {
                    return Err(DomainError::InvalidState(format!(
                        "block {} carries two blocks",
                        BlockId(t as u8)
                    )));
                }
            }
        }
        if self.blocks().filter(|b| self.slots[b.index()] == Slot::Held).count() > 1 {
            return Err(DomainError::InvalidState("more than one block held".into()));
        }
        // Walking down from any block must reach the table within n steps.
        for b in self.blocks() {
            let mut cur = self.slots[b.index()];
            let mut steps = 0;
            while let Slot::On(t) = cur {
                steps += 1;
                if steps > n {
                    return Err(DomainError::InvalidState("support cycle".into()));
                }
                cur = self.slots[t as usize];
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockId> {
        (0..self.n).map(BlockId)
    }

    pub fn held(&self) -> Option<BlockId> {
        self.blocks().find(|b| self.slots[b.index()] == Slot::Held)
    }

    pub fn hand_empty(&self) -> bool {
        self.held().is_none()
    }

    /// `None` while the block is held.
    pub fn support(&self, b: BlockId) -> Option<Support> {
        match self.slots[b.index()] {
            Slot::Table => Some(Support::Table),
            Slot::On(t) => Some(Support::Block(BlockId(t))),
            Slot::Held => None,
        }
    }

    pub fn is_held(&self, b: BlockId) -> bool {
        self.slots[b.index()] == Slot::Held
    }

    pub fn is_on_table(&self, b: BlockId) -> bool {
        self.slots[b.index()] == Slot::Table
    }

    /// A block is clear iff nothing rests on it and it is not held.
    pub fn is_clear(&self, b: BlockId) -> bool {
        !self.is_held(b) && self.block_on(b).is_none()
    }

    /// The block resting directly on `b`, if any.
    pub fn block_on(&self, b: BlockId) -> Option<BlockId> {
        self.blocks().find(|&x| self.slots[x.index()] == Slot::On(b.0))
    }

    /// Stacks bottom to top, ordered by bottom block id. The held block is excluded.
    pub fn stacks(&self) -> Vec<Vec<BlockId>> {
        self.blocks()
            .filter(|&b| self.is_on_table(b))
            .map(|bottom| {
                let mut stack = vec![bottom];
                while let Some(top) = self.block_on(*stack.last().unwrap()) {
                    stack.push(top);
                }
                stack
            })
            .collect()
    }

    pub(crate) fn set_held(&mut self, b: BlockId) {
        self.slots[b.index()] = Slot::Held;
    }

    pub(crate) fn set_support(&mut self, b: BlockId, s: Support) {
        self.slots[b.index()] = match s {
            Support::Table => Slot::Table,
            Support::Block(t) => Slot::On(t.0),
        };
    }

    /// Canonical key: equal keys iff identical support map and held block.
    pub fn key(&self) -> StateKey {
        let mut bits = (self.n as u64) << 60;
        for b in self.blocks() {
            let code = match self.slots[b.index()] {
                Slot::Table => 0u64,
                Slot::On(t) => t as u64 + 1,
                Slot::Held => 0xF,
            };
            bits |= code << (4 * b.index());
        }
        StateKey(bits)
    }

    pub fn from_key(key: StateKey) -> Result<Self, DomainError> {
        let n = (key.0 >> 60) as usize;
        let mut state = Self::all_on_table(n)?;
        for i in 0..n {
            let code = (key.0 >> (4 * i)) & 0xF;
            state.slots[i] = match code {
                0 => Slot::Table,
                0xF => Slot::Held,
                c => Slot::On((c - 1) as u8),
            };
        }
        state.validate()?;
        if state.key() != key {
            return Err(DomainError::InvalidState(format!("malformed key {key}")));
        }
        Ok(state)
    }
}

impl fmt::Debug for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WorldState({self})")
    }
}

/// Compact form: stacks bottom to top in brackets, then the hand, e.g. `[CB] [A] hand:-`.
impl fmt::Display for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for stack in self.stacks() {
            write!(f, "[")?;
            for b in stack {
                write!(f, "{b}")?;
            }
            write!(f, "] ")?;
        }
        match self.held() {
            Some(h) => write!(f, "hand:{h}"),
            None => write!(f, "hand:-"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    support: std::collections::BTreeMap<u8, Support>,
    held: Option<u8>,
}

impl Serialize for WorldState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let support = self
            .blocks()
            .filter_map(|b| self.support(b).map(|s| (b.0, s)))
            .collect();
        StateRepr {
            support,
            held: self.held().map(|b| b.0),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WorldState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = StateRepr::deserialize(deserializer)?;
        let n = repr.support.len() + usize::from(repr.held.is_some());
        WorldState::from_support(
            n,
            repr.support.into_iter().map(|(b, s)| (BlockId(b), s)),
            repr.held.map(BlockId),
        )
        .map_err(D::Error::custom)
    }
}

/// Opaque, totally ordered identity of a [`WorldState`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey(pub u64);

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for StateKey {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s, 16)
            .map(StateKey)
            .map_err(|_| DomainError::Parse(format!("bad state key `{s}`")))
    }
}

impl Serialize for StateKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Every hand-empty configuration of `n` blocks, sorted by key.
pub fn hand_empty_states(n: usize) -> Result<Vec<WorldState>, DomainError> {
    if n == 0 || n > MAX_BLOCKS {
        return Err(DomainError::BlockCount(n));
    }
    // Insert each new block at every position of every stack, or as a new stack.
    let mut towers: Vec<Vec<Vec<BlockId>>> = vec![vec![vec![BlockId(0)]]];
    for next in 1..n {
        let b = BlockId(next as u8);
        let mut grown = Vec::new();
        for stacks in &towers {
            let mut alone = stacks.clone();
            alone.push(vec![b]);
            grown.push(alone);
            for (i, stack) in stacks.iter().enumerate() {
                for pos in 0..=stack.len() {
                    let mut placed = stacks.clone();
                    placed[i].insert(pos, b);
                    grown.push(placed);
                }
            }
        }
        towers = grown;
    }
    let mut states = towers
        .iter()
        .map(|stacks| WorldState::from_stacks(n, stacks, None))
        .collect::<Result<Vec<_>, _>>()?;
    states.sort_by_key(|s| s.key());
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(i: u8) -> BlockId {
        BlockId(i)
    }

    #[test]
    fn stacks_round_trip() {
        let s = WorldState::from_stacks(4, &[vec![b(2), b(1)], vec![b(0)]], Some(b(3))).unwrap();
        assert_eq!(s.stacks(), vec![vec![b(0)], vec![b(2), b(1)]]);
        assert_eq!(s.held(), Some(b(3)));
        assert!(s.is_clear(b(1)));
        assert!(!s.is_clear(b(2)));
        assert!(!s.is_clear(b(3)));
        assert_eq!(s.to_string(), "[A] [CB] hand:D");
    }

    #[test]
    fn rejects_bad_configurations() {
        assert!(WorldState::from_stacks(2, &[vec![b(0)]], None).is_err());
        assert!(WorldState::from_stacks(2, &[vec![b(0), b(0)]], Some(b(1))).is_err());
        let cyc = WorldState::from_support(
            2,
            [(b(0), Support::Block(b(1))), (b(1), Support::Block(b(0)))],
            None,
        );
        assert!(cyc.is_err());
        let two_on_one = WorldState::from_support(
            3,
            [
                (b(0), Support::Table),
                (b(1), Support::Block(b(0))),
                (b(2), Support::Block(b(0))),
            ],
            None,
        );
        assert!(two_on_one.is_err());
        assert!(WorldState::all_on_table(0).is_err());
        assert!(WorldState::all_on_table(MAX_BLOCKS + 1).is_err());
    }

    #[test]
    fn key_round_trips() {
        let s = WorldState::from_stacks(3, &[vec![b(2), b(1)]], Some(b(0))).unwrap();
        let key = s.key();
        assert_eq!(WorldState::from_key(key).unwrap(), s);
        let text = key.to_string();
        assert_eq!(text.parse::<StateKey>().unwrap(), key);
        let json = serde_json::to_string(&key).unwrap();
        assert_eq!(serde_json::from_str::<StateKey>(&json).unwrap(), key);
    }

    #[test]
    fn serde_form() {
        let s = WorldState::from_stacks(3, &[vec![b(2), b(1)]], Some(b(0))).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"support":{"1":2,"2":"table"},"held":0}"#);
        assert_eq!(serde_json::from_str::<WorldState>(&json).unwrap(), s);
    }

    #[test]
    fn hand_empty_enumeration_sizes() {
        let counts: Vec<usize> = (1..=6).map(|n| hand_empty_states(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 3, 13, 73, 501, 4051]);
    }
}
