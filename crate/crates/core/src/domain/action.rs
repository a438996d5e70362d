use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BlockId, DomainError};

/// The four action types. Declaration order is the canonical order used
/// everywhere actions are listed or tie-broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    PickUp,
    Unstack,
    PutDown,
    Stack,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::PickUp,
        ActionKind::Unstack,
        ActionKind::PutDown,
        ActionKind::Stack,
    ];

    /// Short code, as in the pu/un/pd/st column headers of cost tables.
    pub fn code(self) -> &'static str {
        match self {
            ActionKind::PickUp => "pu",
            ActionKind::Unstack => "un",
            ActionKind::PutDown => "pd",
            ActionKind::Stack => "st",
        }
    }
}

/// A ground BlocksWorld action. The derived `Ord` is the canonical action order:
/// by kind (PickUp < Unstack < PutDown < Stack), then by block ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    PickUp(BlockId),
    /// Unstack `.0` from on top of `.1`.
    Unstack(BlockId, BlockId),
    PutDown(BlockId),
    /// Stack `.0` on top of `.1`.
    Stack(BlockId, BlockId),
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::PickUp(_) => ActionKind::PickUp,
            Action::Unstack(..) => ActionKind::Unstack,
            Action::PutDown(_) => ActionKind::PutDown,
            Action::Stack(..) => ActionKind::Stack,
        }
    }

    /// The block being moved.
    pub fn block(&self) -> BlockId {
        match *self {
            Action::PickUp(b) | Action::PutDown(b) | Action::Unstack(b, _) | Action::Stack(b, _) => b,
        }
    }

    /// PickUp ↔ PutDown, Unstack ↔ Stack, with the same blocks.
    pub fn inverse(&self) -> Action {
        match *self {
            Action::PickUp(b) => Action::PutDown(b),
            Action::PutDown(b) => Action::PickUp(b),
            Action::Unstack(b, x) => Action::Stack(b, x),
            Action::Stack(b, x) => Action::Unstack(b, x),
        }
    }

    /// Every action literal over `n` blocks, including ones that are never applicable
    /// (`Stack(b, b)`); used by brute-force checks.
    pub fn all_literals(n: usize) -> Vec<Action> {
        let ids = || (0..n as u8).map(BlockId);
        let mut out = Vec::with_capacity(2 * n + 2 * n * n);
        out.extend(ids().map(Action::PickUp));
        out.extend(ids().flat_map(|b| ids().map(move |x| Action::Unstack(b, x))));
        out.extend(ids().map(Action::PutDown));
        out.extend(ids().flat_map(|b| ids().map(move |x| Action::Stack(b, x))));
        out
    }

    /// Prose form used in prompts and scorer payloads.
    pub fn describe(&self) -> String {
        match *self {
            Action::PickUp(b) => format!("pick up the {} block", b.label()),
            Action::Unstack(b, x) => format!(
                "unstack the {} block from on top of the {} block",
                b.label(),
                x.label()
            ),
            Action::PutDown(b) => format!("put down the {} block", b.label()),
            Action::Stack(b, x) => format!(
                "stack the {} block on top of the {} block",
                b.label(),
                x.label()
            ),
        }
    }
}

/// `pick-up(1)`, `unstack(0,2)`, `put-down(0)`, `stack(1,2)`.
impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::PickUp(b) => write!(f, "pick-up({})", b.0),
            Action::Unstack(b, x) => write!(f, "unstack({},{})", b.0, x.0),
            Action::PutDown(b) => write!(f, "put-down({})", b.0),
            Action::Stack(b, x) => write!(f, "stack({},{})", b.0, x.0),
        }
    }
}

impl FromStr for Action {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DomainError::Parse(format!("bad action `{s}`"));
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let ids = args
            .split(',')
            .map(|a| a.trim().parse::<u8>().map(BlockId).map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        match (name, ids.as_slice()) {
            ("pick-up", [b]) => Ok(Action::PickUp(*b)),
            ("put-down", [b]) => Ok(Action::PutDown(*b)),
            ("unstack", [b, x]) if b != x => Ok(Action::Unstack(*b, *x)),
            ("stack", [b, x]) if b != x => Ok(Action::Stack(*b, *x)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
