//! Cost-aware planning on budgeted BlocksWorld.

pub mod bench;
pub mod cost;
pub mod domain;
pub mod eval;
pub mod oracle;
pub mod scorer;
pub mod search;
pub(crate) mod util;
