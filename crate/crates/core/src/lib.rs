//! Elicitation of single-peaked preferences through pairwise comparison queries.
//!
//! The crate is organised around the [`Oracle`](oracle::Oracle) contract: every
//! elicitation algorithm talks to an agent exclusively through `query(a, b)`,
//! which answers whether `a` is strictly preferred to `b`. Oracles can be
//! simulated agents, caches, adversaries or proxies for humans answering over
//! the wire.
//!
//! - [`types`]: alternatives, axes, rankings, profiles and cardinal layouts.
//! - [`oracle`]: the query contract and its standard implementations.
//! - [`single_peaked`]: single-peakedness checks and exhaustive enumeration.
//! - [`elicit`]: the elicitation algorithms and the robust wrapper.
//! - [`spverify`]: aggregation and consistency analysis of elicited profiles.
//! - [`text`]: the plain-text ranking, axis and profile formats.

pub mod elicit;
pub mod error;
pub mod oracle;
pub mod single_peaked;
pub mod spverify;
pub mod text;
pub mod types;

pub use error::CoreError;
pub use oracle::{Oracle, OracleError, QueryRecord};
pub use types::{
    AgentPosition, AlternativeId, CardinalLayout, OrdinalAxis, OrdinalPosition, Profile, Ranking,
};

/// `⌈log₂ n⌉` for `n ≥ 1`; zero for `n ≤ 1`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}
