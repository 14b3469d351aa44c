//! Aggregation and consistency analysis of elicited profiles.

mod aggregate;
mod axes;
mod feasibility;

use thiserror::Error;

pub use aggregate::{aggregate_ranking, median_peak_winner, pairwise_matrix, PairwiseMatrix};
pub use axes::{find_consistent_axes_bruteforce, DEFAULT_AXIS_CAP};
pub use feasibility::{is_cardinally_realizable, FeasibilitySystem, MAX_FEASIBILITY_VARIABLES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpverifyError {
    #[error("an odd number of votes is required, got {0}")]
    EvenVoters(usize),
    #[error("pairwise majorities contain a cycle")]
    CycleDetected,
    #[error("{what} exceeds the cap: {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("profile and axis disagree on the number of alternatives: {profile} vs {axis}")]
    SizeMismatch { profile: usize, axis: usize },
}
