//! Random instances, lower-bound adversaries and the experiment runner.

pub mod adversary;
pub mod experiment;
pub mod generate;
pub mod rng;

pub use rng::SplitMix64;
