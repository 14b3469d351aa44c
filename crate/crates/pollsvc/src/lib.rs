//! Live preference elicitation: polls, resumable sessions and aggregation,
//! served over HTTP and persisted to an append-only log.

pub mod engine;
pub mod http;
pub mod model;
pub mod service;
pub mod store;

pub use service::{Clock, ManualClock, PollService, ServiceConfig, ServiceError, SystemClock};
