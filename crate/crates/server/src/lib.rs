//! HTTP service and command-line entry points for pulsechat.
//!
//! The service keeps every live session in memory behind a per-session lock
//! and persists each command's events before answering. On startup the event
//! log is replayed, so a restart resumes every conversation where it stopped.

pub mod cli;
pub mod config;
pub mod error;
pub mod routes;
pub mod state;

pub use config::{ConfigError, SeedMode, ServiceConfig};
pub use error::ApiError;
pub use routes::router;
pub use state::{AppState, Resources};
