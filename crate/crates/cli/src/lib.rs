//! Scenario-driven front end for the qsync simulator: config parsing,
//! backend dispatch, parameter sweeps, backend comparison and the on-disk
//! CSV/JSON formats.

pub mod backend;
pub mod error;
pub mod output;
pub mod progfmt;
pub mod scenario;
pub mod sweep;

pub use backend::{compare_backends, detect_transition, run_backend, RunOutput};
pub use error::{CliError, Result};
pub use scenario::{parse_scenario, Backend, Scenario};
