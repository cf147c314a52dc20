//! Command-line front end for the swarm caging simulator: scenario files,
//! CSV/JSON export and SVG figures.

pub mod app;
pub mod export;
pub mod metrics;
pub mod scenario;
pub mod svg;

pub use app::{CliError, RunRequest};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError};
