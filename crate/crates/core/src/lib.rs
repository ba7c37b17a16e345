//! Hourly selection of microservice versions and replica counts under a
//! carbon budget, plus a trace-driven simulator comparing the optimal
//! selector against fixed-menu baselines.
//!
//! The pipeline: an [`ApplicationModel`](model::ApplicationModel) describes
//! the service chain; [`traces`] supplies per-hour carbon intensity, workload
//! and budget; [`strategies`] pick a configuration for each hour using the
//! [`engine`] to score it; [`sim`] runs that loop and aggregates the results.

pub mod cli;
pub mod engine;
pub mod error;
pub mod flight_booking;
pub mod model;
pub mod report;
pub mod sim;
pub mod strategies;
pub mod traces;

pub use engine::{evaluate_config, DeploymentPlan};
pub use error::{Error, Result};
pub use model::{config_space, parse_application, ApplicationModel, Configuration};
pub use strategies::{optimal_select, Strategy, StrategyKind, StrategyOutcome};
