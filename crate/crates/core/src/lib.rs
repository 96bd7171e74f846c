//! Load-balancing schedulers for distributing offloaded tasks across
//! heterogeneous servers, with a deterministic simulator to compare them.
//!
//! Five selectors are provided: round robin, weighted round robin,
//! least-connection (LC), weighted least-connection (WLC) and adaptive
//! weighted least-connection (AWLC). AWLC replaces WLC's fixed
//! administrator weights with a weight recomputed from CPU and memory idle
//! rates before every assignment, and measures load as a class-weighted
//! task count instead of a plain connection count.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN too

pub mod config;
pub mod domain;
pub mod metrics;
pub mod report;
pub mod schedulers;
pub mod simulator;
pub mod telemetry;

pub use config::{ArrivalMode, ConfigError, ResourceSpec, ScenarioConfig, SpeedDistribution, UniformRange};
pub use domain::{validate_server, ServerId, ServerState, TaskClass, TaskSpec, Violation, WeightParams};
pub use metrics::{mean, stddev, summarize, MetricsError, SummaryRow};
pub use schedulers::{SchedulerError, SchedulerKind, SchedulerState};
pub use simulator::{
    compare_schedulers, run_replications, run_scenario, Assignment, Comparison, ScenarioResult, SimError,
};
pub use telemetry::{ResourceModel, TelemetryError, TelemetryRecord};
