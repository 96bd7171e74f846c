//! Scenario configuration and its TOML file format.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{WeightParams, DEFAULT_IDLE_FLOOR};
use crate::schedulers::SchedulerKind;
use crate::telemetry::ResourceModel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Closed interval `[lo, hi]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformRange {
    pub lo: f64,
    pub hi: f64,
}

impl UniformRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        UniformRange { lo, hi }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn is_valid(&self) -> bool {
        self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrivalMode {
    /// All tasks present at t = 0 and assigned back to back.
    #[default]
    Batch,
    /// Exponential inter-arrival times with the given rate (tasks/second).
    Poisson { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SpeedDistribution {
    Uniform(UniformRange),
    Explicit(Vec<f64>),
}

/// How the simulated CPU/memory footprint of each class is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ResourceSpec {
    Explicit(ResourceModel),
    /// Footprints scaled so the whole workload, spread evenly, would occupy
    /// `target_utilization` of the fleet's CPU and memory. CPU footprint
    /// follows each class's mean demand, memory footprint its class weight.
    Calibrated {
        target_utilization: f64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
}

fn default_floor() -> f64 {
    DEFAULT_IDLE_FLOOR
}

fn default_weight_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_servers: usize,
    pub n_tasks: usize,
    pub scheduler: SchedulerKind,
    pub seed: u64,
    #[serde(default)]
    pub arrival_mode: ArrivalMode,
    pub server_speeds: SpeedDistribution,
    /// Service demand range (work units) of M1..M4.
    pub class_demand: [UniformRange; 4],
    /// Probability of each class; must sum to 1.
    pub class_mix: [f64; 4],
    #[serde(default)]
    pub weight_params: WeightParams,
    pub resource_model: ResourceSpec,
    /// WLC/WRR static weight = max(1, round(speed * scale)).
    #[serde(default = "default_weight_scale")]
    pub static_weight_scale: f64,
    /// Indices of servers that are down for the whole run.
    #[serde(default)]
    pub down_servers: Vec<usize>,
}

impl ScenarioConfig {
    /// The reference setup: 15 heterogeneous servers, four equally likely
    /// task classes, batch arrival.
    pub fn reference(n_tasks: usize) -> Self {
        ScenarioConfig {
            n_servers: 15,
            n_tasks,
            scheduler: SchedulerKind::Awlc,
            seed: 1,
            arrival_mode: ArrivalMode::Batch,
            server_speeds: SpeedDistribution::Uniform(UniformRange::new(0.5, 2.0)),
            class_demand: [
                UniformRange::new(1.0, 5.0),
                UniformRange::new(5.0, 20.0),
                UniformRange::new(20.0, 80.0),
                UniformRange::new(80.0, 320.0),
            ],
            class_mix: [0.25; 4],
            weight_params: WeightParams::default(),
            resource_model: ResourceSpec::Calibrated {
                target_utilization: 0.9,
                floor: DEFAULT_IDLE_FLOOR,
            },
            static_weight_scale: 1.0,
            down_servers: Vec::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config always serializes")
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::from_toml_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.n_servers == 0 {
            problems.push("n_servers must be positive".to_string());
        }
        if self.n_tasks == 0 {
            problems.push("n_tasks must be positive".to_string());
        }
        if let ArrivalMode::Poisson { rate } = self.arrival_mode {
            if !(rate > 0.0 && rate.is_finite()) {
                problems.push(format!("poisson rate must be positive, got {rate}"));
            }
        }
        match &self.server_speeds {
            SpeedDistribution::Uniform(r) if !r.is_valid() => {
                problems.push("server speed range must satisfy 0 < lo <= hi".to_string())
            }
            SpeedDistribution::Explicit(speeds) => {
                if speeds.len() != self.n_servers {
                    problems.push(format!(
                        "explicit speed list has {} entries for {} servers",
                        speeds.len(),
                        self.n_servers
                    ));
                }
                if speeds.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    problems.push("server speeds must be positive".to_string());
                }
            }
            _ => {}
        }
        if self.class_demand.iter().any(|r| !r.is_valid()) {
            problems.push("class demand ranges must satisfy 0 < lo <= hi".to_string());
        }
        let mix_sum: f64 = self.class_mix.iter().sum();
        if self.class_mix.iter().any(|p| !(*p >= 0.0)) || (mix_sum - 1.0).abs() > 1e-9 {
            problems.push(format!(
                "class_mix must be non-negative and sum to 1, sums to {mix_sum}"
            ));
        }
        problems.extend(self.weight_params.validate());
        match &self.resource_model {
            ResourceSpec::Explicit(m) => problems.extend(m.validate()),
            ResourceSpec::Calibrated {
                target_utilization,
                floor,
            } => {
                if !(*target_utilization > 0.0 && target_utilization.is_finite()) {
                    problems.push("target_utilization must be positive".to_string());
                }
                if !(*floor > 0.0 && *floor <= 0.1) {
                    problems.push(format!("idle-rate floor must lie in (0, 0.1], got {floor}"));
                }
            }
        }
        if !(self.static_weight_scale > 0.0 && self.static_weight_scale.is_finite()) {
            problems.push("static_weight_scale must be positive".to_string());
        }
        if let Some(bad) = self.down_servers.iter().find(|i| **i >= self.n_servers) {
            problems.push(format!("down server {bad} out of range"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems.join("; ")))
        }
    }

    /// The concrete resource model for this scenario.
    pub fn resource_model(&self) -> ResourceModel {
        match &self.resource_model {
            ResourceSpec::Explicit(m) => m.clone(),
            ResourceSpec::Calibrated {
                target_utilization,
                floor,
            } => {
                let per_task = self.n_servers as f64 * target_utilization / self.n_tasks as f64;
                let mean_demand: f64 = self
                    .class_mix
                    .iter()
                    .zip(&self.class_demand)
                    .map(|(p, r)| p * r.midpoint())
                    .sum();
                let mean_weight: f64 = self
                    .class_mix
                    .iter()
                    .zip(&self.weight_params.class_weights)
                    .map(|(p, w)| p * w)
                    .sum();
                let cpu = std::array::from_fn(|j| {
                    (per_task * self.class_demand[j].midpoint() / mean_demand).min(1.0)
                });
                let mem = std::array::from_fn(|j| {
                    (per_task * self.weight_params.class_weights[j] / mean_weight).min(1.0)
                });
                ResourceModel {
                    cpu_demand: cpu,
                    mem_demand: mem,
                    floor: *floor,
                }
            }
        }
    }

    /// Administrator weight for a server of the given speed.
    pub fn static_weight_for(&self, speed: f64) -> f64 {
        (speed * self.static_weight_scale).round().max(1.0)
    }
}
