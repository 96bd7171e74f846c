//! Core data types shared by the schedulers, telemetry, simulator and metrics.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Lowest idle rate a live server can report.
pub const DEFAULT_IDLE_FLOOR: f64 = 0.01;

/// Dense index of a server within one fleet (`0..n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServerId(pub usize);

impl ServerId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ServerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// Complexity class of an offloaded task. `M1` is the lightest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskClass {
    M1,
    M2,
    M3,
    M4,
}

impl TaskClass {
    pub const ALL: [TaskClass; 4] = [TaskClass::M1, TaskClass::M2, TaskClass::M3, TaskClass::M4];

    /// Zero-based slot used for per-class arrays.
    pub fn index(self) -> usize {
        match self {
            TaskClass::M1 => 0,
            TaskClass::M2 => 1,
            TaskClass::M3 => 2,
            TaskClass::M4 => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<TaskClass> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for TaskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.index() + 1)
    }
}

/// One participating node.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub id: ServerId,
    /// Work units processed per simulated second.
    pub speed: f64,
    pub cpu_idle_rate: f64,
    pub mem_idle_rate: f64,
    /// Administrator-set weight used by WRR and WLC.
    pub static_weight: f64,
    /// Weight derived from idle rates, used by AWLC. Zero iff the server is down.
    pub dynamic_weight: f64,
    /// Tasks assigned and not yet completed.
    pub connections: u64,
    pub class_counts: [u64; 4],
    pub alive: bool,
}

impl ServerState {
    /// A fresh, fully idle, live server with static weight 1.
    pub fn new(id: ServerId, speed: f64) -> Self {
        ServerState {
            id,
            speed,
            cpu_idle_rate: 1.0,
            mem_idle_rate: 1.0,
            static_weight: 1.0,
            dynamic_weight: 1.0,
            connections: 0,
            class_counts: [0; 4],
            alive: true,
        }
    }

    pub fn with_static_weight(mut self, weight: f64) -> Self {
        self.static_weight = weight;
        self
    }

    /// Marks the server as failed. A down server always carries weight 0.
    pub fn take_down(&mut self) {
        self.alive = false;
        self.dynamic_weight = 0.0;
    }

    pub fn class_count(&self, class: TaskClass) -> u64 {
        self.class_counts[class.index()]
    }
}

/// An offloaded unit of work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: u64,
    pub class: TaskClass,
    /// Work units; the time to serve it on a server is `service_demand / speed`.
    pub service_demand: f64,
    pub arrival_time: f64,
}

/// Coefficients of the dynamic weight formula plus the per-class task weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightParams {
    /// Importance of the CPU idle rate.
    pub k1: f64,
    /// Importance of the memory idle rate.
    pub k2: f64,
    /// `P1..P4`, nondecreasing with task complexity.
    pub class_weights: [f64; 4],
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            k1: 3.0 / 5.0,
            k2: 2.0 / 5.0,
            class_weights: [1.0, 2.0, 4.0, 8.0],
        }
    }
}

/// Tolerance for `k1 + k2 = 1` when the coefficients come from decimal text.
const COEFF_SUM_TOLERANCE: f64 = 1e-12;

impl WeightParams {
    pub fn class_weight(&self, class: TaskClass) -> f64 {
        self.class_weights[class.index()]
    }

    /// Returns a description of every broken invariant.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.k1 > 0.0 && self.k1 < 1.0) {
            problems.push(format!("k1 must lie in (0,1), got {}", self.k1));
        }
        if !(self.k2 > 0.0 && self.k2 < 1.0) {
            problems.push(format!("k2 must lie in (0,1), got {}", self.k2));
        }
        if !((self.k1 + self.k2 - 1.0).abs() <= COEFF_SUM_TOLERANCE) {
            problems.push(format!("k1 + k2 must equal 1, got {}", self.k1 + self.k2));
        }
        if self.class_weights.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            problems.push("class weights must be positive and finite".to_string());
        }
        if self.class_weights.windows(2).any(|w| w[0] > w[1]) {
            problems.push("class weights must be nondecreasing (P1 <= P2 <= P3 <= P4)".to_string());
        }
        problems
    }
}

/// A broken server invariant reported by [`validate_server`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ConnectionsMismatch { connections: u64, class_sum: u64 },
    DownServerWeight { weight: f64 },
    IdleRatesBothZero,
    IdleRateOutOfRange { which: &'static str, value: f64 },
    DynamicWeightOutOfRange { weight: f64 },
    NonPositiveSpeed { speed: f64 },
    NonPositiveStaticWeight { weight: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ConnectionsMismatch { connections, class_sum } => write!(
                f,
                "connections ({connections}) must equal the sum of class counts ({class_sum})"
            ),
            Violation::DownServerWeight { weight } => {
                write!(f, "down server must have weight 0 (has {weight})")
            }
            Violation::IdleRatesBothZero => write!(f, "idle rates cannot both be 0"),
            Violation::IdleRateOutOfRange { which, value } => {
                write!(f, "{which} idle rate {value} outside [0,1]")
            }
            Violation::DynamicWeightOutOfRange { weight } => {
                write!(f, "dynamic weight {weight} outside [0,1]")
            }
            Violation::NonPositiveSpeed { speed } => write!(f, "speed must be positive, got {speed}"),
            Violation::NonPositiveStaticWeight { weight } => {
                write!(f, "static weight must be positive, got {weight}")
            }
        }
    }
}

/// Checks every server invariant and returns all violations; empty means ok.
pub fn validate_server(s: &ServerState) -> Vec<Violation> {
    let mut out = Vec::new();

    let class_sum = s
        .class_counts
        .iter()
        .fold(0u64, |acc, c| acc.saturating_add(*c));
    if class_sum != s.connections {
        out.push(Violation::ConnectionsMismatch {
            connections: s.connections,
            class_sum,
        });
    }

    if !s.alive && s.dynamic_weight != 0.0 {
        out.push(Violation::DownServerWeight {
            weight: s.dynamic_weight,
        });
    }

    for (which, value) in [("cpu", s.cpu_idle_rate), ("memory", s.mem_idle_rate)] {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::IdleRateOutOfRange { which, value });
        }
    }
    if s.alive && s.cpu_idle_rate == 0.0 && s.mem_idle_rate == 0.0 {
        out.push(Violation::IdleRatesBothZero);
    }

    if !(0.0..=1.0).contains(&s.dynamic_weight) {
        out.push(Violation::DynamicWeightOutOfRange {
            weight: s.dynamic_weight,
        });
    }
    if !(s.speed > 0.0) || !s.speed.is_finite() {
        out.push(Violation::NonPositiveSpeed { speed: s.speed });
    }
    if !(s.static_weight > 0.0) || !s.static_weight.is_finite() {
        out.push(Violation::NonPositiveStaticWeight {
            weight: s.static_weight,
        });
    }
    out
}
