//! Server selection: round robin, weighted round robin, least-connection,
//! weighted least-connection and adaptive weighted least-connection.
//!
//! Every selector scans servers in ascending index order and only replaces
//! the incumbent on a strict improvement, so ties always keep the earliest
//! candidate. Selectors never mutate counters; call [`on_assign`] with the
//! chosen server afterwards.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ServerId, ServerState, TaskClass, WeightParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchedulerError {
    #[error("no server available")]
    NoServerAvailable,
    #[error("cannot assign a task to down server {0}")]
    AssignToDeadServer(ServerId),
    #[error("server {server} has no {class} task to complete")]
    CompleteWithoutAssign { server: ServerId, class: TaskClass },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Rr,
    Wrr,
    Lc,
    Wlc,
    Awlc,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        SchedulerKind::Rr,
        SchedulerKind::Wrr,
        SchedulerKind::Lc,
        SchedulerKind::Wlc,
        SchedulerKind::Awlc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Rr => "rr",
            SchedulerKind::Wrr => "wrr",
            SchedulerKind::Lc => "lc",
            SchedulerKind::Wlc => "wlc",
            SchedulerKind::Awlc => "awlc",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| format!("unknown scheduler '{s}' (expected rr, wrr, lc, wlc or awlc)"))
    }
}

/// Rotation state for the interleaved weighted round robin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WrrCursor {
    /// Last index visited; `None` before the first call.
    pub index: Option<usize>,
    /// Current weight threshold.
    pub current_weight: u64,
}

/// A scheduler instance: the algorithm plus the rotation state the static
/// baselines need.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState {
    pub kind: SchedulerKind,
    /// Index of the server RR picked last.
    pub rr_cursor: usize,
    pub wrr: WrrCursor,
}

impl SchedulerState {
    pub fn new(kind: SchedulerKind) -> Self {
        SchedulerState {
            kind,
            rr_cursor: 0,
            wrr: WrrCursor::default(),
        }
    }

    /// Picks a server for a new task. AWLC expects dynamic weights to be fresh.
    pub fn select(
        &mut self,
        fleet: &[ServerState],
        params: &WeightParams,
    ) -> Result<ServerId, SchedulerError> {
        match self.kind {
            SchedulerKind::Rr => rr_select(fleet, &mut self.rr_cursor),
            SchedulerKind::Wrr => wrr_select(fleet, &mut self.wrr),
            SchedulerKind::Lc => lc_select(fleet),
            SchedulerKind::Wlc => wlc_select(fleet),
            SchedulerKind::Awlc => awlc_select(fleet, params),
        }
    }
}

/// Next alive server after `cursor` in cyclic index order.
pub fn rr_select(fleet: &[ServerState], cursor: &mut usize) -> Result<ServerId, SchedulerError> {
    let n = fleet.len();
    (1..=n)
        .map(|step| (*cursor + step) % n)
        .find(|&i| fleet[i].alive)
        .map(|i| {
            *cursor = i;
            ServerId(i)
        })
        .ok_or(SchedulerError::NoServerAvailable)
}

fn wrr_weight(s: &ServerState) -> u64 {
    if s.alive && s.static_weight > 0.0 {
        s.static_weight.ceil() as u64
    } else {
        0
    }
}

/// Interleaved weighted round robin (threshold stepped down by the weights'
/// gcd). Real-valued static weights are rounded up to integers.
pub fn wrr_select(fleet: &[ServerState], cursor: &mut WrrCursor) -> Result<ServerId, SchedulerError> {
    let weights: Vec<u64> = fleet.iter().map(wrr_weight).collect();
    let max = weights.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(SchedulerError::NoServerAvailable);
    }
    let gcd = weights
        .iter()
        .copied()
        .filter(|w| *w > 0)
        .fold(0, num_integer::gcd);
    let n = fleet.len();
    let mut i = cursor.index.map_or(n - 1, |i| i.min(n - 1));
    let mut cw = cursor.current_weight.min(max);
    loop {
        i = (i + 1) % n;
        if i == 0 {
            cw = cw.saturating_sub(gcd);
            if cw == 0 {
                cw = max;
            }
        }
        if weights[i] >= cw && weights[i] > 0 {
            cursor.index = Some(i);
            cursor.current_weight = cw;
            return Ok(ServerId(i));
        }
    }
}

/// Alive server with the fewest connections; ties go to the lowest index.
pub fn lc_select(fleet: &[ServerState]) -> Result<ServerId, SchedulerError> {
    fleet
        .iter()
        .filter(|s| s.alive)
        .min_by_key(|s| s.connections)
        .map(|s| s.id)
        .ok_or(SchedulerError::NoServerAvailable)
}

/// True iff candidate `i` strictly beats incumbent `m` on connections per
/// unit weight, i.e. `C(m)·W(i) > C(i)·W(m)`. Caller guarantees `w_i > 0`.
pub fn wlc_prefers(c_m: u64, w_m: f64, c_i: u64, w_i: f64) -> bool {
    c_m as f64 * w_i > c_i as f64 * w_m
}

fn wlc_weight(s: &ServerState) -> f64 {
    if s.alive {
        s.static_weight
    } else {
        0.0
    }
}

/// Weighted least-connection over static weights. The first positive-weight
/// server becomes the incumbent; later servers replace it only on a strict
/// improvement.
pub fn wlc_select(fleet: &[ServerState]) -> Result<ServerId, SchedulerError> {
    let Some(first) = fleet.iter().position(|s| wlc_weight(s) > 0.0) else {
        return Err(SchedulerError::NoServerAvailable);
    };
    let mut m = first;
    for i in first + 1..fleet.len() {
        let (sm, si) = (&fleet[m], &fleet[i]);
        if wlc_prefers(sm.connections, wlc_weight(sm), si.connections, wlc_weight(si)) {
            m = i;
        }
    }
    Ok(fleet[m].id)
}

/// Real-time load: sum over classes of `count * class weight`.
pub fn awlc_load(s: &ServerState, params: &WeightParams) -> f64 {
    s.class_counts
        .iter()
        .zip(params.class_weights.iter())
        .map(|(c, p)| *c as f64 * p)
        .sum()
}

/// True iff candidate `i` has a strictly smaller load/weight ratio than
/// incumbent `m`, evaluated as `load_i·W(m) < load_m·W(i)`.
pub fn awlc_prefers(load_m: f64, w_m: f64, load_i: f64, w_i: f64) -> bool {
    load_i * w_m < load_m * w_i
}

/// Adaptive weighted least-connection: class-weighted load against the
/// dynamic weight.
pub fn awlc_select(fleet: &[ServerState], params: &WeightParams) -> Result<ServerId, SchedulerError> {
    let Some(first) = fleet.iter().position(|s| s.dynamic_weight > 0.0) else {
        return Err(SchedulerError::NoServerAvailable);
    };
    let mut m = first;
    let mut load_m = awlc_load(&fleet[m], params);
    for (i, s) in fleet.iter().enumerate().skip(first + 1) {
        let load_i = awlc_load(s, params);
        if awlc_prefers(load_m, fleet[m].dynamic_weight, load_i, s.dynamic_weight) {
            m = i;
            load_m = load_i;
        }
    }
    Ok(fleet[m].id)
}

/// Records a newly assigned task of `class` on `s`.
pub fn on_assign(s: &mut ServerState, class: TaskClass) -> Result<(), SchedulerError> {
    if !s.alive {
        return Err(SchedulerError::AssignToDeadServer(s.id));
    }
    s.class_counts[class.index()] += 1;
    s.connections += 1;
    Ok(())
}

/// Records the completion of a task of `class` on `s`.
pub fn on_complete(s: &mut ServerState, class: TaskClass) -> Result<(), SchedulerError> {
    let slot = &mut s.class_counts[class.index()];
    if *slot == 0 || s.connections == 0 {
        return Err(SchedulerError::CompleteWithoutAssign { server: s.id, class });
    }
    *slot -= 1;
    s.connections -= 1;
    Ok(())
}
