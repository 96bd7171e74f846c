//! Dynamic server weights from CPU and memory idle rates.
//!
//! Weights come either from a simulated [`ResourceModel`] (idle capacity
//! shrinks with the tasks a server holds) or from recorded telemetry lines
//! replayed through [`apply_telemetry`].

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ServerId, ServerState, WeightParams, DEFAULT_IDLE_FLOOR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TelemetryError {
    #[error("idle rate {0} outside (0, 1]")]
    InvalidIdleRate(f64),
    #[error("malformed telemetry record: {0}")]
    MalformedRecord(String),
    #[error("unknown server {0}")]
    UnknownServer(ServerId),
    #[error("non-monotonic time: {time} after {previous}")]
    NonMonotonicTime { previous: f64, time: f64 },
}

/// A telemetry failure tied to its 1-based line in a replay stream.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {error}")]
pub struct ReplayError {
    pub line: usize,
    pub error: TelemetryError,
}

/// Per-class CPU and memory footprint of one active task, as a fraction of
/// a mean-speed server's capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceModel {
    pub cpu_demand: [f64; 4],
    pub mem_demand: [f64; 4],
    /// Lowest idle rate reported for a live server.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_IDLE_FLOOR
}

impl ResourceModel {
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.floor > 0.0 && self.floor <= 0.1) {
            problems.push(format!("idle-rate floor must lie in (0, 0.1], got {}", self.floor));
        }
        let demands = self.cpu_demand.iter().chain(self.mem_demand.iter());
        if demands.clone().any(|d| !(0.0..=1.0).contains(d)) {
            problems.push("resource demands must lie in [0, 1]".to_string());
        }
        problems
    }
}

/// One recorded sample of a server's idle rates.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    pub time: f64,
    pub server: ServerId,
    pub cpu_idle_rate: f64,
    pub mem_idle_rate: f64,
}

fn check_rate(rate: f64) -> Result<f64, TelemetryError> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(rate)
    } else {
        Err(TelemetryError::InvalidIdleRate(rate))
    }
}

/// `k1·vc + k2·vm`. Both rates must lie in `(0, 1]`.
pub fn compute_weight(vc: f64, vm: f64, params: &WeightParams) -> Result<f64, TelemetryError> {
    let vc = check_rate(vc)?;
    let vm = check_rate(vm)?;
    Ok(params.k1 * vc + params.k2 * vm)
}

/// Idle rates implied by the tasks `s` currently holds.
///
/// A server `speed / mean_fleet_speed` times as fast as average has that
/// much more capacity, so the same tasks use a smaller share of it. Both
/// rates are clamped to `[floor, 1]`.
pub fn derive_idle_rates(s: &ServerState, model: &ResourceModel, mean_fleet_speed: f64) -> (f64, f64) {
    let normalizer = s.speed / mean_fleet_speed;
    let used = |demand: &[f64; 4]| -> f64 {
        s.class_counts
            .iter()
            .zip(demand)
            .map(|(c, d)| *c as f64 * d)
            .sum::<f64>()
            / normalizer
    };
    let idle = |u: f64| {
        let v = 1.0 - u;
        // NaN (e.g. zero speed) falls through to the floor.
        if v >= model.floor {
            v.min(1.0)
        } else {
            model.floor
        }
    };
    (idle(used(&model.cpu_demand)), idle(used(&model.mem_demand)))
}

pub fn mean_speed(fleet: &[ServerState]) -> f64 {
    if fleet.is_empty() {
        return 1.0;
    }
    fleet.iter().map(|s| s.speed).sum::<f64>() / fleet.len() as f64
}

/// Recomputes idle rates and dynamic weights for every server. Down servers
/// get weight 0.
pub fn refresh_weights(fleet: &mut [ServerState], model: &ResourceModel, params: &WeightParams) {
    let mean = mean_speed(fleet);
    for s in fleet.iter_mut() {
        if !s.alive {
            s.dynamic_weight = 0.0;
            continue;
        }
        let (vc, vm) = derive_idle_rates(s, model, mean);
        s.cpu_idle_rate = vc;
        s.mem_idle_rate = vm;
        // Rates are clamped to [floor, 1] with floor > 0, so this cannot fail.
        s.dynamic_weight = compute_weight(vc, vm, params).unwrap_or(0.0);
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    t: f64,
    server: usize,
    vc: f64,
    vm: f64,
}

/// Parses one replay line, e.g. `{"t":0.0,"server":3,"vc":0.8,"vm":0.3}`.
pub fn parse_telemetry_line(line: &str) -> Result<TelemetryRecord, TelemetryError> {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        return Err(TelemetryError::MalformedRecord("empty line".to_string()));
    }
    let wire: WireRecord =
        serde_json::from_str(trimmed).map_err(|e| TelemetryError::MalformedRecord(e.to_string()))?;
    if !(wire.t >= 0.0) || !wire.t.is_finite() {
        return Err(TelemetryError::MalformedRecord(format!(
            "time must be a non-negative number, got {}",
            wire.t
        )));
    }
    Ok(TelemetryRecord {
        time: wire.t,
        server: ServerId(wire.server),
        cpu_idle_rate: check_rate(wire.vc)?,
        mem_idle_rate: check_rate(wire.vm)?,
    })
}

/// Reads a whole replay stream. `#` comment lines and blank lines are
/// skipped; timestamps must be non-decreasing. Returns each record with its
/// 1-based line number.
pub fn read_telemetry<R: BufRead>(reader: R) -> Result<Vec<(usize, TelemetryRecord)>, ReplayError> {
    let mut out: Vec<(usize, TelemetryRecord)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| ReplayError {
            line: line_no,
            error: TelemetryError::MalformedRecord(e.to_string()),
        })?;
        let trimmed = line.trim_start();
        if trimmed.starts_with('#') || trimmed.is_empty() {
            continue;
        }
        let record = parse_telemetry_line(&line).map_err(|error| ReplayError { line: line_no, error })?;
        if let Some((_, prev)) = out.last() {
            if record.time < prev.time {
                return Err(ReplayError {
                    line: line_no,
                    error: TelemetryError::NonMonotonicTime {
                        previous: prev.time,
                        time: record.time,
                    },
                });
            }
        }
        out.push((line_no, record));
    }
    Ok(out)
}

/// Stores the recorded idle rates on the target server and recomputes its
/// weight. A down server keeps weight 0.
pub fn apply_telemetry(
    fleet: &mut [ServerState],
    record: &TelemetryRecord,
    params: &WeightParams,
) -> Result<(), TelemetryError> {
    let s = fleet
        .get_mut(record.server.index())
        .ok_or(TelemetryError::UnknownServer(record.server))?;
    let weight = compute_weight(record.cpu_idle_rate, record.mem_idle_rate, params)?;
    s.cpu_idle_rate = record.cpu_idle_rate;
    s.mem_idle_rate = record.mem_idle_rate;
    s.dynamic_weight = if s.alive { weight } else { 0.0 };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedulers::on_assign;
    use crate::domain::TaskClass;
    use proptest::prelude::*;

    fn model() -> ResourceModel {
        ResourceModel {
            cpu_demand: [0.1, 0.2, 0.3, 0.4],
            mem_demand: [0.05, 0.1, 0.15, 0.2],
            floor: 0.01,
        }
    }

    fn fleet(n: usize) -> Vec<ServerState> {
        (0..n).map(|i| ServerState::new(ServerId(i), 1.0)).collect()
    }

    #[test]
    fn compute_weight_examples() {
        let p = WeightParams::default();
        assert_eq!(compute_weight(0.5, 0.5, &p).unwrap(), 0.5);
        assert_eq!(compute_weight(1.0, 1.0, &p).unwrap(), 1.0);
        // 0.6*0.8 + 0.4*0.3 = 0.48 + 0.12
        assert!((compute_weight(0.8, 0.3, &p).unwrap() - 0.60).abs() < 1e-15);
    }

    #[test]
    fn compute_weight_rejects_out_of_range() {
        let p = WeightParams::default();
        assert_eq!(compute_weight(0.0, 0.5, &p), Err(TelemetryError::InvalidIdleRate(0.0)));
        assert_eq!(compute_weight(0.5, 1.5, &p), Err(TelemetryError::InvalidIdleRate(1.5)));
        assert!(compute_weight(f64::NAN, 0.5, &p).is_err());
    }

    #[test]
    fn idle_rates_examples() {
        let m = model();
        let mut s = ServerState::new(ServerId(0), 1.0);
        assert_eq!(derive_idle_rates(&s, &m, 1.0), (1.0, 1.0));

        on_assign(&mut s, TaskClass::M1).unwrap();
        let (vc, vm) = derive_idle_rates(&s, &m, 1.0);
        assert!((vc - 0.9).abs() < 1e-15);
        assert!((vm - 0.95).abs() < 1e-15);

        for _ in 0..10 {
            on_assign(&mut s, TaskClass::M4).unwrap();
        }
        assert_eq!(derive_idle_rates(&s, &m, 1.0).0, 0.01);
    }

    #[test]
    fn faster_server_depletes_slower() {
        let m = model();
        let mut slow = ServerState::new(ServerId(0), 1.0);
        let mut fast = ServerState::new(ServerId(1), 3.0);
        on_assign(&mut slow, TaskClass::M2).unwrap();
        on_assign(&mut fast, TaskClass::M2).unwrap();
        // mean speed 2: normalizers 0.5 and 1.5
        let (vc_slow, _) = derive_idle_rates(&slow, &m, 2.0);
        let (vc_fast, _) = derive_idle_rates(&fast, &m, 2.0);
        assert!((vc_slow - 0.6).abs() < 1e-12);
        assert!((vc_fast - (1.0 - 0.2 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn refresh_weights_examples() {
        let p = WeightParams::default();
        let m = model();
        let mut f = fleet(3);
        refresh_weights(&mut f, &m, &p);
        assert!(f.iter().all(|s| s.dynamic_weight == 1.0));

        f[1].alive = false;
        refresh_weights(&mut f, &m, &p);
        assert_eq!(f[1].dynamic_weight, 0.0);
        assert_eq!(f[0].dynamic_weight, 1.0);
        assert_eq!(f[2].dynamic_weight, 1.0);
    }

    #[test]
    fn refresh_weights_decreases_with_load() {
        let p = WeightParams::default();
        let m = model();
        let mut f = fleet(4);
        for (i, s) in f.iter_mut().enumerate() {
            for _ in 0..i {
                on_assign(s, TaskClass::M2).unwrap();
            }
        }
        refresh_weights(&mut f, &m, &p);
        // Hand values: vc = 1 - 0.2i, vm = 1 - 0.1i, W = 1 - 0.16i.
        for (i, s) in f.iter().enumerate() {
            assert!((s.dynamic_weight - (1.0 - 0.16 * i as f64)).abs() < 1e-12);
        }
        assert!(f.windows(2).all(|w| w[0].dynamic_weight > w[1].dynamic_weight));
    }

    #[test]
    fn parse_examples() {
        let r = parse_telemetry_line(r#"{"t":0.0,"server":3,"vc":0.8,"vm":0.3}"#).unwrap();
        assert_eq!(
            r,
            TelemetryRecord {
                time: 0.0,
                server: ServerId(3),
                cpu_idle_rate: 0.8,
                mem_idle_rate: 0.3
            }
        );
        assert_eq!(
            parse_telemetry_line(r#"{"t":1.0,"server":0,"vc":1.5,"vm":0.5}"#),
            Err(TelemetryError::InvalidIdleRate(1.5))
        );
        assert!(matches!(parse_telemetry_line(""), Err(TelemetryError::MalformedRecord(_))));
        assert!(matches!(
            parse_telemetry_line(r#"{"t":1.0,"server":0,"vc":0.5}"#),
            Err(TelemetryError::MalformedRecord(_))
        ));
        assert!(matches!(
            parse_telemetry_line(r#"{"t":1.0,"server":0,"vc":0.5,"vm":0.5,"x":1}"#),
            Err(TelemetryError::MalformedRecord(_))
        ));
        assert!(matches!(
            parse_telemetry_line(r#"{"t":-1.0,"server":0,"vc":0.5,"vm":0.5}"#),
            Err(TelemetryError::MalformedRecord(_))
        ));
    }

    #[test]
    fn apply_examples() {
        let p = WeightParams::default();
        let mut f = fleet(5);
        let rec = |server, vc, vm| TelemetryRecord {
            time: 0.0,
            server: ServerId(server),
            cpu_idle_rate: vc,
            mem_idle_rate: vm,
        };
        apply_telemetry(&mut f, &rec(2, 0.5, 0.5), &p).unwrap();
        assert_eq!(f[2].dynamic_weight, 0.5);

        f[3].take_down();
        apply_telemetry(&mut f, &rec(3, 0.7, 0.2), &p).unwrap();
        assert_eq!((f[3].cpu_idle_rate, f[3].mem_idle_rate), (0.7, 0.2));
        assert_eq!(f[3].dynamic_weight, 0.0);

        assert_eq!(
            apply_telemetry(&mut f, &rec(9, 0.5, 0.5), &p),
            Err(TelemetryError::UnknownServer(ServerId(9)))
        );
    }

    #[test]
    fn read_stream_skips_comments_and_checks_order() {
        let text = "# header\n{\"t\":0,\"server\":0,\"vc\":0.5,\"vm\":0.5}\n\n{\"t\":1,\"server\":1,\"vc\":0.4,\"vm\":0.9}\n";
        let recs = read_telemetry(text.as_bytes()).unwrap();
        assert_eq!(recs.iter().map(|(l, _)| *l).collect::<Vec<_>>(), vec![2, 4]);

        let bad = "{\"t\":2,\"server\":0,\"vc\":0.5,\"vm\":0.5}\n{\"t\":1,\"server\":0,\"vc\":0.5,\"vm\":0.5}\n";
        let err = read_telemetry(bad.as_bytes()).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.error, TelemetryError::NonMonotonicTime { .. }));

        let zero = "{\"t\":0,\"server\":0,\"vc\":0,\"vm\":0.5}\n";
        let err = read_telemetry(zero.as_bytes()).unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.error, TelemetryError::InvalidIdleRate(0.0));
    }

    proptest! {
        #[test]
        fn weight_is_monotone_and_bounded(
            vc in 1e-6f64..=1.0, vm in 1e-6f64..=1.0, d in 0.0f64..0.5, k1 in 0.01f64..0.99
        ) {
            let p = WeightParams { k1, k2: 1.0 - k1, ..WeightParams::default() };
            let w = compute_weight(vc, vm, &p).unwrap();
            prop_assert!(w > 0.0 && w <= 1.0 + 1e-15);
            let vc2 = (vc + d).min(1.0);
            let vm2 = (vm + d).min(1.0);
            prop_assert!(compute_weight(vc2, vm, &p).unwrap() >= w);
            prop_assert!(compute_weight(vc, vm2, &p).unwrap() >= w);
        }

        #[test]
        fn idle_rates_stay_in_range(
            counts in any::<[u32; 4]>(),
            speed in 1e-3f64..100.0,
            mean in 1e-3f64..100.0,
            cpu in proptest::array::uniform4(0.0f64..=1.0),
            mem in proptest::array::uniform4(0.0f64..=1.0),
            floor in 1e-6f64..=0.1,
        ) {
            let mut s = ServerState::new(ServerId(0), speed);
            s.class_counts = counts.map(u64::from);
            let m = ResourceModel { cpu_demand: cpu, mem_demand: mem, floor };
            let (vc, vm) = derive_idle_rates(&s, &m, mean);
            prop_assert!(vc > 0.0 && vc <= 1.0);
            prop_assert!(vm > 0.0 && vm <= 1.0);
        }

        #[test]
        fn refresh_is_idempotent(counts in proptest::collection::vec(any::<[u8; 4]>(), 1..8)) {
            let p = WeightParams::default();
            let m = ResourceModel { cpu_demand: [0.01, 0.02, 0.04, 0.08], mem_demand: [0.02; 4], floor: 0.01 };
            let mut f: Vec<ServerState> = counts.iter().enumerate().map(|(i, c)| {
                let mut s = ServerState::new(ServerId(i), 0.5 + i as f64 * 0.25);
                s.class_counts = c.map(u64::from);
                s.connections = s.class_counts.iter().sum();
                s
            }).collect();
            refresh_weights(&mut f, &m, &p);
            let once = f.clone();
            refresh_weights(&mut f, &m, &p);
            prop_assert_eq!(once, f);
        }
    }
}
