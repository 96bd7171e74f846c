//! Deterministic scenario engine.
//!
//! A scenario draws a heterogeneous fleet and a random workload from its
//! seed, drives one scheduler over them and reports per-server makespans.
//! Fleet and workload come from separate ChaCha8 streams, so every
//! scheduler run with the same seed sees identical servers and tasks.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use ordered_float::OrderedFloat;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ArrivalMode, ConfigError, ScenarioConfig, SpeedDistribution};
use crate::domain::{ServerId, ServerState, TaskClass, TaskSpec};
use crate::metrics;
use crate::schedulers::{on_assign, on_complete, SchedulerError, SchedulerKind, SchedulerState};
use crate::telemetry::refresh_weights;

const FLEET_STREAM: u64 = 0;
const WORKLOAD_STREAM: u64 = 1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    InvalidConfig(#[from] ConfigError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
}

/// Where and when one task ran.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub task: u64,
    pub server: ServerId,
    pub assigned_at: f64,
    pub completed_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub n_tasks: usize,
    pub speeds: Vec<f64>,
    /// Time at which each server finishes its last task (0 if it got none).
    pub per_server_makespan: Vec<f64>,
    pub per_server_task_count: Vec<u64>,
    /// Total work units assigned to each server.
    pub per_server_demand: Vec<f64>,
    /// Indexed by task id.
    pub assignments: Vec<Assignment>,
    pub mean: f64,
    pub stddev: f64,
    /// SHA-256 of the task list, hex encoded.
    pub workload_digest: String,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The servers of a scenario, before any task is assigned.
pub fn build_fleet(cfg: &ScenarioConfig) -> Result<Vec<ServerState>, SimError> {
    cfg.validate()?;
    let speeds: Vec<f64> = match &cfg.server_speeds {
        SpeedDistribution::Explicit(v) => v.clone(),
        SpeedDistribution::Uniform(r) => {
            let mut rng = rng_for(cfg.seed, FLEET_STREAM);
            (0..cfg.n_servers).map(|_| rng.random_range(r.lo..=r.hi)).collect()
        }
    };
    let mut fleet: Vec<ServerState> = speeds
        .iter()
        .enumerate()
        .map(|(i, &speed)| ServerState::new(ServerId(i), speed).with_static_weight(cfg.static_weight_for(speed)))
        .collect();
    for &i in &cfg.down_servers {
        fleet[i].take_down();
    }
    Ok(fleet)
}

/// Draws the task list. Same config and seed give an identical list.
pub fn generate_workload(cfg: &ScenarioConfig) -> Result<Vec<TaskSpec>, SimError> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, WORKLOAD_STREAM);
    let classes = WeightedIndex::new(cfg.class_mix)
        .map_err(|e| ConfigError::Invalid(format!("class_mix: {e}")))?;
    let inter_arrival = match cfg.arrival_mode {
        ArrivalMode::Batch => None,
        ArrivalMode::Poisson { rate } => {
            Some(Exp::new(rate).map_err(|e| ConfigError::Invalid(format!("poisson rate: {e}")))?)
        }
    };
    let mut clock = 0.0;
    let mut tasks = Vec::with_capacity(cfg.n_tasks);
    for id in 0..cfg.n_tasks as u64 {
        let class = TaskClass::ALL[classes.sample(&mut rng)];
        let range = cfg.class_demand[class.index()];
        let service_demand = rng.random_range(range.lo..=range.hi);
        if let Some(exp) = &inter_arrival {
            clock += exp.sample(&mut rng);
        }
        tasks.push(TaskSpec {
            id,
            class,
            service_demand,
            arrival_time: clock,
        });
    }
    Ok(tasks)
}

/// Hex SHA-256 over a canonical encoding of the task list.
pub fn workload_digest(tasks: &[TaskSpec]) -> String {
    let mut h = Sha256::new();
    for t in tasks {
        h.update(t.id.to_le_bytes());
        h.update([t.class.index() as u8]);
        h.update(t.service_demand.to_bits().to_le_bytes());
        h.update(t.arrival_time.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one scenario end to end.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult, SimError> {
    let fleet = build_fleet(cfg)?;
    let tasks = generate_workload(cfg)?;
    run_on_workload(cfg, cfg.scheduler, fleet, &tasks)
}

/// Runs `kind` over a given fleet and task list. `cfg` supplies the
/// arrival mode, weight parameters and resource model.
pub fn run_on_workload(
    cfg: &ScenarioConfig,
    kind: SchedulerKind,
    mut fleet: Vec<ServerState>,
    tasks: &[TaskSpec],
) -> Result<ScenarioResult, SimError> {
    let mut engine = Engine {
        cfg,
        scheduler: SchedulerState::new(kind),
        resource_model: cfg.resource_model(),
        fleet: &mut fleet,
    };
    let (assignments, per_server_makespan, per_server_demand) = match cfg.arrival_mode {
        ArrivalMode::Batch => engine.run_batch(tasks)?,
        ArrivalMode::Poisson { .. } => engine.run_events(tasks)?,
    };
    let mut per_server_task_count = vec![0u64; fleet.len()];
    for a in &assignments {
        per_server_task_count[a.server.index()] += 1;
    }
    let (mean, stddev) =
        metrics::mean_and_stddev(&per_server_makespan).expect("fleet is non-empty");
    Ok(ScenarioResult {
        scheduler: kind,
        seed: cfg.seed,
        n_tasks: tasks.len(),
        speeds: fleet.iter().map(|s| s.speed).collect(),
        per_server_makespan,
        per_server_task_count,
        per_server_demand,
        assignments,
        mean,
        stddev,
        workload_digest: workload_digest(tasks),
    })
}

type RunOutput = (Vec<Assignment>, Vec<f64>, Vec<f64>);

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    scheduler: SchedulerState,
    resource_model: crate::telemetry::ResourceModel,
    fleet: &'a mut [ServerState],
}

impl Engine<'_> {
    fn assign(&mut self, class: TaskClass) -> Result<usize, SchedulerError> {
        if self.scheduler.kind == SchedulerKind::Awlc {
            refresh_weights(self.fleet, &self.resource_model, &self.cfg.weight_params);
        }
        let id = self.scheduler.select(self.fleet, &self.cfg.weight_params)?;
        on_assign(&mut self.fleet[id.index()], class)?;
        Ok(id.index())
    }

    /// All tasks present at once; assigned in id order and then served
    /// back to back on their servers.
    fn run_batch(&mut self, tasks: &[TaskSpec]) -> Result<RunOutput, SchedulerError> {
        let n = self.fleet.len();
        let mut demand = vec![0.0f64; n];
        let mut assignments = Vec::with_capacity(tasks.len());
        for task in tasks {
            let i = self.assign(task.class)?;
            demand[i] += task.service_demand;
            assignments.push(Assignment {
                task: task.id,
                server: ServerId(i),
                assigned_at: task.arrival_time,
                completed_at: task.arrival_time + demand[i] / self.fleet[i].speed,
            });
        }
        let makespan = (0..n).map(|i| demand[i] / self.fleet[i].speed).collect();
        Ok((assignments, makespan, demand))
    }

    /// Event-driven run: arrivals and completions interleave, each server
    /// serves its queue first come first served.
    fn run_events(&mut self, tasks: &[TaskSpec]) -> Result<RunOutput, SchedulerError> {
        type Event = (OrderedFloat<f64>, u8, u64, usize);
        const COMPLETION: u8 = 0;
        const ARRIVAL: u8 = 1;

        let n = self.fleet.len();
        let mut demand = vec![0.0f64; n];
        let mut makespan = vec![0.0f64; n];
        let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); n];
        let mut assignments: Vec<Option<Assignment>> = vec![None; tasks.len()];
        // (time, kind, sequence, task or server index); completions first on ties
        let mut events: BinaryHeap<Reverse<Event>> = BinaryHeap::new();
        let mut seq = 0u64;
        for (idx, t) in tasks.iter().enumerate() {
            events.push(Reverse((OrderedFloat(t.arrival_time), ARRIVAL, seq, idx)));
            seq += 1;
        }

        while let Some(Reverse((OrderedFloat(now), kind, _, target))) = events.pop() {
            if kind == ARRIVAL {
                let task = &tasks[target];
                let i = self.assign(task.class)?;
                demand[i] += task.service_demand;
                assignments[target] = Some(Assignment {
                    task: task.id,
                    server: ServerId(i),
                    assigned_at: now,
                    completed_at: now,
                });
                queues[i].push_back(target);
                if queues[i].len() == 1 {
                    let done = now + task.service_demand / self.fleet[i].speed;
                    events.push(Reverse((OrderedFloat(done), COMPLETION, seq, i)));
                    seq += 1;
                }
            } else {
                let i = target;
                let finished = queues[i].pop_front().expect("completion for a busy server");
                on_complete(&mut self.fleet[i], tasks[finished].class)?;
                if let Some(a) = assignments[finished].as_mut() {
                    a.completed_at = now;
                }
                makespan[i] = now;
                if let Some(&next) = queues[i].front() {
                    let done = now + tasks[next].service_demand / self.fleet[i].speed;
                    events.push(Reverse((OrderedFloat(done), COMPLETION, seq, i)));
                    seq += 1;
                }
            }
        }
        let assignments = assignments
            .into_iter()
            .map(|a| a.expect("every task is assigned"))
            .collect();
        Ok((assignments, makespan, demand))
    }
}

/// Runs seeds `seed, seed+1, ..., seed+n_reps-1` in parallel; results come
/// back in seed order.
pub fn run_replications(cfg: &ScenarioConfig, n_reps: usize) -> Result<Vec<ScenarioResult>, SimError> {
    cfg.validate()?;
    (0..n_reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(k);
            run_scenario(&c)
        })
        .collect()
}

/// Results of several schedulers on shared per-seed workloads.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub kinds: Vec<SchedulerKind>,
    /// `runs[k][r]`: scheduler `kinds[k]`, replication `r`.
    pub runs: Vec<Vec<ScenarioResult>>,
}

/// Runs every scheduler in `kinds` on the same fleet and task list for
/// each replication seed.
pub fn compare_schedulers(
    cfg: &ScenarioConfig,
    kinds: &[SchedulerKind],
    n_reps: usize,
) -> Result<Comparison, SimError> {
    cfg.validate()?;
    let per_seed: Vec<Vec<ScenarioResult>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(k);
            let fleet = build_fleet(&c)?;
            let tasks = generate_workload(&c)?;
            kinds
                .iter()
                .map(|&kind| run_on_workload(&c, kind, fleet.clone(), &tasks))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, SimError>>()?;
    let runs = (0..kinds.len())
        .map(|k| per_seed.iter().map(|row| row[k].clone()).collect())
        .collect();
    Ok(Comparison {
        kinds: kinds.to_vec(),
        runs,
    })
}
