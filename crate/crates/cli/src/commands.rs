use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use awlc_core::metrics::{median, summarize};
use awlc_core::report;
use awlc_core::simulator::{build_fleet, compare_schedulers, run_replications, Comparison};
use awlc_core::telemetry::{apply_telemetry, read_telemetry};
use awlc_core::{ScenarioConfig, SchedulerKind, SummaryRow};
use log::info;

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_SIMULATION: u8 = 2;

pub struct CommandError {
    pub exit_code: u8,
    pub error: anyhow::Error,
}

fn config_err(error: impl Into<anyhow::Error>) -> CommandError {
    CommandError {
        exit_code: EXIT_CONFIG,
        error: error.into(),
    }
}

fn sim_err(error: impl Into<anyhow::Error>) -> CommandError {
    CommandError {
        exit_code: EXIT_SIMULATION,
        error: error.into(),
    }
}

pub struct RunSpec {
    pub config: PathBuf,
    pub out: PathBuf,
    pub scheduler: Option<SchedulerKind>,
    pub replications: usize,
    pub seed: Option<u64>,
}

fn load(spec_config: &Path, seed: Option<u64>) -> Result<ScenarioConfig, CommandError> {
    let mut cfg = ScenarioConfig::load(spec_config).map_err(config_err)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn check_replications(n: usize) -> Result<(), CommandError> {
    if n == 0 {
        return Err(config_err(anyhow!("--replications must be at least 1")));
    }
    Ok(())
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CommandError> {
    let path = dir.join(name);
    let file = File::create(&path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(sim_err)?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(sim_err)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn create_out_dir(out: &Path) -> Result<(), CommandError> {
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))
        .map_err(sim_err)
}

fn print_summary(rows: &[SummaryRow]) {
    println!("{:<6} {:>8} {:>20} {:>14} {:>14} {:>10}", "sched", "n_tasks", "seed", "mean", "stddev", "cv");
    for r in rows {
        println!(
            "{:<6} {:>8} {:>20} {:>14.2} {:>14.2} {:>10.4}",
            r.scheduler.to_string(),
            r.n_tasks,
            r.seed,
            r.mean,
            r.stddev,
            r.cv
        );
    }
}

pub fn run(spec: &RunSpec) -> Result<(), CommandError> {
    let mut cfg = load(&spec.config, spec.seed)?;
    check_replications(spec.replications)?;
    if let Some(kind) = spec.scheduler {
        cfg.scheduler = kind;
    }
    info!(
        "running {} on {} tasks, {} servers, {} replication(s)",
        cfg.scheduler, cfg.n_tasks, cfg.n_servers, spec.replications
    );
    let results = run_replications(&cfg, spec.replications).map_err(sim_err)?;
    let rows: Vec<SummaryRow> = results.iter().map(summarize).collect();

    create_out_dir(&spec.out)?;
    write_file(&spec.out, "per_server.csv", |w| report::write_per_server_csv(w, &results))?;
    write_file(&spec.out, "summary.csv", |w| report::write_summary_csv(w, &rows))?;
    print_summary(&rows);
    Ok(())
}

const COMPARED: [SchedulerKind; 3] = [SchedulerKind::Lc, SchedulerKind::Wlc, SchedulerKind::Awlc];

fn print_verdict(cmp: &Comparison) {
    let n_tasks = cmp.runs[0][0].n_tasks;
    let medians: Vec<(SchedulerKind, f64, f64)> = cmp
        .kinds
        .iter()
        .zip(&cmp.runs)
        .map(|(kind, runs)| {
            let means: Vec<f64> = runs.iter().map(|r| r.mean).collect();
            let sds: Vec<f64> = runs.iter().map(|r| r.stddev).collect();
            (*kind, median(&means).unwrap_or(f64::NAN), median(&sds).unwrap_or(f64::NAN))
        })
        .collect();
    println!(
        "{n_tasks} tasks, {} replication(s): median over replications",
        cmp.runs[0].len()
    );
    println!("{:<6} {:>14} {:>14}", "sched", "mean", "stddev");
    for (kind, m, sd) in &medians {
        println!("{:<6} {:>14.2} {:>14.2}", kind.to_string(), m, sd);
    }
    let best = |key: fn(&(SchedulerKind, f64, f64)) -> f64| {
        medians
            .iter()
            .min_by(|a, b| key(a).total_cmp(&key(b)))
            .map(|m| m.0)
            .expect("three schedulers")
    };
    println!("lowest median mean (efficiency): {}", best(|m| m.1));
    println!("lowest median stddev (load balance): {}", best(|m| m.2));
}

pub fn compare(spec: &RunSpec) -> Result<(), CommandError> {
    let cfg = load(&spec.config, spec.seed)?;
    check_replications(spec.replications)?;
    info!(
        "comparing lc, wlc, awlc on {} tasks with {} replication(s)",
        cfg.n_tasks, spec.replications
    );
    let cmp = compare_schedulers(&cfg, &COMPARED, spec.replications).map_err(sim_err)?;
    for r in 0..spec.replications {
        let digest = &cmp.runs[0][r].workload_digest;
        if cmp.runs.iter().any(|runs| &runs[r].workload_digest != digest) {
            return Err(sim_err(anyhow!("replication {r} did not share its workload")));
        }
    }

    create_out_dir(&spec.out)?;
    write_file(&spec.out, "comparison.csv", |w| report::write_comparison_csv(w, &cmp))?;
    write_file(&spec.out, "plot_data.csv", |w| report::write_plot_data(w, &cmp))?;
    print_verdict(&cmp);
    Ok(())
}

pub fn replay(telemetry: &Path, config: &Path, seed: Option<u64>) -> Result<(), CommandError> {
    let cfg = load(config, seed)?;
    let mut fleet = build_fleet(&cfg).map_err(config_err)?;
    let file = File::open(telemetry)
        .with_context(|| format!("cannot open telemetry file {}", telemetry.display()))
        .map_err(config_err)?;
    let records = read_telemetry(BufReader::new(file))
        .with_context(|| format!("in {}", telemetry.display()))
        .map_err(config_err)?;
    for (line, rec) in &records {
        let idx = rec.server.index();
        let before = fleet.get(idx).map(|s| s.dynamic_weight);
        apply_telemetry(&mut fleet, rec, &cfg.weight_params)
            .map_err(|e| config_err(anyhow!("{}: line {line}: {e}", telemetry.display())))?;
        println!(
            "t={} server={} vc={} vm={} weight {} -> {}",
            report::format_real(rec.time),
            idx,
            report::format_real(rec.cpu_idle_rate),
            report::format_real(rec.mem_idle_rate),
            report::format_real(before.unwrap_or(0.0)),
            report::format_real(fleet[idx].dynamic_weight)
        );
    }
    info!("replayed {} record(s)", records.len());
    Ok(())
}
