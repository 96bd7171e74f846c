//! CSV output: summary rows, per-server detail, scheduler comparison and
//! plot series.
//!
//! Reals are written with six significant digits in plain decimal notation
//! (trailing zeros trimmed), `.` as decimal separator and LF line endings.

use std::io::{self, Write};

use crate::metrics::SummaryRow;
use crate::simulator::{Comparison, ScenarioResult};

pub const SUMMARY_HEADER: [&str; 6] = ["scheduler", "n_tasks", "seed", "mean", "stddev", "cv"];
pub const PER_SERVER_HEADER: [&str; 8] = [
    "scheduler",
    "n_tasks",
    "seed",
    "server",
    "speed",
    "tasks_assigned",
    "total_demand",
    "makespan",
];
pub const COMPARISON_HEADER: [&str; 5] = ["scheduler", "n_tasks", "seed", "mean", "stddev"];
pub const PLOT_HEADER: [&str; 4] = ["scheduler", "seed", "rank", "makespan"];

/// Formats `x` with six significant digits, never in exponent notation.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Let the formatter do the rounding, then move the decimal point.
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn finish<W: Write>(mut wtr: csv::Writer<W>) -> io::Result<()> {
    wtr.flush()
}

fn io_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(SUMMARY_HEADER).map_err(io_err)?;
    for r in rows {
        wtr.write_record([
            r.scheduler.to_string(),
            r.n_tasks.to_string(),
            r.seed.to_string(),
            format_real(r.mean),
            format_real(r.stddev),
            format_real(r.cv),
        ])
        .map_err(io_err)?;
    }
    finish(wtr)
}

pub fn write_per_server_csv<W: Write>(w: W, results: &[ScenarioResult]) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(PER_SERVER_HEADER).map_err(io_err)?;
    for r in results {
        for s in 0..r.speeds.len() {
            wtr.write_record([
                r.scheduler.to_string(),
                r.n_tasks.to_string(),
                r.seed.to_string(),
                s.to_string(),
                format_real(r.speeds[s]),
                r.per_server_task_count[s].to_string(),
                format_real(r.per_server_demand[s]),
                format_real(r.per_server_makespan[s]),
            ])
            .map_err(io_err)?;
        }
    }
    finish(wtr)
}

pub fn write_comparison_csv<W: Write>(w: W, cmp: &Comparison) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(COMPARISON_HEADER).map_err(io_err)?;
    for runs in &cmp.runs {
        for r in runs {
            wtr.write_record([
                r.scheduler.to_string(),
                r.n_tasks.to_string(),
                r.seed.to_string(),
                format_real(r.mean),
                format_real(r.stddev),
            ])
            .map_err(io_err)?;
        }
    }
    finish(wtr)
}

/// One series per scheduler for the first replication: servers ranked by
/// makespan (ascending) against their makespan.
pub fn write_plot_data<W: Write>(w: W, cmp: &Comparison) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(PLOT_HEADER).map_err(io_err)?;
    for runs in &cmp.runs {
        let Some(r) = runs.first() else { continue };
        let mut sorted = r.per_server_makespan.clone();
        sorted.sort_by(f64::total_cmp);
        for (rank, m) in sorted.iter().enumerate() {
            wtr.write_record([
                r.scheduler.to_string(),
                r.seed.to_string(),
                rank.to_string(),
                format_real(*m),
            ])
            .map_err(io_err)?;
        }
    }
    finish(wtr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedulers::SchedulerKind;
    use proptest::prelude::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1261.71), "1261.71");
        assert_eq!(format_real(13344.248), "13344.2");
        assert_eq!(format_real(1234567.0), "1234570");
        assert_eq!(format_real(999999.7), "1000000");
        assert_eq!(format_real(0.000123456789), "0.000123457");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(0.1), "0.1");
        assert_eq!(format_real(100.0), "100");
    }

    #[test]
    fn summary_csv_layout() {
        let rows = vec![SummaryRow {
            scheduler: SchedulerKind::Awlc,
            n_tasks: 150,
            seed: 3,
            mean: 1261.7011,
            stddev: 134.166,
            cv: 134.166 / 1261.7011,
        }];
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "scheduler,n_tasks,seed,mean,stddev,cv\nawlc,150,3,1261.7,134.166,0.106337\n"
        );
    }

    proptest! {
        #[test]
        fn formatted_value_is_within_rounding(x in -1e9f64..1e9) {
            prop_assume!(x.abs() > 1e-6);
            let s = format_real(x);
            prop_assert!(!s.contains('e'));
            let back: f64 = s.parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-6 * x.abs());
        }
    }
}
