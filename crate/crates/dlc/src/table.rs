//! Parallel consistency tables and their CSV, text and record renderings.

use std::fmt::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use dlc_core::analysis::consistency::{consistency_of, report_from_cells, table_programs};
use dlc_core::analysis::{ConsistencyReport, Estimate, Method, TautologySuite};
use dlc_core::LogicConfig;

use crate::error::Result;

/// Worker count: `DLC_THREADS` if set to a positive integer, otherwise the
/// available parallelism.
pub fn threads() -> usize {
    let available = thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("DLC_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => available,
    }
}

/// Computes every cell of the table on up to `workers` threads. Cells are
/// independent, so the result does not depend on the worker count.
pub fn consistency_table(
    logics: &[LogicConfig],
    suite: &TautologySuite,
    method: Method,
    budget: usize,
    workers: usize,
) -> Result<ConsistencyReport> {
    let programs = table_programs(logics, suite)?;
    let next = AtomicUsize::new(0);
    let cells: Mutex<Vec<Option<Estimate>>> = Mutex::new(vec![None; programs.len()]);
    let failure = Mutex::new(None);
    thread::scope(|s| {
        for _ in 0..workers.clamp(1, programs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= programs.len() {
                    break;
                }
                match consistency_of(&programs[i], method, budget) {
                    Ok(e) => cells.lock().unwrap()[i] = Some(e),
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        next.store(programs.len(), Ordering::Relaxed);
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e.into());
    }
    let cells = cells.into_inner().unwrap().into_iter().map(|c| c.expect("every cell computed")).collect();
    Ok(report_from_cells(logics, suite, cells, method, budget))
}

fn header(r: &ConsistencyReport) -> Vec<String> {
    let mut h = vec!["group".to_string(), "tautology".to_string()];
    h.extend(r.logics.iter().map(|l| l.kind.title().to_string()));
    h
}

fn csv_of(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input")
}

/// Rows in suite order, one column per logic, then an `Average` row.
pub fn values_csv(r: &ConsistencyReport, suite: &TautologySuite) -> String {
    let mut rows = vec![header(r)];
    for (t, entry) in suite.entries.iter().enumerate() {
        let mut row = vec![entry.group.to_string(), entry.source.to_string()];
        row.extend(r.cells[t].iter().map(|e| format!("{:.6}", e.value)));
        rows.push(row);
    }
    let mut avg = vec![String::new(), "Average".to_string()];
    avg.extend(r.averages().iter().map(|v| format!("{v:.6}")));
    rows.push(avg);
    csv_of(rows)
}

/// Error estimates in the layout of [`values_csv`], without the average.
pub fn errors_csv(r: &ConsistencyReport, suite: &TautologySuite) -> String {
    let mut rows = vec![header(r)];
    for (t, entry) in suite.entries.iter().enumerate() {
        let mut row = vec![entry.group.to_string(), entry.source.to_string()];
        row.extend(r.cells[t].iter().map(|e| format!("{:.3e}", e.error)));
        rows.push(row);
    }
    csv_of(rows)
}

pub fn text(r: &ConsistencyReport, suite: &TautologySuite) -> String {
    let width = suite.entries.iter().map(|e| e.source.chars().count()).max().unwrap_or(0).max(7);
    let mut out = format!("{:width$}", "");
    for l in &r.logics {
        let _ = write!(out, "  {:>16}", l.kind.title());
    }
    out.push('\n');
    for (t, entry) in suite.entries.iter().enumerate() {
        let pad = width - entry.source.chars().count();
        let _ = write!(out, "{}{}", entry.source, " ".repeat(pad));
        for e in &r.cells[t] {
            let _ = write!(out, "  {:>16.2}", e.value);
        }
        out.push('\n');
    }
    let _ = write!(out, "{:width$}", "Average");
    for v in r.averages() {
        let _ = write!(out, "  {v:>16.2}");
    }
    out.push('\n');
    out
}

pub fn records(r: &ConsistencyReport) -> String {
    let mut out = String::new();
    for (t, row) in r.cells.iter().enumerate() {
        for (l, e) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                "row={t} logic={} method={} value={} error={} evaluations={}",
                r.logics[l].kind, r.method.name(), e.value, e.error, e.evaluations
            );
        }
    }
    for (l, v) in r.averages().iter().enumerate() {
        let _ = writeln!(out, "row=average logic={} value={v}", r.logics[l].kind);
    }
    out
}
