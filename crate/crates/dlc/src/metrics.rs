//! Metrics history files. Records hold `epoch, pred_acc, constraint_acc,
//! lambda_ce, lambda_c, loss_ce, loss_c`; reals are written in shortest
//! round-trip form, so reading a file back is lossless. Wall time is left
//! out so that reruns produce identical bytes.

use std::fmt::Write;

use dlc_core::train::{EpochRecord, MetricsHistory};

pub const FIELDS: [&str; 7] = ["epoch", "pred_acc", "constraint_acc", "lambda_ce", "lambda_c", "loss_ce", "loss_c"];

fn values(r: &EpochRecord) -> [String; 7] {
    [
        r.epoch.to_string(),
        r.pred_acc.to_string(),
        r.constraint_acc.to_string(),
        r.lambda_ce.to_string(),
        r.lambda_c.to_string(),
        r.loss_ce.to_string(),
        r.loss_c.to_string(),
    ]
}

/// One `key=value` record per epoch.
pub fn to_records(h: &MetricsHistory) -> String {
    let mut out = String::new();
    for r in &h.records {
        let pairs: Vec<String> = FIELDS.iter().zip(values(r)).map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&pairs.join(" "));
        out.push('\n');
    }
    out
}

pub fn to_csv(h: &MetricsHistory) -> String {
    let mut out = FIELDS.join(",");
    out.push('\n');
    for r in &h.records {
        out.push_str(&values(r).join(","));
        out.push('\n');
    }
    out
}

pub fn to_text(h: &MetricsHistory) -> String {
    let mut out = String::from("epoch  pred_acc  constraint_acc  lambda_ce  lambda_c  loss_ce   loss_c\n");
    for r in &h.records {
        let _ = writeln!(
            out,
            "{:>5}  {:>8.4}  {:>14.4}  {:>9.4}  {:>8.4}  {:>7.4}  {:>7.4}",
            r.epoch, r.pred_acc, r.constraint_acc, r.lambda_ce, r.lambda_c, r.loss_ce, r.loss_c
        );
    }
    out
}

/// Parses the output of [`to_records`].
pub fn parse_records(text: &str) -> Result<MetricsHistory, String> {
    let mut h = MetricsHistory::default();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut fields = [None::<&str>; 7];
        for pair in line.split_whitespace() {
            let (k, v) = pair.split_once('=').ok_or_else(|| format!("line {}: `{pair}` is not key=value", n + 1))?;
            let i = FIELDS.iter().position(|f| *f == k).ok_or_else(|| format!("line {}: unknown field `{k}`", n + 1))?;
            fields[i] = Some(v);
        }
        let get = |i: usize| fields[i].ok_or_else(|| format!("line {}: missing `{}`", n + 1, FIELDS[i]));
        let real = |i: usize| get(i)?.parse::<f64>().map_err(|e| format!("line {}: {}: {e}", n + 1, FIELDS[i]));
        h.records.push(EpochRecord {
            epoch: get(0)?.parse().map_err(|e| format!("line {}: epoch: {e}", n + 1))?,
            pred_acc: real(1)?,
            constraint_acc: real(2)?,
            lambda_ce: real(3)?,
            lambda_c: real(4)?,
            loss_ce: real(5)?,
            loss_c: real(6)?,
            seconds: 0.0,
        });
    }
    Ok(h)
}
