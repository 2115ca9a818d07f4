//! Report rendering for solver runs and multi-start sweeps.
//!
//! JSON numbers carry 17 significant digits; non-finite values become
//! `null`. Object keys are emitted in sorted order, so identical inputs
//! always render to identical bytes.

use std::str::FromStr;

use serde_json::{json, Number, Value};

use crate::harness::EigenpairSet;
use crate::scalar::Scalar;
use crate::solvers::{SolveReport, Status, StepRecord};

/// A JSON number with 17 significant digits, or `null` if not finite.
pub fn number<T: Scalar>(v: T) -> Value {
    let v = v.to_f64().unwrap_or(f64::NAN);
    if !v.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{v:.16e}"))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn numbers<T: Scalar>(vs: &[T]) -> Value {
    Value::Array(vs.iter().map(|&v| number(v)).collect())
}

fn optional<T: Scalar>(v: Option<T>) -> Value {
    v.map_or(Value::Null, number)
}

/// Text form used in CSV and plain-text output.
fn digits<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64().unwrap_or(f64::NAN))
}

fn step_json<T: Scalar>(s: &StepRecord<T>) -> Value {
    let (low, high) = s.interval.unzip();
    json!({
        "k": s.k,
        "x": numbers(&s.x),
        "lambda": number(s.lambda),
        "lambda_hat": optional(s.lambda_hat),
        "lambda_low": optional(low),
        "lambda_high": optional(high),
        "residual": number(s.residual),
        "flags": s.flags.labels(),
        "perturbation": number(s.perturbation),
        "beta": optional(s.beta),
    })
}

pub fn solve_json<T: Scalar>(report: &SolveReport<T>, with_trace: bool) -> Value {
    let mut v = json!({
        "method": report.method.name(),
        "status": report.status.name(),
        "eigenvalue": number(report.iterate.lambda),
        "eigenvector": numbers(&report.iterate.x),
        "residual": number(report.iterate.residual),
        "iterations": report.iterations,
        "order": optional(report.order),
        "notes": report.notes,
    });
    if with_trace {
        v["trace"] = report.trace.iter().map(step_json).collect();
    }
    v
}

/// Trace as CSV with columns `k, lambda, lambda_hat, lambda_low,
/// lambda_high, residual, flags`. Missing values are empty cells.
pub fn trace_csv<T: Scalar>(report: &SolveReport<T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cell = |v: Option<T>| v.map(digits).unwrap_or_default();
    w.write_record([
        "k",
        "lambda",
        "lambda_hat",
        "lambda_low",
        "lambda_high",
        "residual",
        "flags",
    ])
    .expect("writing to memory");
    for s in report.trace.iter() {
        let (low, high) = s.interval.unzip();
        w.write_record([
            s.k.to_string(),
            digits(s.lambda),
            cell(s.lambda_hat),
            cell(low),
            cell(high),
            digits(s.residual),
            s.flags.labels(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV output is UTF-8")
}

fn vector_text<T: Scalar>(x: &[T]) -> String {
    let parts: Vec<String> = x.iter().map(|&v| digits(v)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn solve_text<T: Scalar>(report: &SolveReport<T>, with_trace: bool) -> String {
    let mut out = format!(
        "method: {}\nstatus: {}\neigenvalue: {}\neigenvector: {}\nresidual: {}\niterations: {}\n",
        report.method,
        report.status,
        digits(report.iterate.lambda),
        vector_text(&report.iterate.x),
        digits(report.iterate.residual),
        report.iterations,
    );
    if let Some(p) = report.order {
        out += &format!("order: {:.3}\n", p.to_f64().unwrap_or(f64::NAN));
    }
    for note in &report.notes {
        out += &format!("note: {note}\n");
    }
    if with_trace {
        for s in report.trace.iter() {
            out += &format!(
                "k={} lambda={} residual={} flags={}\n",
                s.k,
                digits(s.lambda),
                digits(s.residual),
                s.flags.labels()
            );
        }
    }
    out
}

pub fn sweep_json<T: Scalar>(set: &EigenpairSet<T>, seed: u64) -> Value {
    let pairs: Vec<Value> = set
        .pairs
        .iter()
        .map(|p| {
            json!({
                "eigenvalue": number(p.lambda),
                "eigenvector": numbers(&p.x),
                "residual": number(p.residual),
                "witness": numbers(&p.witness),
                "method": p.method.name(),
            })
        })
        .collect();
    let runs: Vec<Value> = set
        .starts
        .iter()
        .map(|s| {
            json!({
                "index": s.index,
                "x0": numbers(&s.x0),
                "status": s.status.name(),
                "iterations": s.iterations,
                "eigenvalue": number(s.lambda),
                "rejected": s.rejected,
            })
        })
        .collect();
    json!({
        "seed": seed,
        "starts": set.starts.len(),
        "eigenpairs": pairs,
        "runs": runs,
    })
}

/// One row per distinct eigenpair; vector entries are space-separated.
pub fn sweep_csv<T: Scalar>(set: &EigenpairSet<T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["eigenvalue", "residual", "eigenvector", "witness"])
        .expect("writing to memory");
    let join = |x: &[T]| x.iter().map(|&v| digits(v)).collect::<Vec<_>>().join(" ");
    for p in &set.pairs {
        w.write_record([
            digits(p.lambda),
            digits(p.residual),
            join(&p.x),
            join(&p.witness),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV output is UTF-8")
}

pub fn sweep_text<T: Scalar>(set: &EigenpairSet<T>) -> String {
    let failed = set
        .starts
        .iter()
        .filter(|s| s.status != Status::Converged)
        .count();
    let mut out = format!(
        "{} distinct eigenpairs from {} starts ({} did not converge)\n",
        set.pairs.len(),
        set.starts.len(),
        failed
    );
    for p in &set.pairs {
        out += &format!(
            "lambda={} x={} residual={}\n",
            digits(p.lambda),
            vector_text(&p.x),
            digits(p.residual)
        );
    }
    out
}
