//! Deterministic JSON reports and CSV tables.

use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::foliation::{FoliationReport, HolonomyCase, Leaf};
use crate::invariants::InvariantRecord;
use crate::normalize::{NormalForm, Warning};
use crate::spectral::BrunoReport;

fn clean_zeros(v: &mut Value) {
    match v {
        Value::Number(n) if n.as_f64() == Some(0.0) && n.is_f64() => *v = json!(0.0),
        Value::Array(items) => items.iter_mut().for_each(clean_zeros),
        Value::Object(map) => map.values_mut().for_each(clean_zeros),
        _ => {}
    }
}

/// Pretty JSON with sorted keys, `-0` written as `0` and a trailing newline.
pub fn render(v: &Value) -> String {
    let mut v = v.clone();
    clean_zeros(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn rows(a: &[f64], n: usize) -> Vec<Vec<f64>> {
    a.chunks(n.max(1)).map(<[f64]>::to_vec).collect()
}

pub fn warnings(ws: &[Warning]) -> Value {
    json!(ws)
}

/// One-based one-line notation, e.g. `(2 1)`.
pub fn permutation_notation(sigma: &[usize]) -> String {
    let parts: Vec<String> = sigma.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", parts.join(" "))
}

pub fn normal_form(nf: &NormalForm) -> Value {
    json!({
        "n": nf.n,
        "mu": nf.mu,
        "a": rows(&nf.a, nf.n),
        "lambda": nf.lambda,
        "monodromy": nf.monodromy,
        "covered": nf.covered,
        "steps": nf.step_kinds(),
        "diagnostics": nf.diagnostics,
    })
}

pub fn record(r: &InvariantRecord) -> Value {
    json!({
        "n": r.n,
        "mu": r.mu,
        "a": rows(&r.a, r.n),
        "period": r.period,
        "base_period": r.base_period,
        "monodromy": r.monodromy,
        "covered": r.covered,
    })
}

pub fn case_label(c: HolonomyCase) -> &'static str {
    match c {
        HolonomyCase::MuInImage => "Case 1",
        HolonomyCase::MuNotInImage => "Case 2",
    }
}

pub fn foliation_summary(r: &FoliationReport) -> String {
    match &r.holonomy_translation {
        Some(h) => {
            let parts: Vec<String> = h.iter().map(|v| format!("{v:.12}")).collect();
            format!(
                "{}, s={}, holonomy translation = [{}]",
                case_label(r.case),
                r.s,
                parts.join(", ")
            )
        }
        None => format!("{}, s={}, no holonomy", case_label(r.case), r.s),
    }
}

pub fn foliation(r: &FoliationReport) -> Value {
    json!({
        "summary": foliation_summary(r),
        "case": case_label(r.case),
        "holonomy_case": r.case,
        "s": r.s,
        "leaf_dim": r.leaf_dim,
        "leaf_space": r.leaf_space,
        "holonomy_translation": r.holonomy_translation,
        "membership_residual": r.membership_residual,
        "singular_values": r.singular_values,
        "phi": matrix_rows(&r.phi),
        "psi": matrix_rows(&r.psi),
        "warnings": warnings(&r.warnings),
        "alternate": r.alternate.as_ref().map(|alt| foliation(alt)),
    })
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Schema(format!("cannot write CSV: {e}"))
}

/// Writes a header and rows of numbers.
pub fn write_csv(path: &Path, header: &[String], data: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in data {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

/// Header `t1..td, theta, x1..xn` and one row per parameter sample.
pub fn leaf_table(leaf: &Leaf, params: &[Vec<f64>]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut header: Vec<String> = (1..=leaf.dim()).map(|j| format!("t{j}")).collect();
    header.push("theta".into());
    header.extend((1..=leaf.n()).map(|i| format!("x{i}")));
    let data = params
        .iter()
        .map(|t| {
            let (theta, x) = leaf.eval(t);
            let mut row = t.clone();
            row.push(theta);
            row.extend(x);
            row
        })
        .collect();
    (header, data)
}

/// Header `k, omega, weighted_sum, half_weighted_sum`.
pub fn bruno_table(b: &BrunoReport) -> (Vec<String>, Vec<Vec<f64>>) {
    let header = ["k", "omega", "weighted_sum", "half_weighted_sum"].map(String::from).to_vec();
    let data = (0..b.omega.len())
        .map(|i| vec![(i + 1) as f64, b.omega[i], b.partial_sums[i], b.half_weighted_sums[i]])
        .collect();
    (header, data)
}
