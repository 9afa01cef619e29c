//! Error counts of one network across `M_k` or τ.

use std::io::Write;
use std::path::PathBuf;

use pcc_core::methods::star_sweep;
use pcc_core::spectral::default_tau;
use pcc_core::{align_and_score, detect, Error, Graph, LabelVector, Method, MethodOptions, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: String,
    pub param: String,
    pub value: f64,
    pub mismatches: usize,
    pub nodes: usize,
    pub error_rate: f64,
    /// Marks the row run at the parameter's default value.
    pub is_default: bool,
}

fn score(d: &pcc_core::Detection, truth: &LabelVector, k: usize) -> Result<(usize, usize)> {
    let aligned = align_and_score(&d.labels, &d.truth_subset(truth), k)?;
    Ok((aligned.mismatches, d.labels.len()))
}

fn row(method: Method, param: &str, value: f64, (mismatches, nodes): (usize, usize), is_default: bool) -> SweepRow {
    SweepRow {
        method: method.to_string(),
        param: param.to_string(),
        value,
        mismatches,
        nodes,
        error_rate: mismatches as f64 / nodes as f64,
        is_default,
    }
}

/// Mismatches for each `M_k`; the eigendecomposition is computed once at the largest value.
pub fn sweep_mk(
    graph: &Graph,
    truth: &LabelVector,
    k: usize,
    method: Method,
    grid: &[usize],
    opts: &MethodOptions,
) -> Result<Vec<SweepRow>> {
    let detections = star_sweep(graph, k, method, grid, opts)?;
    detections
        .iter()
        .zip(grid)
        .map(|(d, &mk)| Ok(row(method, "M_k", mk as f64, score(d, truth, k)?, mk == k)))
        .collect()
}

/// Mismatches for each τ, followed by a marker row at the default τ (mean degree).
pub fn sweep_tau(
    graph: &Graph,
    truth: &LabelVector,
    k: usize,
    method: Method,
    grid: &[f64],
    opts: &MethodOptions,
) -> Result<Vec<SweepRow>> {
    if !method.uses_tau() {
        return Err(Error::InvalidArgument(format!("{method} has no regulariser")));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty tau grid".into()));
    }
    let mut rows = Vec::with_capacity(grid.len() + 1);
    for &tau in grid {
        let d = detect(graph, k, method, &MethodOptions { tau: Some(tau), ..*opts })?;
        rows.push(row(method, "tau", tau, score(&d, truth, k)?, false));
    }
    let d = detect(graph, k, method, &MethodOptions { tau: None, ..*opts })?;
    let tau = d.tau.unwrap_or(default_tau(graph)?);
    rows.push(row(method, "tau", tau, score(&d, truth, k)?, true));
    Ok(rows)
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::InvalidArgument(format!("CSV output failed: {e}")))?;
    }
    w.flush().map_err(|source| Error::Io { path: PathBuf::from("<csv>"), source })
}
