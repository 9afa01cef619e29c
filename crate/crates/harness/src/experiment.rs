//! Monte Carlo experiments on simulated networks.
//!
//! Each (grid point, repetition) pair is one task: sample a network, run
//! every requested method on it, score against the planted labels. Tasks run
//! in parallel; results are collected in grid-major, method-minor order, so
//! the summary does not depend on scheduling.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use pcc_core::dcsbm::{LabelGenerator, LabelSpec, ParamSpec, ThetaGenerator, ThetaSpec};
use pcc_core::{align_and_score, detect, Error, Method, MethodOptions, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "1a")]
    E1a,
    #[serde(rename = "1b")]
    E1b,
    #[serde(rename = "2a")]
    E2a,
    #[serde(rename = "2b")]
    E2b,
    #[serde(rename = "2c")]
    E2c,
    #[serde(rename = "2d")]
    E2d,
    #[serde(rename = "2e")]
    E2e,
    #[serde(rename = "2f")]
    E2f,
    #[serde(rename = "3")]
    E3,
    #[serde(rename = "custom")]
    Custom,
}

impl ExperimentId {
    pub const BUILTIN: [ExperimentId; 9] = [
        ExperimentId::E1a,
        ExperimentId::E1b,
        ExperimentId::E2a,
        ExperimentId::E2b,
        ExperimentId::E2c,
        ExperimentId::E2d,
        ExperimentId::E2e,
        ExperimentId::E2f,
        ExperimentId::E3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::E1a => "1a",
            ExperimentId::E1b => "1b",
            ExperimentId::E2a => "2a",
            ExperimentId::E2b => "2b",
            ExperimentId::E2c => "2c",
            ExperimentId::E2d => "2d",
            ExperimentId::E2e => "2e",
            ExperimentId::E2f => "2f",
            ExperimentId::E3 => "3",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::BUILTIN
            .into_iter()
            .chain([ExperimentId::Custom])
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Per-repetition rows.
    pub raw: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    /// Name of the varied parameter (`n`, `a0`, `b0` or `c0`).
    pub grid_param: String,
    pub grid: Vec<f64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    /// Fixed network size for experiments whose grid is not `n`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub options: MethodOptions,
    /// Record wall time per method; off makes the output byte-reproducible.
    #[serde(default = "default_timing")]
    pub timing: bool,
    /// Network model of a custom experiment; its `n` is replaced by the grid value.
    #[serde(default)]
    pub model: Option<ParamSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_reps() -> usize {
    100
}

fn default_methods() -> Vec<Method> {
    vec![Method::Pcc, Method::Npcc, Method::Rsc, Method::Score]
}

fn default_timing() -> bool {
    true
}

fn sbm(n: usize, p: Vec<f64>, theta: Vec<f64>, labels: LabelGenerator) -> ParamSpec {
    let k = theta.len();
    ParamSpec {
        n,
        k,
        p,
        theta: ThetaSpec::Generated(ThetaGenerator::ByCommunity { values: theta }),
        labels: LabelSpec::Generated(labels),
    }
}

const RANDOM_LABELS: LabelGenerator = LabelGenerator::EqualProbability { seed: None };

/// Built-in parameterisation of a numbered experiment.
pub fn builtin_spec(id: ExperimentId) -> Result<ExperimentSpec> {
    let (grid_param, grid, n, reps): (&str, Vec<f64>, Option<usize>, usize) = match id {
        ExperimentId::E1a | ExperimentId::E1b => {
            ("n", (1..=6).map(|i| 100.0 * i as f64).collect(), None, 100)
        }
        ExperimentId::E2a => ("a0", (1..=8).map(f64::from).collect(), Some(400), 100),
        ExperimentId::E2b => {
            let mut grid: Vec<f64> = (1..=9).map(|i| i as f64 / 20.0).collect();
            grid.push(12.0 / 20.0);
            ("b0", grid, Some(400), 100)
        }
        ExperimentId::E2c => ("c0", (1..=12).map(f64::from).collect(), Some(400), 100),
        ExperimentId::E2d | ExperimentId::E2e | ExperimentId::E2f => {
            ("c0", (1..=8).map(f64::from).collect(), Some(400), 100)
        }
        ExperimentId::E3 => ("n", vec![500.0, 1000.0, 2000.0, 3000.0, 4000.0], None, 10),
        ExperimentId::Custom => {
            return Err(Error::InvalidArgument(
                "custom experiments are described by a JSON spec".into(),
            ))
        }
    };
    Ok(ExperimentSpec {
        id,
        grid_param: grid_param.to_string(),
        grid,
        reps,
        methods: default_methods(),
        seed: 0,
        n,
        options: MethodOptions::default(),
        timing: true,
        model: None,
        outputs: Outputs::default(),
    })
}

fn grid_count(value: f64, what: &str) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 {
        Ok(value as usize)
    } else {
        Err(Error::InvalidArgument(format!("{what} must be a positive integer, got {value}")))
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidArgument("no repetitions".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidArgument("empty parameter grid".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods selected".into()));
        }
        self.options.validate()?;
        for &v in &self.grid {
            self.model_at(v)?;
        }
        Ok(())
    }

    fn fixed_n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::InvalidArgument(format!("experiment {} needs a network size", self.id)))
    }

    /// Network model at one grid value.
    pub fn model_at(&self, value: f64) -> Result<ParamSpec> {
        let expect = |name: &str| -> Result<()> {
            if self.grid_param == name {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "experiment {} varies {name}, not {}",
                    self.id, self.grid_param
                )))
            }
        };
        let p2c = vec![0.9, 0.4, 0.4, 0.8];
        let blocks = |c0: f64| LabelGenerator::Proportions { fractions: vec![1.0, c0] };
        Ok(match self.id {
            ExperimentId::E1a => {
                expect("n")?;
                sbm(grid_count(value, "n")?, vec![0.9, 0.3, 0.3, 0.8], vec![0.2, 0.6], RANDOM_LABELS)
            }
            ExperimentId::E1b => {
                expect("n")?;
                let p = vec![0.9, 0.3, 0.3, 0.3, 0.8, 0.3, 0.3, 0.3, 0.7];
                sbm(grid_count(value, "n")?, p, vec![0.2, 0.4, 0.8], RANDOM_LABELS)
            }
            ExperimentId::E2a => {
                expect("a0")?;
                let a0 = grid_count(value, "a0")? as f64;
                sbm(self.fixed_n()?, vec![0.9, 0.4, 0.4, 0.8], vec![1.0, 1.0 / a0], RANDOM_LABELS)
            }
            ExperimentId::E2b => {
                expect("b0")?;
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::InvalidArgument(format!("b0 must lie in [0, 1], got {value}")));
                }
                let p = vec![0.3, value, value, 0.3];
                sbm(self.fixed_n()?, p, vec![0.4, 0.6], blocks(1.0))
            }
            ExperimentId::E2c => {
                expect("c0")?;
                let c0 = grid_count(value, "c0")? as f64;
                sbm(self.fixed_n()?, p2c, vec![0.4, 0.6], blocks(c0))
            }
            ExperimentId::E2d | ExperimentId::E2e | ExperimentId::E2f => {
                expect("c0")?;
                let c0 = grid_count(value, "c0")? as f64;
                let exponent = match self.id {
                    ExperimentId::E2d => 1.0,
                    ExperimentId::E2e => 2.0,
                    _ => 3.0,
                };
                ParamSpec {
                    n: self.fixed_n()?,
                    k: 2,
                    p: p2c,
                    theta: ThetaSpec::Generated(ThetaGenerator::Power { base: 0.4, scale: 0.5, exponent }),
                    labels: LabelSpec::Generated(blocks(c0)),
                }
            }
            ExperimentId::E3 => {
                expect("n")?;
                let mut p = vec![0.5; 16];
                for a in 0..4 {
                    p[a * 4 + a] = 1.0;
                }
                sbm(grid_count(value, "n")?, p, vec![0.2, 0.4, 0.6, 0.8], RANDOM_LABELS)
            }
            ExperimentId::Custom => {
                expect("n")?;
                let mut model = self
                    .model
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("custom experiment has no model".into()))?;
                model.n = grid_count(value, "n")?;
                model
            }
        })
    }
}

/// Seed of one repetition at one grid point.
pub fn rep_seed(base: u64, grid_index: usize, rep: usize) -> u64 {
    let mut z = base
        .wrapping_add((grid_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add((rep as u64).wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One method on one sampled network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawRow {
    pub experiment: String,
    pub grid_param: String,
    pub value: f64,
    pub method: String,
    pub rep: usize,
    pub seed: u64,
    /// Error rate; empty when the method failed.
    pub error: Option<f64>,
    pub seconds: f64,
    pub failure: Option<String>,
}

/// Aggregate over repetitions for one (grid point, method).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub grid_param: String,
    pub value: f64,
    pub method: String,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_seconds: f64,
    pub failures: usize,
    pub reps: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: Vec<SummaryRow>,
    pub raw: Vec<RawRow>,
}

/// Hamming error over all `n` nodes; nodes outside the clustered component count as errors.
fn run_method(
    graph: &pcc_core::Graph,
    truth: &pcc_core::LabelVector,
    method: Method,
    opts: &MethodOptions,
) -> Result<f64> {
    let k = truth.k();
    let d = detect(graph, k, method, opts)?;
    let aligned = align_and_score(&d.labels, &d.truth_subset(truth), k)?;
    Ok((aligned.mismatches + d.dropped) as f64 / truth.len() as f64)
}

fn run_task(spec: &ExperimentSpec, grid_index: usize, rep: usize) -> Vec<RawRow> {
    let value = spec.grid[grid_index];
    let seed = rep_seed(spec.seed, grid_index, rep);
    let row = |method: Method, error: Option<f64>, seconds: f64, failure: Option<String>| RawRow {
        experiment: spec.id.to_string(),
        grid_param: spec.grid_param.clone(),
        value,
        method: method.to_string(),
        rep,
        seed,
        error,
        seconds,
        failure,
    };
    // labels use the rep seed, edges the next one, so changing n does not
    // correlate the two streams
    let sample = spec
        .model_at(value)
        .and_then(|m| m.build(seed))
        .map(|params| (params.sample_adjacency(seed.wrapping_add(1)), params.labels().clone()));
    let (graph, truth) = match sample {
        Ok(s) => s,
        Err(e) => {
            let msg = e.to_string();
            return spec.methods.iter().map(|&m| row(m, None, 0.0, Some(msg.clone()))).collect();
        }
    };
    spec.methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let outcome = run_method(&graph, &truth, m, &spec.options);
            let seconds = if spec.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            match outcome {
                Ok(err) => row(m, Some(err), seconds, None),
                Err(e) => row(m, None, seconds, Some(e.to_string())),
            }
        })
        .collect()
}

fn summarize(spec: &ExperimentSpec, grid_index: usize, method_index: usize, raw: &[RawRow]) -> SummaryRow {
    let rows: Vec<&RawRow> = raw
        .iter()
        .skip(method_index)
        .step_by(spec.methods.len())
        .collect();
    let ok: Vec<&RawRow> = rows.iter().copied().filter(|r| r.error.is_some()).collect();
    let errors: Vec<f64> = ok.iter().filter_map(|r| r.error).collect();
    let count = errors.len() as f64;
    let mean = if errors.is_empty() { f64::NAN } else { errors.iter().sum::<f64>() / count };
    let std = if errors.len() < 2 {
        0.0
    } else {
        (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
    };
    let mean_seconds = if ok.is_empty() {
        0.0
    } else {
        ok.iter().map(|r| r.seconds).sum::<f64>() / ok.len() as f64
    };
    SummaryRow {
        experiment: spec.id.to_string(),
        grid_param: spec.grid_param.clone(),
        value: spec.grid[grid_index],
        method: spec.methods[method_index].to_string(),
        mean_error: mean,
        std_error: std,
        mean_seconds,
        failures: rows.len() - ok.len(),
        reps: rows.len(),
    }
}

/// Runs every repetition of every grid point.
///
/// Failed repetitions are excluded from the means and counted in `failures`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let tasks: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|g| (0..spec.reps).map(move |r| (g, r)))
        .collect();
    let per_task: Vec<Vec<RawRow>> = tasks
        .par_iter()
        .map(|&(g, r)| run_task(spec, g, r))
        .collect();

    let mut summary = Vec::with_capacity(spec.grid.len() * spec.methods.len());
    let mut raw = Vec::with_capacity(tasks.len() * spec.methods.len());
    for (g, chunk) in per_task.chunks(spec.reps).enumerate() {
        let flat: Vec<RawRow> = chunk.iter().flatten().cloned().collect();
        for m in 0..spec.methods.len() {
            summary.push(summarize(spec, g, m, &flat));
        }
        // rep-minor within each method
        for m in 0..spec.methods.len() {
            raw.extend(flat.iter().skip(m).step_by(spec.methods.len()).cloned());
        }
    }
    Ok(ExperimentOutput { summary, raw })
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io { path: PathBuf::from("<csv>"), source },
        other => Error::InvalidArgument(format!("CSV output failed: {other:?}")),
    }
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: PathBuf::from("<csv>"), source })
}

pub fn write_raw<W: Write>(rows: &[RawRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: PathBuf::from("<csv>"), source })
}
