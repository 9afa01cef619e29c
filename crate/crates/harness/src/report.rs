//! Single-network detection summaries and population checks.

use pcc_core::dcsbm::{
    error_bound_for_theta, random_params, verify_ideal_npcc, verify_ideal_pcc, DcsbmParams,
    IdealReport, ParamSpec,
};
use pcc_core::{align_and_score, detect, Detection, Graph, KMeansConfig, LabelVector, Method, MethodOptions, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Score {
    pub mismatches: usize,
    pub nodes: usize,
    pub error_rate: f64,
}

/// Error bound evaluated with degree-based estimates `θ̂_i = d_i / sqrt(Σ_j d_j)`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundDiagnostic {
    pub constant: f64,
    pub err_n: f64,
    pub err_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectReport {
    pub method: String,
    pub k: usize,
    pub nodes: usize,
    pub clustered: usize,
    pub dropped: usize,
    pub tau: Option<f64>,
    pub columns: usize,
    pub eigenvalues: Vec<f64>,
    pub ratio_gap: Option<f64>,
    pub kmeans_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<BoundDiagnostic>,
}

/// Plug-in error bound for an observed graph; `None` if some node has no edges.
pub fn plug_in_bound(graph: &Graph, c: f64) -> Option<BoundDiagnostic> {
    let degrees: Vec<f64> = graph.degrees().into_iter().map(|d| d as f64).collect();
    let total: f64 = degrees.iter().sum();
    if degrees.contains(&0.0) {
        return None;
    }
    let theta: Vec<f64> = degrees.iter().map(|d| d / total.sqrt()).collect();
    let rate = error_bound_for_theta(&theta, c);
    Some(BoundDiagnostic {
        constant: c,
        err_n: rate * graph.n() as f64,
        err_rate: rate,
    })
}

pub fn detect_report(
    graph: &Graph,
    truth: Option<&LabelVector>,
    method: Method,
    k: usize,
    opts: &MethodOptions,
) -> Result<(DetectReport, Detection)> {
    let d = detect(graph, k, method, opts)?;
    let score = match truth {
        Some(t) => {
            let aligned = align_and_score(&d.labels, &d.truth_subset(t), k.max(t.k()))?;
            Some(Score {
                mismatches: aligned.mismatches,
                nodes: d.labels.len(),
                error_rate: aligned.mismatches as f64 / d.labels.len() as f64,
            })
        }
        None => None,
    };
    let error_bound = if truth.is_some() {
        plug_in_bound(&graph.induced(&d.nodes), 1.0)
    } else {
        None
    };
    let report = DetectReport {
        method: method.to_string(),
        k,
        nodes: graph.n(),
        clustered: d.labels.len(),
        dropped: d.dropped,
        tau: d.tau,
        columns: d.columns,
        eigenvalues: d.eigenvalues.clone(),
        ratio_gap: d.ratio_gap,
        kmeans_seed: opts.kmeans.seed,
        labels_file: None,
        score,
        error_bound,
    };
    Ok((report, d))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub mismatches: usize,
    pub distinct_rows: usize,
    pub max_within: f64,
    pub min_across: f64,
    pub spectrum_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intertwining_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laplacian_gap: Option<f64>,
    pub failures: Vec<String>,
}

impl From<&IdealReport> for OracleCheck {
    fn from(r: &IdealReport) -> Self {
        OracleCheck {
            mismatches: r.result.mismatches,
            distinct_rows: r.distinct_rows,
            max_within: r.max_within,
            min_across: r.min_across,
            spectrum_gap: r.spectrum_gap,
            intertwining_gap: r.intertwining_gap,
            laplacian_gap: r.laplacian_gap,
            failures: r.failures.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleLine {
    pub case: String,
    pub n: usize,
    pub k: usize,
    pub tau: f64,
    pub pcc: OracleCheck,
    pub npcc: OracleCheck,
}

impl OracleLine {
    pub fn passed(&self) -> bool {
        self.pcc.failures.is_empty() && self.npcc.failures.is_empty()
    }
}

/// Runs both population checks; τ defaults to the mean expected degree.
pub fn oracle_case(case: &str, params: &DcsbmParams, tau: Option<f64>, cfg: &KMeansConfig) -> Result<OracleLine> {
    let tau = match tau {
        Some(t) => t,
        None => {
            let omega = params.build_omega();
            omega.sum() / params.n() as f64
        }
    };
    let pcc = verify_ideal_pcc(params, cfg)?;
    let npcc = verify_ideal_npcc(params, tau, cfg)?;
    Ok(OracleLine {
        case: case.to_string(),
        n: params.n(),
        k: params.k(),
        tau,
        pcc: (&pcc).into(),
        npcc: (&npcc).into(),
    })
}

/// `draws` random parameter sets (n in [20, 200], K in {2, 3, 4}) plus the
/// three-community example.
pub fn oracle_suite(draws: usize, seed: u64, tau: Option<f64>, cfg: &KMeansConfig) -> Result<Vec<OracleLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::with_capacity(draws + 1);
    for draw in 0..draws {
        let n = rng.random_range(20..=200);
        let k = rng.random_range(2..=4);
        let params = random_params(n, k, rng.random())?;
        lines.push(oracle_case(&format!("draw-{draw}"), &params, tau, cfg)?);
    }
    let example = ParamSpec::three_block_example(seed).build(seed)?;
    lines.push(oracle_case("three-block", &example, tau, cfg)?);
    Ok(lines)
}
