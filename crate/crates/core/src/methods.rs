//! Spectral community detection: PCC and NPCC with their `+` and `*`
//! variants, plus the RSC and SCORE baselines.
//!
//! Every method maps `(graph, K, options)` to labels. Disconnected graphs are
//! reduced to their largest connected component first; the dropped node count
//! is reported alongside the labels.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, KMeansConfig};
use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::graph::{largest_connected_component, Graph, LabelVector};
use crate::linalg::{CsrMatrix, Matrix};
use crate::spectral::{
    default_tau, embed, regularized_laplacian, row_normalize, top_eigenpairs_colnorm,
    top_eigenpairs_symmetric,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "pcc")]
    Pcc,
    #[serde(rename = "npcc")]
    Npcc,
    #[serde(rename = "pcc+")]
    PccPlus,
    #[serde(rename = "npcc+")]
    NpccPlus,
    #[serde(rename = "pcc*")]
    PccStar,
    #[serde(rename = "npcc*")]
    NpccStar,
    #[serde(rename = "rsc")]
    Rsc,
    #[serde(rename = "score")]
    Score,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Pcc,
        Method::Npcc,
        Method::PccPlus,
        Method::NpccPlus,
        Method::PccStar,
        Method::NpccStar,
        Method::Rsc,
        Method::Score,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pcc => "pcc",
            Method::Npcc => "npcc",
            Method::PccPlus => "pcc+",
            Method::NpccPlus => "npcc+",
            Method::PccStar => "pcc*",
            Method::NpccStar => "npcc*",
            Method::Rsc => "rsc",
            Method::Score => "score",
        }
    }

    /// Whether the method works on the regularised Laplacian (and so uses τ).
    pub fn uses_tau(self) -> bool {
        matches!(self, Method::Npcc | Method::NpccPlus | Method::NpccStar | Method::Rsc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method {s:?}; expected one of pcc, npcc, pcc+, npcc+, pcc*, npcc*, rsc, score"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodOptions {
    /// Laplacian regulariser; the mean degree when absent.
    pub tau: Option<f64>,
    /// Ratio-gap threshold of the `+` variants.
    pub threshold_t: f64,
    /// Eigenvector count of the `*` variants; K when absent.
    pub mk: Option<usize>,
    /// Makes the `+` variants always use K+1 columns.
    pub force_plus: bool,
    pub kmeans: KMeansConfig,
}

impl Default for MethodOptions {
    fn default() -> Self {
        MethodOptions {
            tau: None,
            threshold_t: 0.1,
            mk: None,
            force_plus: false,
            kmeans: KMeansConfig::default(),
        }
    }
}

impl MethodOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(tau) = self.tau {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
            }
        }
        if !(self.threshold_t > 0.0 && self.threshold_t < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold t must lie in (0, 1), got {}",
                self.threshold_t
            )));
        }
        self.kmeans.validate()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.kmeans.seed = seed;
        self
    }
}

/// Labels produced by a method, with what it used along the way.
#[derive(Debug, Clone)]
pub struct Detection {
    pub method: Method,
    /// Labels of the nodes in `nodes`.
    pub labels: LabelVector,
    /// `nodes[i]` is the source-graph index of labelled node `i`.
    pub nodes: Vec<usize>,
    /// Nodes outside the largest connected component.
    pub dropped: usize,
    /// Number of eigenvectors in the embedding.
    pub columns: usize,
    pub tau: Option<f64>,
    /// Leading eigenvalues that were computed, in magnitude order.
    pub eigenvalues: Vec<f64>,
    /// `1 − |λ_{K+1}/λ_K|` for the `+` variants.
    pub ratio_gap: Option<f64>,
}

impl Detection {
    /// Labels indexed by source-graph node; `None` for dropped nodes.
    pub fn full_labels(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (&node, &l) in self.nodes.iter().zip(self.labels.as_slice()) {
            out[node] = Some(l);
        }
        out
    }

    /// Restricts ground truth to the labelled nodes.
    pub fn truth_subset(&self, truth: &LabelVector) -> LabelVector {
        truth.subset(&self.nodes)
    }
}

/// Which matrix a method decomposes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    Adjacency,
    /// `N^{L_τ}`, the column-normalised regularised Laplacian.
    ColumnNormalized { tau: f64 },
    /// `L_τ` itself.
    Laplacian { tau: f64 },
}

/// Leading `m` eigenpairs of the chosen operator on a connected graph.
pub fn spectrum(graph: &Graph, operator: Operator, m: usize) -> Result<EigenBasis> {
    match operator {
        Operator::Adjacency => {
            top_eigenpairs_symmetric(&Matrix::Sparse(CsrMatrix::adjacency(graph)), m)
        }
        Operator::ColumnNormalized { tau } => {
            top_eigenpairs_colnorm(&regularized_laplacian(graph, tau)?, m)
        }
        Operator::Laplacian { tau } => top_eigenpairs_symmetric(&regularized_laplacian(graph, tau)?, m),
    }
}

/// Row-normalised `X = V·E` from the first `columns` pairs, then k-means.
pub fn cluster_embedding(
    basis: &EigenBasis,
    columns: usize,
    k: usize,
    cfg: &KMeansConfig,
) -> Result<LabelVector> {
    let embedding = embed(&basis.truncated(columns));
    Ok(kmeans(&embedding.x_star, k, cfg)?.labels)
}

/// `1 − |λ_{K+1} / λ_K|` from magnitude-ordered values.
pub fn ratio_gap(values: &[f64], k: usize) -> Option<f64> {
    let (lk, lk1) = (*values.get(k - 1)?, *values.get(k)?);
    if lk == 0.0 {
        return None;
    }
    Some(1.0 - (lk1 / lk).abs())
}

/// Column count of a `+` variant: K+1 when the ratio gap falls below `t`.
pub fn plus_columns(values: &[f64], k: usize, opts: &MethodOptions) -> usize {
    if opts.force_plus {
        return k + 1;
    }
    match ratio_gap(values, k) {
        Some(gap) if gap < opts.threshold_t => k + 1,
        _ => k,
    }
}

/// Coordinate-wise ratios `v_k(i) / v_1(i)`, `k = 2..K`, clipped to `±log n`.
pub fn score_ratios(vectors: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = vectors.nrows();
    let bound = (n as f64).ln().max(1.0);
    DMatrix::from_fn(n, k.saturating_sub(1).max(1), |i, c| {
        if k < 2 {
            return 0.0;
        }
        let lead = vectors[(i, 0)];
        let other = vectors[(i, c + 1)];
        let r = if lead != 0.0 {
            other / lead
        } else if other == 0.0 {
            0.0
        } else {
            other.signum() * f64::INFINITY
        };
        r.clamp(-bound, bound)
    })
}

struct Prepared {
    graph: Graph,
    nodes: Vec<usize>,
    dropped: usize,
}

fn prepare(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Prepared> {
    opts.validate()?;
    if graph.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let prepared = if graph.is_connected() {
        Prepared {
            graph: graph.clone(),
            nodes: (0..graph.n()).collect(),
            dropped: 0,
        }
    } else {
        let component = largest_connected_component(graph, None);
        let dropped = component.dropped(graph.n());
        warn!("graph is disconnected; clustering the largest component and dropping {dropped} nodes");
        Prepared {
            graph: component.graph,
            nodes: component.nodes,
            dropped,
        }
    };
    if k > prepared.graph.n() {
        return Err(Error::InvalidArgument(format!(
            "K = {k} exceeds the {} nodes being clustered",
            prepared.graph.n()
        )));
    }
    Ok(prepared)
}

fn check_columns(needed: usize, n: usize) -> Result<()> {
    if needed > n {
        return Err(Error::InvalidArgument(format!(
            "{needed} eigenvectors requested for {n} nodes"
        )));
    }
    Ok(())
}

/// Runs `method` with `K` communities.
pub fn detect(graph: &Graph, k: usize, method: Method, opts: &MethodOptions) -> Result<Detection> {
    let prep = prepare(graph, k, opts)?;
    let g = &prep.graph;
    let n = g.n();
    let tau = if method.uses_tau() {
        Some(match opts.tau {
            Some(t) => t,
            None => default_tau(g)?,
        })
    } else {
        None
    };
    let operator = match (method, tau) {
        (Method::Rsc, Some(tau)) => Operator::Laplacian { tau },
        (_, Some(tau)) => Operator::ColumnNormalized { tau },
        (_, None) => Operator::Adjacency,
    };

    let mut ratio = None;
    let (labels, columns, eigenvalues) = match method {
        Method::Pcc | Method::Npcc => {
            let basis = spectrum(g, operator, k)?;
            let labels = cluster_embedding(&basis, k, k, &opts.kmeans)?;
            (labels, k, basis.values().to_vec())
        }
        Method::PccPlus | Method::NpccPlus => {
            check_columns(k + 1, n)?;
            let basis = spectrum(g, operator, k + 1)?;
            ratio = ratio_gap(basis.values(), k);
            let m = plus_columns(basis.values(), k, opts);
            let labels = cluster_embedding(&basis, m, k, &opts.kmeans)?;
            (labels, m, basis.values().to_vec())
        }
        Method::PccStar | Method::NpccStar => {
            let m = opts.mk.unwrap_or(k);
            if m < k {
                return Err(Error::InvalidArgument(format!("M_k = {m} is below K = {k}")));
            }
            check_columns(m, n)?;
            let basis = spectrum(g, operator, m)?;
            let labels = cluster_embedding(&basis, m, k, &opts.kmeans)?;
            (labels, m, basis.values().to_vec())
        }
        Method::Rsc => {
            let basis = spectrum(g, operator, k)?;
            let (x_star, _) = row_normalize(basis.vectors());
            let labels = kmeans(&x_star, k, &opts.kmeans)?.labels;
            (labels, k, basis.values().to_vec())
        }
        Method::Score => {
            let basis = spectrum(g, operator, k)?;
            let ratios = score_ratios(basis.vectors(), k);
            let labels = kmeans(&ratios, k, &opts.kmeans)?.labels;
            (labels, k, basis.values().to_vec())
        }
    };
    Ok(Detection {
        method,
        labels,
        nodes: prep.nodes,
        dropped: prep.dropped,
        columns,
        tau,
        eigenvalues,
        ratio_gap: ratio,
    })
}

pub fn pcc(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::Pcc, opts)
}

pub fn npcc(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::Npcc, opts)
}

pub fn pcc_plus(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::PccPlus, opts)
}

pub fn npcc_plus(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::NpccPlus, opts)
}

pub fn pcc_star(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::PccStar, opts)
}

pub fn npcc_star(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::NpccStar, opts)
}

pub fn rsc_baseline(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::Rsc, opts)
}

pub fn score_baseline(graph: &Graph, k: usize, opts: &MethodOptions) -> Result<Detection> {
    detect(graph, k, Method::Score, opts)
}

/// Runs a `*` method for every `M_k` in `grid`, decomposing once at the largest value.
pub fn star_sweep(
    graph: &Graph,
    k: usize,
    method: Method,
    grid: &[usize],
    opts: &MethodOptions,
) -> Result<Vec<Detection>> {
    if !matches!(method, Method::PccStar | Method::NpccStar) {
        return Err(Error::InvalidArgument(format!("{method} has no M_k parameter")));
    }
    let Some(&max) = grid.iter().max() else {
        return Err(Error::InvalidArgument("empty M_k grid".into()));
    };
    if let Some(&bad) = grid.iter().find(|&&m| m < k) {
        return Err(Error::InvalidArgument(format!("M_k = {bad} is below K = {k}")));
    }
    let prep = prepare(graph, k, opts)?;
    check_columns(max, prep.graph.n())?;
    let (operator, tau) = if method == Method::NpccStar {
        let tau = match opts.tau {
            Some(t) => t,
            None => default_tau(&prep.graph)?,
        };
        (Operator::ColumnNormalized { tau }, Some(tau))
    } else {
        (Operator::Adjacency, None)
    };
    let basis = spectrum(&prep.graph, operator, max)?;
    grid.iter()
        .map(|&m| {
            Ok(Detection {
                method,
                labels: cluster_embedding(&basis, m, k, &opts.kmeans)?,
                nodes: prep.nodes.clone(),
                dropped: prep.dropped,
                columns: m,
                tau,
                eigenvalues: basis.values()[..m].to_vec(),
                ratio_gap: None,
            })
        })
        .collect()
}
