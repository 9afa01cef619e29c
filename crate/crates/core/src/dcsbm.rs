//! Degree-corrected stochastic block model.
//!
//! Edge `(i, j)` appears independently with probability
//! `Ω_ij = θ_i θ_j P[g_i][g_j]`. Besides sampling, this module builds the
//! population matrices (Ω, its regularised Laplacian and the column-normalised
//! version) and runs the clustering pipelines on them, where recovery must be
//! exact. Those checks double as end-to-end oracles for the spectral code.

use std::time::Instant;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, ClusterResult, KMeansConfig};
use crate::eigen::{magnitude_order, symmetric_top, Solver};
use crate::error::{Error, Result};
use crate::graph::{Graph, LabelVector};
use crate::linalg::Matrix;
use crate::spectral::{column_normalize, degree_normalized, embed, top_eigenpairs_colnorm_with};

/// Numerical rank threshold relative to the largest eigenvalue magnitude.
pub const RANK_TOL: f64 = 1e-8;

/// Population rows closer than this are the same point.
pub const SAME_ROW_TOL: f64 = 1e-8;
/// Population rows of different communities must be at least this far apart.
pub const DISTINCT_ROW_TOL: f64 = 1e-4;

const PROB_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmParams {
    p: DMatrix<f64>,
    theta: Vec<f64>,
    labels: LabelVector,
}

impl DcsbmParams {
    pub fn new(p: DMatrix<f64>, theta: Vec<f64>, labels: LabelVector) -> Result<Self> {
        let k = p.nrows();
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if k == 0 || p.ncols() != k {
            return bad(format!("mixing matrix must be square and nonempty, got {:?}", p.shape()));
        }
        for i in 0..k {
            for j in 0..k {
                let v = p[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("P[{i}][{j}] = {v} is outside [0, 1]"));
                }
                if (v - p[(j, i)]).abs() > 1e-12 {
                    return bad(format!("P is not symmetric at ({i}, {j})"));
                }
            }
        }
        let n = theta.len();
        if n == 0 {
            return bad("theta is empty".into());
        }
        if labels.len() != n {
            return bad(format!("{} labels for {n} nodes", labels.len()));
        }
        if labels.k() != k {
            return bad(format!("labels range over {} communities, P is {k}x{k}", labels.k()));
        }
        if let Some((i, t)) = theta.iter().enumerate().find(|(_, t)| !(t.is_finite() && **t > 0.0)) {
            return bad(format!("theta[{i}] = {t} must be positive"));
        }
        let mut max_theta = vec![0.0f64; k];
        for (&l, &t) in labels.as_slice().iter().zip(&theta) {
            max_theta[l] = max_theta[l].max(t);
        }
        if let Some(empty) = max_theta.iter().position(|&t| t == 0.0) {
            return bad(format!("community {} has no nodes", empty + 1));
        }
        for a in 0..k {
            for b in 0..k {
                let worst = max_theta[a] * max_theta[b] * p[(a, b)];
                if worst > 1.0 + PROB_SLACK {
                    return bad(format!(
                        "edge probability {worst} > 1 between communities {} and {}",
                        a + 1,
                        b + 1
                    ));
                }
            }
        }
        let params = DcsbmParams { p, theta, labels };
        for w in params.warnings() {
            warn!("{w}");
        }
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn k(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn labels(&self) -> &LabelVector {
        &self.labels
    }

    /// Edge probability between nodes `i` and `j`.
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        self.theta[i] * self.theta[j] * self.p[(self.labels.get(i), self.labels.get(j))]
    }

    /// Model assumptions that are violated but not fatal: singular or reducible `P`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let eig = SymmetricEigen::new(self.p.clone());
        let top = eig.eigenvalues.amax();
        if eig.eigenvalues.iter().any(|v| v.abs() <= RANK_TOL * top.max(f64::MIN_POSITIVE)) {
            out.push("mixing matrix P is (numerically) singular".to_string());
        }
        if !support_connected(&self.p) {
            out.push("mixing matrix P is reducible".to_string());
        }
        out
    }

    /// `‖θ^{(k)}‖` for each community.
    pub fn community_theta_norms(&self) -> Vec<f64> {
        community_norms(&self.theta, &self.labels)
    }

    /// `D̄ P D̄` with `D̄ = diag(‖θ^{(k)}‖ / ‖θ‖)`.
    pub fn scaled_mixing(&self) -> DMatrix<f64> {
        let total = l2(&self.theta);
        let d: Vec<f64> = self.community_theta_norms().iter().map(|v| v / total).collect();
        DMatrix::from_fn(self.k(), self.k(), |a, b| d[a] * self.p[(a, b)] * d[b])
    }

    /// `Ω = Θ Z P Z' Θ`.
    pub fn build_omega(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| self.omega(i, j))
    }

    /// Draws a symmetric adjacency matrix: independent Bernoulli(Ω_ij) above the diagonal.
    pub fn sample_adjacency(&self, seed: u64) -> Graph {
        let n = self.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < self.omega(i, j) {
                    edges.push((i, j));
                }
            }
        }
        Graph::from_edges(n, edges).expect("indices in range")
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn community_norms(values: &[f64], labels: &LabelVector) -> Vec<f64> {
    let mut sq = vec![0.0; labels.k()];
    for (&l, &v) in labels.as_slice().iter().zip(values) {
        sq[l] += v * v;
    }
    sq.into_iter().map(f64::sqrt).collect()
}

fn support_connected(p: &DMatrix<f64>) -> bool {
    let k = p.nrows();
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..k {
            if !seen[b] && p[(a, b)] > 0.0 {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub fn build_omega(params: &DcsbmParams) -> DMatrix<f64> {
    params.build_omega()
}

pub fn sample_adjacency(params: &DcsbmParams, seed: u64) -> Graph {
    params.sample_adjacency(seed)
}

/// Population-level matrices for a given regulariser.
#[derive(Debug, Clone)]
pub struct PopulationModel {
    pub omega: DMatrix<f64>,
    /// Expected degrees `𝒟_ii = Σ_j Ω_ij`.
    pub expected_degrees: Vec<f64>,
    pub tau: f64,
    /// `𝒟_τ^{-1/2} Ω 𝒟_τ^{-1/2}`.
    pub laplacian: DMatrix<f64>,
    /// `Θ_τ^{1/2} Z P̃ Z' Θ_τ^{1/2}`, built independently of `laplacian`.
    pub laplacian_product: DMatrix<f64>,
    /// `θ_i 𝒟_ii / (𝒟_ii + τ)`.
    pub theta_tau: Vec<f64>,
    /// `sqrt(θ^τ_i)`.
    pub theta_tilde: Vec<f64>,
    /// `‖θ̃^{(k)}‖ / ‖θ̃‖`.
    pub d_tilde: Vec<f64>,
    /// Row sums of `Q = P Z' Θ`.
    pub d_p: Vec<f64>,
    /// `D_P^{-1/2} P D_P^{-1/2}`.
    pub p_tilde: DMatrix<f64>,
    labels: LabelVector,
}

pub fn population_model(params: &DcsbmParams, tau: f64) -> Result<PopulationModel> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    let n = params.n();
    let k = params.k();
    let labels = params.labels().clone();
    let omega = params.build_omega();
    let expected_degrees: Vec<f64> = omega.row_iter().map(|r| r.sum()).collect();
    if let Some(node) = expected_degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDegree { node });
    }
    let laplacian = degree_normalized(&Matrix::Dense(omega.clone()), tau)?.to_dense();

    let mut d_p = vec![0.0; k];
    for (a, dp) in d_p.iter_mut().enumerate() {
        *dp = (0..n)
            .map(|j| params.p()[(a, labels.get(j))] * params.theta()[j])
            .sum();
    }
    let p_tilde = DMatrix::from_fn(k, k, |a, b| params.p()[(a, b)] / (d_p[a] * d_p[b]).sqrt());
    let theta_tau: Vec<f64> = params
        .theta()
        .iter()
        .zip(&expected_degrees)
        .map(|(t, d)| t * d / (d + tau))
        .collect();
    let theta_tilde: Vec<f64> = theta_tau.iter().map(|t| t.sqrt()).collect();
    let laplacian_product = DMatrix::from_fn(n, n, |i, j| {
        theta_tilde[i] * p_tilde[(labels.get(i), labels.get(j))] * theta_tilde[j]
    });
    let total = l2(&theta_tilde);
    let d_tilde = community_norms(&theta_tilde, &labels)
        .into_iter()
        .map(|v| v / total)
        .collect();
    Ok(PopulationModel {
        omega,
        expected_degrees,
        tau,
        laplacian,
        laplacian_product,
        theta_tau,
        theta_tilde,
        d_tilde,
        d_p,
        p_tilde,
        labels,
    })
}

impl PopulationModel {
    /// Largest entrywise gap between the two Laplacian constructions.
    pub fn laplacian_gap(&self) -> f64 {
        (&self.laplacian - &self.laplacian_product).amax()
    }

    /// `Γ̃`: column k is `θ̃^{(k)} / ‖θ̃^{(k)}‖`.
    pub fn gamma_tilde(&self) -> DMatrix<f64> {
        let norms = community_norms(&self.theta_tilde, &self.labels);
        let n = self.theta_tilde.len();
        let mut g = DMatrix::zeros(n, self.labels.k());
        for i in 0..n {
            let c = self.labels.get(i);
            g[(i, c)] = self.theta_tilde[i] / norms[c];
        }
        g
    }

    /// `N^{𝓛_τ}`, the column-normalised population Laplacian.
    pub fn column_normalized(&self) -> DMatrix<f64> {
        column_normalize(&Matrix::Dense(self.laplacian.clone())).to_dense()
    }

    /// `F̃ = Γ̃' N^{𝓛_τ} Γ̃`.
    pub fn f_tilde(&self) -> DMatrix<f64> {
        let g = self.gamma_tilde();
        g.transpose() * self.column_normalized() * g
    }
}

/// Minimum gap between adjacent sorted eigenvalues of a symmetric matrix.
///
/// `None` for matrices smaller than 2x2.
pub fn eigsp(b: &DMatrix<f64>) -> Option<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(b.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.windows(2).map(|w| (w[0] - w[1]).abs()).reduce(f64::min)
}

/// What a population check measured and which of its assertions failed.
#[derive(Debug, Clone)]
pub struct IdealReport {
    pub result: ClusterResult,
    /// Number of distinct rows in the normalised embedding.
    pub distinct_rows: usize,
    /// Largest distance between normalised rows of the same community.
    pub max_within: f64,
    /// Smallest distance between normalised rows of different communities.
    pub min_across: f64,
    /// Largest gap between the computed eigenvalues and the closed-form K×K prediction.
    pub spectrum_gap: f64,
    /// `max |Γ̃F̃ − N Γ̃|` (NPCC only).
    pub intertwining_gap: Option<f64>,
    /// `max |𝓛_τ − product form|` (NPCC only).
    pub laplacian_gap: Option<f64>,
    pub failures: Vec<String>,
}

impl IdealReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Turns recorded failures into an error.
    pub fn ensure(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::Oracle(self.failures.join("; ")))
        }
    }
}

fn row_geometry(x_star: &DMatrix<f64>, labels: &LabelVector) -> (f64, f64, usize) {
    let n = x_star.nrows();
    let mut within: f64 = 0.0;
    let mut across = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let d = (x_star.row(i) - x_star.row(j)).norm();
            if labels.get(i) == labels.get(j) {
                within = within.max(d);
            } else {
                across = across.min(d);
            }
        }
    }
    // count clusters of rows under the same-row tolerance
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        if !reps.iter().any(|&r| (x_star.row(i) - x_star.row(r)).norm() < SAME_ROW_TOL) {
            reps.push(i);
        }
    }
    (within, across, reps.len())
}

fn sorted_by_magnitude(values: &[f64]) -> Vec<f64> {
    magnitude_order(values).into_iter().map(|i| values[i]).collect()
}

fn spectrum_tolerance(values: &[f64]) -> f64 {
    1e-8 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn common_checks(
    failures: &mut Vec<String>,
    result: &ClusterResult,
    distinct: usize,
    within: f64,
    across: f64,
    k: usize,
) {
    if result.mismatches != 0 {
        failures.push(format!("{} mismatched labels", result.mismatches));
    }
    if distinct != k {
        failures.push(format!("normalised embedding has {distinct} distinct rows, expected {k}"));
    }
    if within >= SAME_ROW_TOL {
        failures.push(format!("rows of one community differ by {within:e}"));
    }
    if across <= DISTINCT_ROW_TOL {
        failures.push(format!("rows of different communities only {across:e} apart"));
    }
}

/// Runs PCC on Ω instead of a sample; recovery must be perfect.
///
/// Also checks that the nonzero eigenvalues of Ω are `‖θ‖²` times those of `D̄PD̄`.
pub fn verify_ideal_pcc(params: &DcsbmParams, cfg: &KMeansConfig) -> Result<IdealReport> {
    let start = Instant::now();
    let k = params.k();
    let omega = Matrix::Dense(params.build_omega());
    let basis = symmetric_top(&omega, k, Solver::Dense)?;
    let embedding = embed(&basis);
    let fit = kmeans(&embedding.x_star, k, cfg)?;
    let result = ClusterResult::score(fit.labels, params.labels(), start.elapsed())?;

    let theta_sq = params.theta().iter().map(|t| t * t).sum::<f64>();
    let small: Vec<f64> = SymmetricEigen::new(params.scaled_mixing())
        .eigenvalues
        .iter()
        .map(|v| v * theta_sq)
        .collect();
    let predicted = sorted_by_magnitude(&small);
    let spectrum_gap = predicted
        .iter()
        .zip(basis.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let (max_within, min_across, distinct_rows) = row_geometry(&embedding.x_star, params.labels());
    let mut failures = Vec::new();
    common_checks(&mut failures, &result, distinct_rows, max_within, min_across, k);
    if spectrum_gap > spectrum_tolerance(basis.values()) {
        failures.push(format!("eigenvalues of Ω differ from ‖θ‖²·eig(D̄PD̄) by {spectrum_gap:e}"));
    }
    Ok(IdealReport {
        result,
        distinct_rows,
        max_within,
        min_across,
        spectrum_gap,
        intertwining_gap: None,
        laplacian_gap: None,
        failures,
    })
}

/// Runs NPCC on the population Laplacian; recovery must be perfect.
///
/// Also checks `Γ̃F̃ = N Γ̃`, that the leading eigenvalues of `N` equal those
/// of the K×K matrix `F̃`, and that both Laplacian constructions agree.
pub fn verify_ideal_npcc(params: &DcsbmParams, tau: f64, cfg: &KMeansConfig) -> Result<IdealReport> {
    let start = Instant::now();
    let k = params.k();
    let model = population_model(params, tau)?;
    let basis = top_eigenpairs_colnorm_with(&Matrix::Dense(model.laplacian.clone()), k, Solver::Dense)?;
    let embedding = embed(&basis);
    let fit = kmeans(&embedding.x_star, k, cfg)?;
    let result = ClusterResult::score(fit.labels, params.labels(), start.elapsed())?;

    let gamma = model.gamma_tilde();
    let n_mat = model.column_normalized();
    let f = gamma.transpose() * &n_mat * &gamma;
    let intertwining_gap = (&gamma * &f - &n_mat * &gamma).amax();

    let complex = f.complex_eigenvalues();
    let max_imag = complex.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let real: Vec<f64> = complex.iter().map(|c| c.re).collect();
    let predicted = sorted_by_magnitude(&real);
    let spectrum_gap = predicted
        .iter()
        .zip(basis.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let laplacian_gap = model.laplacian_gap();

    let (max_within, min_across, distinct_rows) = row_geometry(&embedding.x_star, params.labels());
    let mut failures = Vec::new();
    common_checks(&mut failures, &result, distinct_rows, max_within, min_across, k);
    if intertwining_gap > 1e-8 {
        failures.push(format!("Γ̃F̃ differs from NΓ̃ by {intertwining_gap:e}"));
    }
    if spectrum_gap > spectrum_tolerance(basis.values()) || max_imag > 1e-8 {
        failures.push(format!(
            "eigenvalues of N differ from those of F̃ by {spectrum_gap:e} (imaginary {max_imag:e})"
        ));
    }
    if laplacian_gap > 1e-10 {
        failures.push(format!("Laplacian constructions differ by {laplacian_gap:e}"));
    }
    Ok(IdealReport {
        result,
        distinct_rows,
        max_within,
        min_across,
        spectrum_gap,
        intertwining_gap: Some(intertwining_gap),
        laplacian_gap: Some(laplacian_gap),
        failures,
    })
}

/// Hamming error bound `err_n / n` for PCC, up to the unspecified constant `c`.
///
/// Diagnostic only; nothing in the clustering path reads it.
pub fn error_bound(params: &DcsbmParams, c: f64) -> f64 {
    error_bound_for_theta(params.theta(), c)
}

pub fn error_bound_for_theta(theta: &[f64], c: f64) -> f64 {
    let n = theta.len() as f64;
    let log_n = n.ln();
    let l1: f64 = theta.iter().sum();
    let l2sq: f64 = theta.iter().map(|t| t * t).sum();
    let l3cube: f64 = theta.iter().map(|t| t * t * t).sum();
    let t_max = theta.iter().copied().fold(0.0, f64::max);
    let first = 4.0 * (n * log_n * t_max * l1 / l2sq.powi(2)).sqrt();
    let second = (n * c * log_n * l1 * l3cube / l2sq.powi(3)).sqrt();
    4.0 * (first + second).powi(2) / n
}

/// Quantities behind the consistency assumptions; reported, never enforced.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// `log(n) θ_max ‖θ‖₁ / ‖θ‖⁴`, should be small.
    pub sparsity: f64,
    /// `eigsp(D̄PD̄)`.
    pub eigen_spacing: Option<f64>,
    /// `max ‖θ^{(i)}‖ / ‖θ^{(j)}‖`.
    pub balance: f64,
    /// `log(n) θ_max² / θ_min`.
    pub heterogeneity: f64,
    /// `‖θ‖₃³`, compared against `heterogeneity`.
    pub theta_l3_cubed: f64,
}

pub fn check_assumptions(params: &DcsbmParams) -> AssumptionReport {
    let theta = params.theta();
    let log_n = (theta.len() as f64).ln();
    let l1: f64 = theta.iter().sum();
    let l2sq: f64 = theta.iter().map(|t| t * t).sum();
    let t_max = theta.iter().copied().fold(0.0, f64::max);
    let t_min = theta.iter().copied().fold(f64::INFINITY, f64::min);
    let norms = params.community_theta_norms();
    let hi = norms.iter().copied().fold(0.0, f64::max);
    let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
    AssumptionReport {
        sparsity: log_n * t_max * l1 / l2sq.powi(2),
        eigen_spacing: eigsp(&params.scaled_mixing()),
        balance: hi / lo,
        heterogeneity: log_n * t_max * t_max / t_min,
        theta_l3_cubed: theta.iter().map(|t| t.powi(3)).sum(),
    }
}

/// JSON description of a parameter set, with optional generators for θ and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub n: usize,
    #[serde(rename = "K", alias = "k")]
    pub k: usize,
    /// Row-major K×K mixing matrix.
    #[serde(rename = "P", alias = "p")]
    pub p: Vec<f64>,
    pub theta: ThetaSpec,
    pub labels: LabelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Explicit(Vec<f64>),
    Generated(ThetaGenerator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum ThetaGenerator {
    Constant { value: f64 },
    /// One value per community.
    ByCommunity { values: Vec<f64> },
    /// `θ_i = base + scale·(i/n)^exponent`, `i = 1..n`.
    Power { base: f64, scale: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelSpec {
    /// 1-based community per node.
    Explicit(Vec<usize>),
    Generated(LabelGenerator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum LabelGenerator {
    /// Each node independently uniform over the K communities.
    EqualProbability {
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Contiguous blocks with the given relative sizes.
    Proportions { fractions: Vec<f64> },
}

impl ThetaGenerator {
    pub fn generate(&self, labels: &LabelVector) -> Result<Vec<f64>> {
        let n = labels.len();
        Ok(match self {
            ThetaGenerator::Constant { value } => vec![*value; n],
            ThetaGenerator::ByCommunity { values } => {
                if values.len() != labels.k() {
                    return Err(Error::InvalidParams(format!(
                        "{} theta values for {} communities",
                        values.len(),
                        labels.k()
                    )));
                }
                labels.as_slice().iter().map(|&l| values[l]).collect()
            }
            ThetaGenerator::Power { base, scale, exponent } => (1..=n)
                .map(|i| base + scale * (i as f64 / n as f64).powf(*exponent))
                .collect(),
        })
    }
}

impl LabelGenerator {
    pub fn generate(&self, n: usize, k: usize, fallback_seed: u64) -> Result<LabelVector> {
        let labels = match self {
            LabelGenerator::EqualProbability { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(fallback_seed));
                (0..n).map(|_| rng.random_range(0..k)).collect()
            }
            LabelGenerator::Proportions { fractions } => {
                if fractions.len() != k || fractions.iter().any(|f| f.is_nan() || *f <= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "need {k} positive fractions, got {fractions:?}"
                    )));
                }
                let total: f64 = fractions.iter().sum();
                let mut labels = Vec::with_capacity(n);
                let mut cumulative = 0.0;
                for (c, f) in fractions.iter().enumerate() {
                    cumulative += f / total;
                    let end = if c + 1 == k { n } else { (n as f64 * cumulative).round() as usize };
                    while labels.len() < end.min(n) {
                        labels.push(c);
                    }
                }
                labels
            }
        };
        LabelVector::new(labels, k)
    }
}

impl ParamSpec {
    /// Instantiates the parameters; `seed` drives random label generators that
    /// do not carry their own seed.
    pub fn build(&self, seed: u64) -> Result<DcsbmParams> {
        if self.p.len() != self.k * self.k {
            return Err(Error::InvalidParams(format!(
                "P has {} entries, expected {}",
                self.p.len(),
                self.k * self.k
            )));
        }
        let p = DMatrix::from_row_slice(self.k, self.k, &self.p);
        let labels = match &self.labels {
            LabelSpec::Explicit(l) => {
                if l.len() != self.n {
                    return Err(Error::InvalidParams(format!("{} labels for n = {}", l.len(), self.n)));
                }
                if l.iter().any(|&x| x == 0 || x > self.k) {
                    return Err(Error::InvalidParams(format!("labels must lie in 1..={}", self.k)));
                }
                LabelVector::new(l.iter().map(|x| x - 1).collect(), self.k)?
            }
            LabelSpec::Generated(g) => g.generate(self.n, self.k, seed)?,
        };
        let theta = match &self.theta {
            ThetaSpec::Explicit(t) => t.clone(),
            ThetaSpec::Generated(g) => g.generate(&labels)?,
        };
        if theta.len() != self.n {
            return Err(Error::InvalidParams(format!("{} theta values for n = {}", theta.len(), self.n)));
        }
        DcsbmParams::new(p, theta, labels)
    }

    /// Three-community example with smoothly varying degrees: n = 90, P with 0.6
    /// on the diagonal and 0.3 elsewhere, `θ_i = 0.3 + 0.7 (i/n)²`, uniform labels.
    pub fn three_block_example(seed: u64) -> ParamSpec {
        let mut p = vec![0.3; 9];
        for a in 0..3 {
            p[a * 3 + a] = 0.6;
        }
        ParamSpec {
            n: 90,
            k: 3,
            p,
            theta: ThetaSpec::Generated(ThetaGenerator::Power {
                base: 0.3,
                scale: 0.7,
                exponent: 2.0,
            }),
            labels: LabelSpec::Generated(LabelGenerator::EqualProbability { seed: Some(seed) }),
        }
    }
}

/// Random valid parameters: `P` with diagonal in [0.6, 1] and off-diagonal
/// entries in [0, 0.15], `θ` in [0.2, 1], every community nonempty.
///
/// For K ≤ 4 the mixing matrix is strictly diagonally dominant, hence nonsingular.
pub fn random_params(n: usize, k: usize, seed: u64) -> Result<DcsbmParams> {
    if k == 0 || n < 2 * k {
        return Err(Error::InvalidArgument(format!("need n >= 2K, got n = {n}, K = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = DMatrix::zeros(k, k);
    for a in 0..k {
        p[(a, a)] = rng.random_range(0.6..=1.0);
        for b in 0..a {
            let v = rng.random_range(0.0..=0.15);
            p[(a, b)] = v;
            p[(b, a)] = v;
        }
    }
    // every community gets at least two nodes
    let mut labels: Vec<usize> = (0..n).map(|i| if i < 2 * k { i % k } else { rng.random_range(0..k) }).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let theta = (0..n).map(|_| rng.random_range(0.2..=1.0)).collect();
    DcsbmParams::new(p, theta, LabelVector::new(labels, k)?)
}
