//! k-means on embedding rows and permutation-invariant error scoring.

use std::time::Duration;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabelVector;

/// Largest K aligned by enumerating all K! permutations.
pub const EXHAUSTIVE_ALIGN_MAX_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when no center moves more than `tol` times the largest center norm.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 50,
            max_iters: 100,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "k-means needs restarts >= 1, max_iters >= 1 and tol > 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: LabelVector,
    /// One center per row.
    pub centers: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    /// Index of the restart that produced this fit.
    pub restart: usize,
}

/// Row-major copy of the points, so distance loops walk contiguous memory.
struct Points {
    data: Vec<f64>,
    n: usize,
    dim: usize,
}

impl Points {
    fn new(m: &DMatrix<f64>) -> Self {
        let (n, dim) = m.shape();
        let mut data = Vec::with_capacity(n * dim);
        for i in 0..n {
            data.extend(m.row(i).iter());
        }
        Points { data, n, dim }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ (restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Lloyd's algorithm from k-means++ seeds, best of `cfg.restarts` runs.
///
/// Restarts run in parallel with seeds derived from `cfg.seed`; the lowest
/// WCSS wins, ties going to the lowest restart index, so the result is the
/// same for any thread count.
pub fn kmeans(points: &DMatrix<f64>, k: usize, cfg: &KMeansConfig) -> Result<KMeansFit> {
    cfg.validate()?;
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    let pts = Points::new(points);
    let runs: Vec<(Vec<usize>, f64)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, r));
            lloyd(&pts, k, cfg, &mut rng)
        })
        .collect();
    let (restart, (labels, wcss)) = runs
        .into_iter()
        .enumerate()
        .reduce(|best, cand| if cand.1 .1 < best.1 .1 { cand } else { best })
        .expect("restarts >= 1");
    let centers = centers_of(&pts, &labels, k);
    let mut center_matrix = DMatrix::zeros(k, pts.dim);
    for c in 0..k {
        for d in 0..pts.dim {
            center_matrix[(c, d)] = centers[c * pts.dim + d];
        }
    }
    Ok(KMeansFit {
        labels: LabelVector::new(labels, k)?,
        centers: center_matrix,
        wcss,
        restart,
    })
}

fn plus_plus(pts: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k * pts.dim);
    let first = rng.random_range(0..pts.n);
    centers.extend_from_slice(pts.row(first));
    let mut d2: Vec<f64> = (0..pts.n).map(|i| sq_dist(pts.row(i), pts.row(first))).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = pts.n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..pts.n)
        };
        centers.extend_from_slice(pts.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(pts.row(i), pts.row(pick)));
        }
    }
    centers
}

fn centers_of(pts: &Points, labels: &[usize], k: usize) -> Vec<f64> {
    let mut sums = vec![0.0; k * pts.dim];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l * pts.dim..(l + 1) * pts.dim].iter_mut().zip(pts.row(i)) {
            *s += x;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            sums[c * pts.dim..(c + 1) * pts.dim]
                .iter_mut()
                .for_each(|s| *s /= count as f64);
        }
    }
    sums
}

/// Within-cluster sum of squares of a labelling, each cluster around its mean.
pub fn wcss(points: &DMatrix<f64>, labels: &[usize], k: usize) -> f64 {
    let pts = Points::new(points);
    partition_cost(&pts, labels, k)
}

fn partition_cost(pts: &Points, labels: &[usize], k: usize) -> f64 {
    let centers = centers_of(pts, labels, k);
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(pts.row(i), &centers[l * pts.dim..(l + 1) * pts.dim]))
        .sum()
}

fn lloyd(pts: &Points, k: usize, cfg: &KMeansConfig, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let dim = pts.dim;
    let mut centers = plus_plus(pts, k, rng);
    let mut labels = vec![usize::MAX; pts.n];
    let mut dist = vec![0.0; pts.n];
    for _ in 0..cfg.max_iters {
        let mut changed = false;
        for i in 0..pts.n {
            let x = pts.row(i);
            let (mut best, mut best_d) = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(x, &centers[c * dim..(c + 1) * dim]);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            changed |= labels[i] != best;
            labels[i] = best;
            dist[i] = best_d;
        }

        // an empty cluster takes the point farthest from its own center
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..pts.n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                dist[i] = 0.0;
                changed = true;
            }
        }

        let updated = centers_of(pts, &labels, k);
        let mut shift: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for c in 0..k {
            let (old, new) = (&centers[c * dim..(c + 1) * dim], &updated[c * dim..(c + 1) * dim]);
            shift = shift.max(sq_dist(old, new).sqrt());
            scale = scale.max(new.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        centers = updated;
        if !changed || shift <= cfg.tol * scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let cost = partition_cost(pts, &labels, k);
    (labels, cost)
}

/// Best relabelling of an estimate onto the truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub mismatches: usize,
    /// `permutation[estimated] = true` label.
    pub permutation: Vec<usize>,
}

/// Outcome of clustering a network against known labels.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub labels: LabelVector,
    pub mismatches: usize,
    pub error_rate: f64,
    pub permutation: Vec<usize>,
    pub elapsed: Duration,
}

impl ClusterResult {
    pub fn score(labels: LabelVector, truth: &LabelVector, elapsed: Duration) -> Result<Self> {
        let k = labels.k().max(truth.k());
        let alignment = align_and_score(&labels, truth, k)?;
        let n = truth.len().max(1);
        Ok(ClusterResult {
            labels,
            mismatches: alignment.mismatches,
            error_rate: alignment.mismatches as f64 / n as f64,
            permutation: alignment.permutation,
            elapsed,
        })
    }
}

fn confusion(est: &LabelVector, truth: &LabelVector, k: usize) -> Result<Vec<Vec<usize>>> {
    if est.len() != truth.len() {
        return Err(Error::Labels(format!(
            "estimated labels cover {} nodes, truth covers {}",
            est.len(),
            truth.len()
        )));
    }
    let mut table = vec![vec![0usize; k]; k];
    for (&e, &t) in est.as_slice().iter().zip(truth.as_slice()) {
        if e >= k || t >= k {
            return Err(Error::Labels(format!(
                "label {} outside 1..={k}",
                e.max(t) + 1
            )));
        }
        table[e][t] += 1;
    }
    Ok(table)
}

/// Minimum mismatches over label permutations: enumeration for small K,
/// optimal assignment otherwise.
pub fn align_and_score(est: &LabelVector, truth: &LabelVector, k: usize) -> Result<Alignment> {
    if k <= EXHAUSTIVE_ALIGN_MAX_K {
        align_exhaustive(est, truth, k)
    } else {
        align_assignment(est, truth, k)
    }
}

/// Tries all K! permutations; the lexicographically first optimum is returned.
pub fn align_exhaustive(est: &LabelVector, truth: &LabelVector, k: usize) -> Result<Alignment> {
    let table = confusion(est, truth, k)?;
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best_perm = perm.clone();
    let mut best = 0usize;
    let mut first = true;
    loop {
        let matched: usize = perm.iter().enumerate().map(|(e, &t)| table[e][t]).sum();
        if first || matched > best {
            best = matched;
            best_perm.clone_from(&perm);
            first = false;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(Alignment {
        mismatches: est.len() - best,
        permutation: best_perm,
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Hungarian method on the confusion table, maximising matched nodes.
pub fn align_assignment(est: &LabelVector, truth: &LabelVector, k: usize) -> Result<Alignment> {
    let table = confusion(est, truth, k)?;
    let assignment = hungarian_max(&table);
    let matched: usize = assignment.iter().enumerate().map(|(e, &t)| table[e][t]).sum();
    Ok(Alignment {
        mismatches: est.len() - matched,
        permutation: assignment,
    })
}

/// Maximum-weight perfect matching on a square table; returns the column for each row.
fn hungarian_max(weights: &[Vec<usize>]) -> Vec<usize> {
    let k = weights.len();
    if k == 0 {
        return Vec::new();
    }
    let top = weights.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| top - weights[i][j] as i64;
    // potentials over 1-based rows/columns, column 0 is the virtual start
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for row in 1..=k {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = i64::MAX;
            let mut col1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; k];
    for j in 1..=k {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[usize], k: usize) -> LabelVector {
        LabelVector::new(v.to_vec(), k).unwrap()
    }

    #[test]
    fn repeated_points_are_grouped_exactly() {
        let base = [[0.0, 0.0], [5.0, 1.0], [-3.0, 4.0]];
        let pts = DMatrix::from_fn(12, 2, |i, j| base[i % 3][j]);
        let fit = kmeans(&pts, 3, &KMeansConfig::default()).unwrap();
        assert_eq!(fit.wcss, 0.0);
        for i in 0..12 {
            assert_eq!(fit.labels.get(i), fit.labels.get(i % 3));
        }
        assert_eq!(fit.labels.distinct(), 3);
    }

    #[test]
    fn single_cluster() {
        let pts = DMatrix::from_fn(5, 2, |i, j| (i * 3 + j) as f64);
        let fit = kmeans(&pts, 1, &KMeansConfig::default()).unwrap();
        assert!(fit.labels.as_slice().iter().all(|&l| l == 0));
    }

    #[test]
    fn too_many_clusters() {
        let pts = DMatrix::zeros(3, 2);
        assert!(kmeans(&pts, 4, &KMeansConfig::default()).is_err());
        let bad = KMeansConfig { restarts: 0, ..KMeansConfig::default() };
        assert!(kmeans(&pts, 2, &bad).is_err());
    }

    #[test]
    fn fewer_distinct_points_than_clusters_still_yields_k_clusters() {
        let pts = DMatrix::from_fn(6, 1, |i, _| if i < 3 { 0.0 } else { 1.0 });
        let fit = kmeans(&pts, 3, &KMeansConfig::default()).unwrap();
        assert_eq!(fit.labels.distinct(), 3);
        assert_eq!(fit.wcss, 0.0);
    }

    #[test]
    fn identical_and_renamed_labels() {
        let truth = lv(&[0, 0, 1, 1, 1], 2);
        assert_eq!(align_and_score(&truth, &truth, 2).unwrap().mismatches, 0);
        let swapped = lv(&[1, 1, 0, 0, 0], 2);
        let a = align_and_score(&swapped, &truth, 2).unwrap();
        assert_eq!(a.mismatches, 0);
        assert_eq!(a.permutation, vec![1, 0]);
    }

    #[test]
    fn alignment_errors() {
        assert!(align_and_score(&lv(&[0, 1], 2), &lv(&[0, 1, 1], 2), 2).is_err());
        assert!(align_and_score(&lv(&[0, 2], 3), &lv(&[0, 1], 2), 2).is_err());
    }

    #[test]
    fn hungarian_on_large_k() {
        let k = 10;
        let truth: Vec<usize> = (0..50).map(|i| i % k).collect();
        let est: Vec<usize> = truth.iter().map(|&t| (t * 3 + 1) % k).collect();
        let a = align_assignment(&lv(&est, k), &lv(&truth, k), k).unwrap();
        assert_eq!(a.mismatches, 0);
        assert_eq!(align_and_score(&lv(&est, k), &lv(&truth, k), k).unwrap().mismatches, 0);
    }

    #[test]
    fn score_reports_rate() {
        let truth = lv(&[0, 0, 1, 1], 2);
        let r = ClusterResult::score(lv(&[1, 0, 0, 0], 2), &truth, Duration::ZERO).unwrap();
        assert_eq!(r.mismatches, 1);
        assert_eq!(r.error_rate, 0.25);
    }
}
