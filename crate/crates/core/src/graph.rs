//! Undirected simple graphs, ground-truth label vectors, and plain-text loaders.
//!
//! Edge lists hold one edge per line as two whitespace separated node tokens.
//! Lines starting with the comment prefix (default `#`) and blank lines are
//! skipped. Direction is ignored, duplicates are merged and self-loops are
//! dropped, so every [`Graph`] is symmetric, hollow and binary by construction.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    neighbors: Vec<Vec<usize>>,
    node_ids: Vec<String>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes named `1..=n`.
    ///
    /// Self-loops are ignored and repeated edges collapse into one.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let ids = (1..=n).map(|i| i.to_string()).collect();
        Self::with_ids(ids, edges)
    }

    pub fn with_ids<I>(node_ids: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = node_ids.len();
        let mut sets: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u != v {
                sets[u].insert(v);
                sets[v].insert(u);
            }
        }
        let neighbors: Vec<Vec<usize>> = sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<usize> = s.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        let edge_count = neighbors.iter().map(Vec::len).sum::<usize>() / 2;
        Ok(Graph {
            neighbors,
            node_ids,
            edge_count,
        })
    }

    pub fn empty() -> Self {
        Graph {
            neighbors: Vec::new(),
            node_ids: Vec::new(),
            edge_count: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Iterates each undirected edge once as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Row sums of the adjacency matrix.
    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn mean_degree(&self) -> Option<f64> {
        (self.n() > 0).then(|| 2.0 * self.edge_count as f64 / self.n() as f64)
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && connected_components(self).len() == 1
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::zeros(n, n);
        for (i, nb) in self.neighbors.iter().enumerate() {
            for &j in nb {
                a[(i, j)] = 1.0;
            }
        }
        a
    }

    /// Induced subgraph on `nodes`, in the given order.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut position = vec![usize::MAX; self.n()];
        for (new, &old) in nodes.iter().enumerate() {
            position[old] = new;
        }
        let neighbors: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&old| {
                let mut nb: Vec<usize> = self.neighbors[old]
                    .iter()
                    .filter_map(|&j| (position[j] != usize::MAX).then_some(position[j]))
                    .collect();
                nb.sort_unstable();
                nb
            })
            .collect();
        let edge_count = neighbors.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            neighbors,
            node_ids: nodes.iter().map(|&i| self.node_ids[i].clone()).collect(),
            edge_count,
        }
    }
}

/// Community assignment, one entry per node, stored 0-based.
///
/// Files and reports present labels 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelVector {
    labels: Vec<usize>,
    k: usize,
}

impl LabelVector {
    /// Wraps 0-based labels, checking every entry is below `k`.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::Labels(format!(
                "node {i} has label {} outside 1..={k}",
                l + 1
            )));
        }
        Ok(LabelVector { labels, k })
    }

    /// Wraps 0-based labels and takes `k` as one past the largest label.
    pub fn from_zero_based(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        LabelVector { labels, k }
    }

    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::Labels("1-based labels must be positive".into()));
        }
        Ok(Self::from_zero_based(labels.iter().map(|l| l - 1).collect()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of communities the labels range over (not all need be present).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    /// Community sizes indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Number of labels actually used.
    pub fn distinct(&self) -> usize {
        self.sizes().iter().filter(|&&s| s > 0).count()
    }

    pub fn subset(&self, nodes: &[usize]) -> LabelVector {
        LabelVector {
            labels: nodes.iter().map(|&i| self.labels[i]).collect(),
            k: self.k,
        }
    }
}

/// How node tokens in an edge list map to internal indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeIndexing {
    /// Arbitrary string ids, indexed in order of first appearance.
    #[default]
    Named,
    /// Integer ids starting at 0; index = id.
    ZeroBased,
    /// Integer ids starting at 1; index = id - 1.
    OneBased,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub indexing: NodeIndexing,
    pub comment_prefix: String,
    /// Declared node count for integer ids; nodes without edges are kept.
    pub declared_nodes: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            indexing: NodeIndexing::Named,
            comment_prefix: "#".to_string(),
            declared_nodes: None,
        }
    }
}

/// Counts of input edges that did not make it into the graph unchanged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

pub fn load_edge_list(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<(Graph, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(BufReader::new(file), path, opts)
}

/// Parses an edge list from any reader; `origin` is used in error messages.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    origin: &Path,
    opts: &LoadOptions,
) -> Result<(Graph, LoadReport)> {
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut raw_edges: Vec<(usize, usize)> = Vec::new();
    let mut report = LoadReport::default();
    let mut max_index: Option<usize> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty()
            || (!opts.comment_prefix.is_empty() && trimmed.starts_with(&opts.comment_prefix))
        {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(parse_err(format!(
                "expected two node tokens, found `{trimmed}`"
            )));
        };
        report.lines += 1;
        let mut resolve = |tok: &str| -> Result<usize> {
            match opts.indexing {
                NodeIndexing::Named => Ok(*index.entry(tok.to_string()).or_insert_with(|| {
                    ids.push(tok.to_string());
                    ids.len() - 1
                })),
                NodeIndexing::ZeroBased | NodeIndexing::OneBased => {
                    let id: usize = tok
                        .parse()
                        .map_err(|_| parse_err(format!("`{tok}` is not a node number")))?;
                    let idx = if opts.indexing == NodeIndexing::OneBased {
                        id.checked_sub(1)
                            .ok_or_else(|| parse_err("node ids are 1-based".into()))?
                    } else {
                        id
                    };
                    max_index = Some(max_index.map_or(idx, |m: usize| m.max(idx)));
                    Ok(idx)
                }
            }
        };
        let u = resolve(a)?;
        let v = resolve(b)?;
        if u == v {
            report.self_loops += 1;
        } else {
            raw_edges.push((u.min(v), u.max(v)));
        }
    }

    let node_ids = match opts.indexing {
        NodeIndexing::Named => ids,
        NodeIndexing::ZeroBased | NodeIndexing::OneBased => {
            let n = max_index
                .map_or(0, |m| m + 1)
                .max(opts.declared_nodes.unwrap_or(0));
            let base = usize::from(opts.indexing == NodeIndexing::OneBased);
            (0..n).map(|i| (i + base).to_string()).collect()
        }
    };
    if node_ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let total = raw_edges.len();
    let graph = Graph::with_ids(node_ids, raw_edges)?;
    report.duplicate_edges = total - graph.edge_count();
    if report.self_loops > 0 {
        warn!(
            "{}: dropped {} self-loop(s)",
            origin.display(),
            report.self_loops
        );
    }
    Ok((graph, report))
}

/// Writes `graph` as an edge list using its node ids.
pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let ids = graph.node_ids();
    for (i, j) in graph.edges() {
        writeln!(out, "{} {}", ids[i], ids[j]).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn load_labels(path: impl AsRef<Path>, graph: &Graph) -> Result<LabelVector> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_labels(BufReader::new(file), path, graph)
}

/// Reads `node_id label` lines and maps label tokens to contiguous communities.
///
/// Communities are numbered in order of first appearance along the graph's
/// node order, so the result does not depend on line order in the file.
pub fn parse_labels<R: BufRead>(reader: R, origin: &Path, graph: &Graph) -> Result<LabelVector> {
    let index: HashMap<&str, usize> = graph
        .node_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut tokens: Vec<Option<String>> = vec![None; graph.n()];
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut parts = trimmed.split_whitespace();
        let (Some(node), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(format!("expected `node label`, found `{trimmed}`")));
        };
        let &i = index
            .get(node)
            .ok_or_else(|| Error::Labels(format!("label file names unknown node `{node}`")))?;
        match &tokens[i] {
            Some(prev) if prev != label => {
                return Err(parse_err(format!(
                    "node `{node}` labelled both `{prev}` and `{label}`"
                )))
            }
            _ => tokens[i] = Some(label.to_string()),
        }
    }
    let mut codes: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(graph.n());
    for (i, tok) in tokens.into_iter().enumerate() {
        let tok = tok.ok_or_else(|| {
            Error::Labels(format!("node `{}` has no label", graph.node_ids()[i]))
        })?;
        let next = codes.len();
        labels.push(*codes.entry(tok).or_insert(next));
    }
    Ok(LabelVector::from_zero_based(labels))
}

/// Connected components, each sorted ascending, ordered by smallest member.
pub fn connected_components(graph: &Graph) -> Vec<Vec<usize>> {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(u) = queue.pop_front() {
            members.push(u);
            for &v in graph.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Largest connected component with the labels and index map that go with it.
#[derive(Debug, Clone)]
pub struct Component {
    pub graph: Graph,
    pub labels: Option<LabelVector>,
    /// `nodes[new] = old` index in the source graph.
    pub nodes: Vec<usize>,
}

impl Component {
    pub fn dropped(&self, original_n: usize) -> usize {
        original_n - self.nodes.len()
    }
}

/// Restricts `graph` (and `labels`) to its largest connected component.
///
/// Equal-sized components are resolved in favour of the one containing the
/// lowest internal index, which is the lowest id for integer-indexed input
/// and the earliest-seen id for named input.
pub fn largest_connected_component(graph: &Graph, labels: Option<&LabelVector>) -> Component {
    // components come ordered by smallest member, so the first maximum wins ties
    let nodes = connected_components(graph)
        .into_iter()
        .fold(Vec::new(), |best: Vec<usize>, c| {
            if c.len() > best.len() {
                c
            } else {
                best
            }
        });
    Component {
        graph: graph.induced(&nodes),
        labels: labels.map(|l| l.subset(&nodes)),
        nodes,
    }
}
