//! Annotated graphs, edge masks, explanations and the structural operations
//! every perturbation is built from.
//!
//! Graphs are undirected and simple. Each edge is stored once in canonical
//! `(min, max)` orientation, and every [`EdgeMask`] is aligned with the host's
//! edge list by position, so "edge index" always means the position in
//! [`AnnotatedGraph::edges`].

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Undirected edge in canonical orientation (`a < b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    a: NodeId,
    b: NodeId,
}

impl Edge {
    /// Builds the canonical edge between `u` and `v`. Self-loops are rejected
    /// when the edge is added to a graph, not here.
    pub fn new(u: NodeId, v: NodeId) -> Self {
        if u <= v {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.a, self.b)
    }

    pub fn touches(&self, u: NodeId) -> bool {
        self.a == u || self.b == u
    }
}

impl From<(NodeId, NodeId)> for Edge {
    fn from((u, v): (NodeId, NodeId)) -> Self {
        Edge::new(u, v)
    }
}

/// Per-edge relevance scores in `[0, 1]`, positionally aligned with a host
/// graph's edge list.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMask {
    scores: Vec<f64>,
}

impl EdgeMask {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| !s.is_finite() || **s < 0.0 || **s > 1.0) {
            return Err(Error::InvalidParameter(format!("edge score {bad} outside [0, 1]")));
        }
        Ok(EdgeMask { scores })
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        EdgeMask {
            scores: bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn ones(len: usize) -> Self {
        EdgeMask { scores: vec![1.0; len] }
    }

    pub fn zeros(len: usize) -> Self {
        EdgeMask { scores: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, edge_index: usize) -> f64 {
        self.scores[edge_index]
    }

    pub fn is_binary(&self) -> bool {
        self.scores.iter().all(|&s| s == 0.0 || s == 1.0)
    }

    /// Binary view of the mask; fails on fractional scores.
    pub fn bits(&self) -> Result<Vec<bool>> {
        if !self.is_binary() {
            return Err(Error::InvalidMask);
        }
        Ok(self.scores.iter().map(|&s| s == 1.0).collect())
    }

    /// Indices of edges scored exactly 1.
    pub fn selected(&self) -> Vec<usize> {
        (0..self.scores.len()).filter(|&i| self.scores[i] == 1.0).collect()
    }

    pub fn count_selected(&self) -> usize {
        self.scores.iter().filter(|&&s| s == 1.0).count()
    }

    /// Keeps only the entries whose flag in `keep` is set.
    pub fn restrict(&self, keep: &[bool]) -> EdgeMask {
        EdgeMask {
            scores: self
                .scores
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(&s, _)| s)
                .collect(),
        }
    }

    pub fn check_domain(&self, g: &AnnotatedGraph) -> Result<()> {
        if self.len() != g.edge_count() {
            return Err(Error::ShapeError(format!(
                "mask has {} entries but the graph has {} edges",
                self.len(),
                g.edge_count()
            )));
        }
        Ok(())
    }
}

/// Undirected graph with per-node features and optional annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    features: Vec<Vec<f64>>,
    dim: usize,
    graph_label: Option<usize>,
    node_labels: Option<Vec<usize>>,
    ground_truth: Option<EdgeMask>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl AnnotatedGraph {
    /// Validates and builds a graph. `features` must have one row per node,
    /// all rows of the same length.
    pub fn new(node_count: usize, edges: Vec<Edge>, features: Vec<Vec<f64>>) -> Result<Self> {
        if features.len() != node_count {
            return Err(Error::InvalidGraph(format!(
                "{} feature rows for {} nodes",
                features.len(),
                node_count
            )));
        }
        let dim = features.first().map_or(0, Vec::len);
        if features.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidGraph("feature rows differ in dimension".into()));
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); node_count];
        for (i, e) in edges.iter().enumerate() {
            let (a, b) = e.endpoints();
            if b >= node_count {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) references a missing node")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            if !seen.insert(*e) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a].push((b, i));
            adjacency[b].push((a, i));
        }
        Ok(AnnotatedGraph {
            node_count,
            edges,
            features,
            dim,
            graph_label: None,
            node_labels: None,
            ground_truth: None,
            adjacency,
        })
    }

    /// Convenience constructor from index pairs with constant unit features.
    pub fn from_pairs(node_count: usize, pairs: &[(NodeId, NodeId)]) -> Result<Self> {
        let edges = pairs.iter().map(|&p| Edge::from(p)).collect();
        AnnotatedGraph::new(node_count, edges, vec![vec![1.0]; node_count])
    }

    pub fn with_graph_label(mut self, label: Option<usize>) -> Self {
        self.graph_label = label;
        self
    }

    pub fn with_node_labels(mut self, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.node_count {
                return Err(Error::InvalidGraph("node label count differs from node count".into()));
            }
        }
        self.node_labels = labels;
        Ok(self)
    }

    pub fn with_ground_truth(mut self, mask: Option<EdgeMask>) -> Result<Self> {
        if let Some(m) = &mask {
            m.check_domain(&self)?;
            if !m.is_binary() {
                return Err(Error::InvalidMask);
            }
        }
        self.ground_truth = mask;
        Ok(self)
    }

    /// Replaces the feature matrix, keeping topology and annotations.
    pub fn with_features(&self, features: Vec<Vec<f64>>) -> Result<Self> {
        let mut g = AnnotatedGraph::new(self.node_count, self.edges.clone(), features)?;
        g.graph_label = self.graph_label;
        g.node_labels = self.node_labels.clone();
        g.ground_truth = self.ground_truth.clone();
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.dim
    }

    pub fn graph_label(&self) -> Option<usize> {
        self.graph_label
    }

    pub fn node_labels(&self) -> Option<&[usize]> {
        self.node_labels.as_deref()
    }

    pub fn ground_truth(&self) -> Option<&EdgeMask> {
        self.ground_truth.as_ref()
    }

    /// `(neighbor, edge index)` pairs of `u`.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        let (a, b) = e.endpoints();
        if a >= self.node_count {
            return None;
        }
        self.adjacency[a].iter().find(|(v, _)| *v == b).map(|&(_, i)| i)
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edge_index(e).is_some()
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u >= self.node_count {
            return Err(Error::InvalidNode(u));
        }
        Ok(())
    }

    /// True when both graphs can be fed to the same model. Empty graphs are
    /// compatible with anything.
    pub fn feature_compatible(&self, other: &AnnotatedGraph) -> bool {
        self.node_count == 0 || other.node_count == 0 || self.dim == other.dim
    }

    /// True when every edge of `other` (same node ids) is present here.
    pub fn contains_edges_of(&self, edges: &[Edge]) -> bool {
        edges.iter().all(|&e| self.has_edge(e))
    }

    /// Removes the edges flagged in `drop` (positional). Nodes, features and
    /// labels are untouched; the ground-truth mask follows the survivors.
    pub fn without_edges(&self, drop: &[bool]) -> AnnotatedGraph {
        debug_assert_eq!(drop.len(), self.edges.len());
        let keep: Vec<bool> = drop.iter().map(|d| !d).collect();
        let edges = self
            .edges
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(&e, _)| e)
            .collect();
        let mut g = AnnotatedGraph::new(self.node_count, edges, self.features.clone())
            .expect("a subgraph of a valid graph is valid");
        g.graph_label = self.graph_label;
        g.node_labels = self.node_labels.clone();
        g.ground_truth = self.ground_truth.as_ref().map(|m| m.restrict(&keep));
        g
    }
}

/// Bitwise negation of a binary mask.
pub fn complement(mask: &EdgeMask) -> Result<EdgeMask> {
    let bits = mask.bits()?;
    Ok(EdgeMask::from_bits(&bits.iter().map(|b| !b).collect::<Vec<_>>()))
}

/// Number of edges a top-k cut keeps: `ceil(ratio * m)`, at least one.
///
/// The product is nudged down by 1e-9 before the ceiling so that e.g.
/// `0.3 * 10` (which is `3.0000000000000004` in binary) keeps 3 edges.
pub fn topk_count(ratio: f64, m: usize) -> usize {
    let k = (ratio * m as f64 - 1e-9).ceil();
    (k.max(1.0) as usize).min(m)
}

/// Selects the `ceil(ratio * |E|)` highest-scored edges. Ties go to the lower
/// edge index, so the cut never depends on anything but the input order.
pub fn topk_binarize(mask: &EdgeMask, ratio: f64) -> Result<EdgeMask> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!("topk ratio {ratio} not in (0, 1]")));
    }
    let m = mask.len();
    if m == 0 {
        return Err(Error::EmptyGraph);
    }
    let k = topk_count(ratio, m);
    let mut order: Vec<usize> = (0..m).collect();
    // stable sort: equal scores keep ascending index order
    order.sort_by(|&i, &j| mask.scores[j].partial_cmp(&mask.scores[i]).expect("scores are finite"));
    let mut bits = vec![false; m];
    for &i in &order[..k] {
        bits[i] = true;
    }
    Ok(EdgeMask::from_bits(&bits))
}

pub fn threshold_binarize(mask: &EdgeMask, tau: f64) -> Result<EdgeMask> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("threshold {tau} not in [0, 1]")));
    }
    Ok(EdgeMask::from_bits(
        &mask.scores.iter().map(|&s| s >= tau).collect::<Vec<_>>(),
    ))
}

/// Returns `g` without the edges in `drop`.
pub fn delete_edges(g: &AnnotatedGraph, drop: &[Edge]) -> Result<AnnotatedGraph> {
    let mut flags = vec![false; g.edge_count()];
    for &e in drop {
        match g.edge_index(e) {
            Some(i) => flags[i] = true,
            None => {
                let (a, b) = e.endpoints();
                return Err(Error::InvalidEdge(a, b));
            }
        }
    }
    Ok(g.without_edges(&flags))
}

/// A selected edge set `R` of a host graph, plus any nodes that must be kept
/// even when no selected edge touches them (e.g. the target of a node-level
/// prediction).
#[derive(Clone, Debug)]
pub struct Explanation<'g> {
    host: &'g AnnotatedGraph,
    selected: Vec<bool>,
    retained: BTreeSet<NodeId>,
}

impl<'g> Explanation<'g> {
    pub fn new(host: &'g AnnotatedGraph, mask: &EdgeMask, retained: &[NodeId]) -> Result<Self> {
        mask.check_domain(host)?;
        let selected = mask.bits()?;
        for &u in retained {
            host.check_node(u)?;
        }
        Ok(Explanation {
            host,
            selected,
            retained: retained.iter().copied().collect(),
        })
    }

    pub fn host(&self) -> &'g AnnotatedGraph {
        self.host
    }

    pub fn selected_flags(&self) -> &[bool] {
        &self.selected
    }

    pub fn selected_edges(&self) -> Vec<Edge> {
        self.host
            .edges()
            .iter()
            .zip(&self.selected)
            .filter(|(_, &s)| s)
            .map(|(&e, _)| e)
            .collect()
    }

    /// The complement `C = E \ R`, keeping the same retained nodes.
    pub fn complement(&self) -> Explanation<'g> {
        Explanation {
            host: self.host,
            selected: self.selected.iter().map(|s| !s).collect(),
            retained: self.retained.clone(),
        }
    }

    /// Nodes incident to a selected edge plus the retained nodes, ascending.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut nodes = self.retained.clone();
        for e in self.selected_edges() {
            let (a, b) = e.endpoints();
            nodes.insert(a);
            nodes.insert(b);
        }
        nodes.into_iter().collect()
    }

    pub fn features_view(&self) -> Vec<&'g [f64]> {
        self.nodes().into_iter().map(|u| self.host.features[u].as_slice()).collect()
    }

    /// Materializes the explanation as a standalone graph. Node `i` of the
    /// result is `self.nodes()[i]` of the host.
    pub fn to_graph(&self) -> AnnotatedGraph {
        let nodes = self.nodes();
        let index: HashMap<NodeId, NodeId> = nodes.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let edges: Vec<Edge> = self
            .selected_edges()
            .into_iter()
            .map(|e| {
                let (a, b) = e.endpoints();
                Edge::new(index[&a], index[&b])
            })
            .collect();
        let features = nodes.iter().map(|&u| self.host.features[u].clone()).collect();
        let mut g = AnnotatedGraph::new(nodes.len(), edges, features).expect("subgraph is valid");
        g.graph_label = self.host.graph_label;
        g.node_labels = self
            .host
            .node_labels
            .as_ref()
            .map(|l| nodes.iter().map(|&u| l[u]).collect());
        g.ground_truth = self.host.ground_truth.as_ref().map(|m| m.restrict(&self.selected));
        g
    }
}

/// Places `r` and `c` side by side (nodes of `r` first) and adds `k_join`
/// distinct cross edges drawn uniformly from all `|V_r| * |V_c|` pairs.
///
/// Edge order of the result: edges of `r`, edges of `c`, cross edges.
pub fn join_graphs<R: Rng + ?Sized>(
    r: &AnnotatedGraph,
    c: &AnnotatedGraph,
    k_join: usize,
    rng: &mut R,
) -> Result<AnnotatedGraph> {
    if !r.feature_compatible(c) {
        return Err(Error::ShapeError(format!(
            "feature dimensions {} and {} differ",
            r.feature_dim(),
            c.feature_dim()
        )));
    }
    let (nr, nc) = (r.node_count(), c.node_count());
    let pairs = nr * nc;
    if k_join > pairs {
        return Err(Error::InfeasibleJoin {
            requested: k_join,
            left: nr,
            right: nc,
        });
    }
    let mut edges: Vec<Edge> = r.edges().to_vec();
    edges.extend(c.edges().iter().map(|e| {
        let (a, b) = e.endpoints();
        Edge::new(a + nr, b + nr)
    }));
    let mut cross = rand::seq::index::sample(rng, pairs, k_join).into_vec();
    cross.sort_unstable();
    edges.extend(cross.into_iter().map(|p| Edge::new(p / nc, nr + p % nc)));

    let mut features = r.features().to_vec();
    features.extend(c.features().iter().cloned());
    let mut g = AnnotatedGraph::new(nr + nc, edges, features)?;
    g.graph_label = r.graph_label;
    g.node_labels = match (&r.node_labels, &c.node_labels) {
        (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
        _ => None,
    };
    g.ground_truth = r.ground_truth.as_ref().map(|m| {
        let mut s = m.scores.clone();
        s.resize(g.edge_count(), 0.0);
        EdgeMask { scores: s }
    });
    Ok(g)
}

/// Joins two explanations into a fresh graph; see [`join_graphs`].
pub fn join<R: Rng + ?Sized>(
    r: &Explanation<'_>,
    c: &Explanation<'_>,
    k_join: usize,
    rng: &mut R,
) -> Result<AnnotatedGraph> {
    join_graphs(&r.to_graph(), &c.to_graph(), k_join, rng)
}

/// Nodes within `hops` shortest-path steps of `u`, including `u`.
pub fn l_hop_neighborhood(g: &AnnotatedGraph, u: NodeId, hops: usize) -> Result<BTreeSet<NodeId>> {
    g.check_node(u)?;
    Ok(bfs_distances(g, u, hops)
        .into_iter()
        .enumerate()
        .filter(|(_, d)| d.is_some())
        .map(|(v, _)| v)
        .collect())
}

/// Breadth-first distances from `u`, truncated at `limit`.
pub(crate) fn bfs_distances(g: &AnnotatedGraph, u: NodeId, limit: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[u] = Some(0);
    let mut queue = VecDeque::from([u]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        if d == limit {
            continue;
        }
        for &(w, _) in g.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// A node and edge relabeling: node `u` becomes `node_map[u]`, edge `i` moves
/// to position `edge_map[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeling {
    pub node_map: Vec<NodeId>,
    pub edge_map: Vec<usize>,
}

impl Relabeling {
    pub fn random<R: Rng + ?Sized>(nodes: usize, edges: usize, rng: &mut R) -> Self {
        let mut node_map: Vec<usize> = (0..nodes).collect();
        node_map.shuffle(rng);
        let mut edge_map: Vec<usize> = (0..edges).collect();
        edge_map.shuffle(rng);
        Relabeling { node_map, edge_map }
    }

    pub fn inverse(&self) -> Relabeling {
        let mut node_map = vec![0; self.node_map.len()];
        for (old, &new) in self.node_map.iter().enumerate() {
            node_map[new] = old;
        }
        let mut edge_map = vec![0; self.edge_map.len()];
        for (old, &new) in self.edge_map.iter().enumerate() {
            edge_map[new] = old;
        }
        Relabeling { node_map, edge_map }
    }

    pub fn apply_to_mask(&self, mask: &EdgeMask) -> EdgeMask {
        let mut scores = vec![0.0; mask.len()];
        for (old, &new) in self.edge_map.iter().enumerate() {
            scores[new] = mask.scores[old];
        }
        EdgeMask { scores }
    }

    pub fn apply(&self, g: &AnnotatedGraph) -> Result<AnnotatedGraph> {
        if self.node_map.len() != g.node_count() || self.edge_map.len() != g.edge_count() {
            return Err(Error::ShapeError("relabeling does not match the graph".into()));
        }
        let mut edges = vec![Edge::new(0, 0); g.edge_count()];
        for (old, e) in g.edges().iter().enumerate() {
            let (a, b) = e.endpoints();
            edges[self.edge_map[old]] = Edge::new(self.node_map[a], self.node_map[b]);
        }
        let mut features = vec![Vec::new(); g.node_count()];
        for (old, row) in g.features().iter().enumerate() {
            features[self.node_map[old]] = row.clone();
        }
        let mut out = AnnotatedGraph::new(g.node_count(), edges, features)?;
        out.graph_label = g.graph_label;
        out.node_labels = g.node_labels.as_ref().map(|l| {
            let mut nl = vec![0; l.len()];
            for (old, &lab) in l.iter().enumerate() {
                nl[self.node_map[old]] = lab;
            }
            nl
        });
        out.ground_truth = g.ground_truth.as_ref().map(|m| self.apply_to_mask(m));
        Ok(out)
    }
}

/// Uniformly random relabeling of nodes and edge order.
pub fn permute<R: Rng + ?Sized>(g: &AnnotatedGraph, rng: &mut R) -> (AnnotatedGraph, Relabeling) {
    let relabel = Relabeling::random(g.node_count(), g.edge_count(), rng);
    let out = relabel.apply(g).expect("relabeling built for this graph");
    (out, relabel)
}

/// Probability vector over classes.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelDistribution(Vec<f64>);

impl LabelDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::ShapeError("empty label distribution".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter("negative or non-finite probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(LabelDistribution(probs))
    }

    pub fn uniform(classes: usize) -> Self {
        LabelDistribution(vec![1.0 / classes as f64; classes])
    }

    pub fn one_hot(classes: usize, class: usize) -> Self {
        let mut p = vec![0.0; classes];
        p[class] = 1.0;
        LabelDistribution(p)
    }

    /// Numerically stable softmax.
    pub fn softmax(logits: &[f64]) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        LabelDistribution(exps.into_iter().map(|e| e / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn prob(&self, class: usize) -> f64 {
        self.0[class]
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    /// Most likely class; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> AnnotatedGraph {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        AnnotatedGraph::from_pairs(n, &pairs).unwrap()
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(AnnotatedGraph::from_pairs(2, &[(0, 0)]).is_err());
        assert!(AnnotatedGraph::from_pairs(2, &[(0, 1), (1, 0)]).is_err());
        assert!(AnnotatedGraph::from_pairs(2, &[(0, 2)]).is_err());
        assert!(AnnotatedGraph::new(2, vec![], vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        let g = path(3);
        assert!(g.clone().with_ground_truth(Some(EdgeMask::ones(3))).is_err());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(&EdgeMask::ones(3)).unwrap(), EdgeMask::zeros(3));
        assert_eq!(complement(&EdgeMask::zeros(2)).unwrap(), EdgeMask::ones(2));
        let m = EdgeMask::from_bits(&[true, false, true]);
        assert_eq!(complement(&m).unwrap(), EdgeMask::from_bits(&[false, true, false]));
        assert_eq!(complement(&complement(&m).unwrap()).unwrap(), m);
        let soft = EdgeMask::new(vec![0.5, 1.0]).unwrap();
        assert_eq!(complement(&soft), Err(Error::InvalidMask));
    }

    #[test]
    fn topk_examples() {
        let m = EdgeMask::new(vec![0.9, 0.1, 0.5]).unwrap();
        assert_eq!(topk_binarize(&m, 1.0 / 3.0).unwrap().selected(), vec![0]);
        let tie = EdgeMask::new(vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(topk_binarize(&tie, 1.0 / 3.0).unwrap().selected(), vec![0]);
        assert_eq!(topk_binarize(&m, 1.0).unwrap(), EdgeMask::ones(3));
        assert_eq!(topk_binarize(&EdgeMask::zeros(0), 0.5), Err(Error::EmptyGraph));
        assert!(topk_binarize(&m, 0.0).is_err());
        assert!(topk_binarize(&m, 1.5).is_err());
    }

    #[test]
    fn topk_count_is_robust_to_float_products() {
        assert_eq!(topk_count(0.3, 10), 3);
        assert_eq!(topk_count(0.6, 10), 6);
        assert_eq!(topk_count(0.9, 10), 9);
        assert_eq!(topk_count(0.3, 11), 4);
        assert_eq!(topk_count(0.01, 5), 1);
    }

    #[test]
    fn threshold_examples() {
        let m = EdgeMask::new(vec![0.8, 0.2]).unwrap();
        assert_eq!(threshold_binarize(&m, 0.5).unwrap().selected(), vec![0]);
        assert_eq!(threshold_binarize(&m, 0.0).unwrap(), EdgeMask::ones(2));
        assert!(threshold_binarize(&m, 1.0 + 1e-9).is_err());
    }

    #[test]
    fn delete_edges_examples() {
        let g = path(3);
        assert_eq!(delete_edges(&g, &[]).unwrap(), g);
        let all = delete_edges(&g, g.edges()).unwrap();
        assert_eq!(all.edge_count(), 0);
        assert_eq!(all.node_count(), 3);
        let one = delete_edges(&g, &[Edge::new(1, 2)]).unwrap();
        assert_eq!(one.edges(), &[Edge::new(0, 1)]);
        assert_eq!(one.features(), g.features());
        assert_eq!(delete_edges(&g, &[Edge::new(0, 2)]), Err(Error::InvalidEdge(0, 2)));
    }

    #[test]
    fn delete_edges_restricts_ground_truth() {
        let g = path(4)
            .with_ground_truth(Some(EdgeMask::from_bits(&[true, false, true])))
            .unwrap();
        let h = delete_edges(&g, &[Edge::new(1, 2)]).unwrap();
        assert_eq!(h.ground_truth().unwrap(), &EdgeMask::ones(2));
    }

    #[test]
    fn join_examples() {
        let g = path(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Explanation::new(&g, &EdgeMask::ones(3), &[]).unwrap();
        let c = r.complement();
        assert_eq!(join(&r, &c, 0, &mut rng).unwrap(), g);

        let left = path(3);
        let right = path(4);
        let a = join_graphs(&left, &right, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = join_graphs(&left, &right, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.edge_count(), 2 + 3 + 5);
        assert_eq!(a.edges(), b.edges());
        assert!(a.contains_edges_of(left.edges()));
        assert!(matches!(
            join_graphs(&left, &right, 13, &mut rng),
            Err(Error::InfeasibleJoin { .. })
        ));
    }

    #[test]
    fn explanation_keeps_retained_nodes() {
        let g = path(4);
        let mask = EdgeMask::from_bits(&[false, false, true]);
        let r = Explanation::new(&g, &mask, &[0]).unwrap();
        assert_eq!(r.nodes(), vec![0, 2, 3]);
        let sub = r.to_graph();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edges(), &[Edge::new(1, 2)]);
        assert_eq!(r.features_view().len(), 3);
    }

    #[test]
    fn neighborhood_examples() {
        let g = path(4);
        assert_eq!(l_hop_neighborhood(&g, 0, 0).unwrap(), BTreeSet::from([0]));
        assert_eq!(l_hop_neighborhood(&g, 0, 1).unwrap(), BTreeSet::from([0, 1]));
        assert_eq!(l_hop_neighborhood(&g, 0, 10).unwrap().len(), 4);
        assert_eq!(l_hop_neighborhood(&g, 7, 1), Err(Error::InvalidNode(7)));
    }

    #[test]
    fn permute_examples() {
        let single = AnnotatedGraph::from_pairs(1, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(permute(&single, &mut rng).0, single);

        let g = AnnotatedGraph::new(
            5,
            vec![(0, 1), (1, 2), (2, 3), (1, 4)].into_iter().map(Edge::from).collect(),
            (0..5).map(|i| vec![i as f64, 0.5]).collect(),
        )
        .unwrap()
        .with_ground_truth(Some(EdgeMask::from_bits(&[true, true, false, false])))
        .unwrap();
        let (p, relabel) = permute(&g, &mut rng);
        assert_eq!(relabel.inverse().apply(&p).unwrap(), g);
        let mut d1: Vec<_> = (0..5).map(|u| g.degree(u)).collect();
        let mut d2: Vec<_> = (0..5).map(|u| p.degree(u)).collect();
        d1.sort();
        d2.sort();
        assert_eq!(d1, d2);
        assert_eq!(p.edge_count(), g.edge_count());
    }

    #[test]
    fn label_distribution_basics() {
        assert!(LabelDistribution::new(vec![0.5, 0.6]).is_err());
        let u = LabelDistribution::softmax(&[0.0, 0.0, 0.0]);
        assert_eq!(u.probs(), LabelDistribution::uniform(3).probs());
        assert_eq!(u.argmax(), 0);
        assert_eq!(LabelDistribution::one_hot(3, 2).argmax(), 2);
    }
}
