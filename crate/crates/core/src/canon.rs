//! Canonical forms of small node-featured graphs by colour refinement plus
//! individualization. Two graphs get the same certificate iff they are
//! isomorphic (respecting features on a 1e-6 grid and an optional root).

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::graph::AnnotatedGraph;

/// Feature grid used by the certificate.
pub const FEATURE_QUANTUM: f64 = 1e-6;

pub fn quantize(x: f64) -> i64 {
    (x / FEATURE_QUANTUM).round() as i64
}

struct Instance {
    adj: Vec<Vec<usize>>,
    labels: Vec<Vec<i64>>,
}

/// Ranks `keys` densely in sorted order.
fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let index: BTreeMap<&K, usize> = sorted.iter().enumerate().map(|(i, k)| (k, i)).collect();
    keys.iter().map(|k| index[k]).collect()
}

fn cell_count(colors: &[usize]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m + 1)
}

impl Instance {
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        loop {
            let before = cell_count(&colors);
            let sigs: Vec<(usize, Vec<usize>)> = (0..colors.len())
                .map(|u| {
                    let mut nb: Vec<usize> = self.adj[u].iter().map(|&v| colors[v]).collect();
                    nb.sort_unstable();
                    (colors[u], nb)
                })
                .collect();
            colors = rank(&sigs);
            if cell_count(&colors) == before {
                return colors;
            }
        }
    }

    fn certificate(&self, colors: &[usize]) -> Vec<i64> {
        let n = colors.len();
        let mut order = vec![0; n];
        for (u, &c) in colors.iter().enumerate() {
            order[c] = u;
        }
        let mut cert = Vec::new();
        for &u in &order {
            cert.extend_from_slice(&self.labels[u]);
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for u in 0..n {
            for &v in &self.adj[u] {
                let (a, b) = (colors[u], colors[v]);
                if a < b {
                    edges.push((a, b));
                }
            }
        }
        edges.sort_unstable();
        for (a, b) in edges {
            cert.push(a as i64);
            cert.push(b as i64);
        }
        cert
    }

    fn search(&self, colors: Vec<usize>, best: &mut Option<Vec<i64>>) {
        let colors = self.refine(colors);
        let n = colors.len();
        if cell_count(&colors) == n {
            let cert = self.certificate(&colors);
            if best.as_ref().is_none_or(|b| cert < *b) {
                *best = Some(cert);
            }
            return;
        }
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c] += 1;
        }
        let target = (0..n).find(|&c| sizes[c] > 1).expect("partition is not discrete");
        let members: Vec<usize> = (0..n).filter(|&u| colors[u] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &members {
            // swapping twins is an automorphism fixing the partition, so one
            // representative per twin class suffices
            if tried.iter().any(|&w| self.twins(v, w)) {
                continue;
            }
            tried.push(v);
            let keys: Vec<(usize, bool)> = (0..n).map(|u| (colors[u], u != v)).collect();
            self.search(rank(&keys), best);
        }
    }

    fn twins(&self, u: usize, w: usize) -> bool {
        let mut a: Vec<usize> = self.adj[u].iter().copied().filter(|&x| x != w).collect();
        let mut b: Vec<usize> = self.adj[w].iter().copied().filter(|&x| x != u).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// Canonical certificate of the subgraph of `g` spanned by `nodes` and the
/// edges among them listed in `edges` (indices into `g.edges()`), with `root`
/// marked when given. Node order in `nodes` is irrelevant.
pub fn certificate_of(
    g: &AnnotatedGraph,
    nodes: &[usize],
    edges: &[usize],
    root: Option<usize>,
) -> Vec<i64> {
    let local: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut adj = vec![Vec::new(); nodes.len()];
    for &i in edges {
        let (a, b) = g.edges()[i].endpoints();
        let (la, lb) = (local[&a], local[&b]);
        adj[la].push(lb);
        adj[lb].push(la);
    }
    let labels: Vec<Vec<i64>> = nodes
        .iter()
        .map(|&u| {
            let mut l = vec![i64::from(root == Some(u))];
            l.extend(g.features()[u].iter().map(|&x| quantize(x)));
            l
        })
        .collect();
    let inst = Instance { adj, labels };
    let mut best = None;
    inst.search(rank(&inst.labels), &mut best);
    let mut cert = vec![nodes.len() as i64, g.feature_dim() as i64, edges.len() as i64];
    cert.extend(best.unwrap_or_default());
    cert
}

/// Certificate of the whole graph.
pub fn graph_certificate(g: &AnnotatedGraph, root: Option<usize>) -> Vec<i64> {
    let nodes: Vec<usize> = (0..g.node_count()).collect();
    let edges: Vec<usize> = (0..g.edge_count()).collect();
    certificate_of(g, &nodes, &edges, root)
}

/// SHA-256 digest of a certificate.
pub fn digest(cert: &[i64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for x in cert {
        hasher.update(x.to_le_bytes());
    }
    hasher.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::permute;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> AnnotatedGraph {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        AnnotatedGraph::from_pairs(n, &pairs).unwrap()
    }

    #[test]
    fn isomorphic_graphs_share_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in [cycle(6), cycle(9), AnnotatedGraph::from_pairs(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()] {
            for _ in 0..5 {
                let (p, _) = permute(&g, &mut rng);
                assert_eq!(graph_certificate(&g, None), graph_certificate(&p, None));
            }
        }
    }

    #[test]
    fn regular_graphs_are_separated() {
        // two triangles vs a hexagon: colour refinement alone cannot tell them apart
        let two_triangles =
            AnnotatedGraph::from_pairs(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert_ne!(graph_certificate(&two_triangles, None), graph_certificate(&cycle(6), None));
    }

    #[test]
    fn root_and_features_matter() {
        let path = AnnotatedGraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_ne!(graph_certificate(&path, Some(0)), graph_certificate(&path, Some(1)));
        assert_eq!(graph_certificate(&path, Some(0)), graph_certificate(&path, Some(2)));
        let shifted = path
            .with_features(vec![vec![1.0], vec![1.0], vec![1.0 + 1e-5]])
            .unwrap();
        assert_ne!(graph_certificate(&path, None), graph_certificate(&shifted, None));
    }
}
