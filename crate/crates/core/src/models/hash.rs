use sha2::{Digest, Sha256};

use crate::canon::{certificate_of, digest};
use crate::error::Result;
use crate::graph::{l_hop_neighborhood, AnnotatedGraph, LabelDistribution};
use crate::models::{Classifier, Locality};

/// Classifier whose output is a hash of the canonical form of its
/// computational graph. Non-isomorphic computational graphs map to different
/// distributions unless SHA-256 chunks collide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashClassifier {
    pub classes: usize,
    /// Hops of the computational graph for node tasks; `None` reads the whole
    /// graph.
    pub hops: Option<usize>,
}

impl Default for HashClassifier {
    fn default() -> Self {
        HashClassifier { classes: 3, hops: None }
    }
}

impl HashClassifier {
    pub fn local(hops: usize) -> Self {
        HashClassifier {
            hops: Some(hops),
            ..HashClassifier::default()
        }
    }

    /// Nodes and edge indices the prediction for `target` reads.
    pub fn computational_graph(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<(Vec<usize>, Vec<usize>)> {
        match (target, self.hops) {
            (Some(u), Some(l)) => {
                let hood = l_hop_neighborhood(g, u, l)?;
                let edges = (0..g.edge_count())
                    .filter(|&i| {
                        let (a, b) = g.edges()[i].endpoints();
                        hood.contains(&a) && hood.contains(&b)
                    })
                    .collect();
                Ok((hood.into_iter().collect(), edges))
            }
            _ => {
                if let Some(u) = target {
                    g.check_node(u)?;
                }
                Ok(((0..g.node_count()).collect(), (0..g.edge_count()).collect()))
            }
        }
    }
}

/// Maps a digest to a distribution with every entry in `(0, 1)`:
/// `p_i ∝ 1 + h_i / 2^64` for 64-bit chunks `h_i` of the (re)hashed digest.
pub fn distribution_from_digest(seed: &[u8; 32], classes: usize) -> LabelDistribution {
    let mut weights = Vec::with_capacity(classes);
    let mut block = *seed;
    let mut counter = 0u64;
    while weights.len() < classes {
        for chunk in block.chunks_exact(8) {
            if weights.len() == classes {
                break;
            }
            let h = u64::from_le_bytes(chunk.try_into().unwrap());
            weights.push(1.0 + h as f64 / 18_446_744_073_709_551_616.0);
        }
        counter += 1;
        let mut hasher = Sha256::new();
        hasher.update(seed);
        hasher.update(counter.to_le_bytes());
        block = hasher.finalize().into();
    }
    let total: f64 = weights.iter().sum();
    LabelDistribution::new(weights.into_iter().map(|w| w / total).collect())
        .expect("normalized positive weights")
}

impl Classifier for HashClassifier {
    fn class_count(&self) -> usize {
        self.classes
    }

    fn locality(&self) -> Locality {
        match self.hops {
            Some(l) => Locality::Local(l),
            None => Locality::Global,
        }
    }

    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution> {
        let (nodes, edges) = self.computational_graph(g, target)?;
        let cert = certificate_of(g, &nodes, &edges, target);
        Ok(distribution_from_digest(&digest(&cert), self.classes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{delete_edges, Edge};

    #[test]
    fn line_edits_inside_and_outside_the_neighbourhood() {
        let g = AnnotatedGraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let model = HashClassifier::local(1);
        let base = model.evaluate(&g, Some(0)).unwrap();
        let far = delete_edges(&g, &[Edge::new(1, 2)]).unwrap();
        let near = delete_edges(&g, &[Edge::new(0, 1)]).unwrap();
        assert_eq!(model.evaluate(&far, Some(0)).unwrap(), base);
        assert_ne!(model.evaluate(&near, Some(0)).unwrap(), base);
    }

    #[test]
    fn entries_are_strictly_inside_the_unit_interval() {
        for classes in [1, 2, 3, 7] {
            let p = distribution_from_digest(&[0xAB; 32], classes);
            assert_eq!(p.classes(), classes);
            assert!(p.probs().iter().all(|&x| x > 0.0 && (classes == 1 || x < 1.0)));
        }
    }
}
