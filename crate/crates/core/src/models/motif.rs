use crate::error::Result;
use crate::graph::{AnnotatedGraph, Edge, LabelDistribution};
use crate::models::{Classifier, Locality};
use crate::motifs::MotifKind;

/// True when `g` contains `kind` as an induced subgraph.
pub fn contains_motif(g: &AnnotatedGraph, kind: MotifKind) -> bool {
    let k = kind.node_count();
    let mut adj = vec![vec![false; k]; k];
    for (a, b) in kind.edges() {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let degree: Vec<usize> = adj.iter().map(|row| row.iter().filter(|&&x| x).count()).collect();
    // visit template nodes so that each one after the first touches an earlier one
    let mut order = vec![0];
    while order.len() < k {
        let next = (0..k)
            .filter(|u| !order.contains(u))
            .max_by_key(|&u| (order.iter().filter(|&&v| adj[u][v]).count(), degree[u], std::cmp::Reverse(u)))
            .unwrap();
        order.push(next);
    }
    let mut mapping = vec![usize::MAX; k];
    let mut used = vec![false; g.node_count()];
    extend(g, &adj, &degree, &order, 0, &mut mapping, &mut used)
}

fn extend(
    g: &AnnotatedGraph,
    adj: &[Vec<bool>],
    degree: &[usize],
    order: &[usize],
    depth: usize,
    mapping: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let t = order[depth];
    let anchor = order[..depth].iter().copied().find(|&p| adj[t][p]);
    let candidates: Vec<usize> = match anchor {
        Some(p) => g.neighbors(mapping[p]).iter().map(|&(v, _)| v).collect(),
        None => (0..g.node_count()).collect(),
    };
    for v in candidates {
        if used[v] || g.degree(v) < degree[t] {
            continue;
        }
        let consistent = order[..depth]
            .iter()
            .all(|&p| adj[t][p] == g.has_edge(Edge::new(v, mapping[p])));
        if !consistent {
            continue;
        }
        mapping[t] = v;
        used[v] = true;
        if extend(g, adj, degree, order, depth + 1, mapping, used) {
            return true;
        }
        used[v] = false;
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotifRule {
    /// house / cycle5 / crane → class 0 / 1 / 2; uniform when none or
    /// several are present.
    SingleMotif,
    /// Class 1 iff exactly two distinct motifs among house, grid and
    /// wheel-motif are present, else class 0.
    Bams,
}

/// Exact motif detector used as a ground-truth classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MotifClassifier {
    pub rule: MotifRule,
}

impl MotifClassifier {
    pub fn single() -> Self {
        MotifClassifier {
            rule: MotifRule::SingleMotif,
        }
    }

    pub fn bams() -> Self {
        MotifClassifier { rule: MotifRule::Bams }
    }

    pub fn motifs(&self) -> &'static [MotifKind] {
        match self.rule {
            MotifRule::SingleMotif => &[MotifKind::House, MotifKind::Cycle5, MotifKind::Crane],
            MotifRule::Bams => &[MotifKind::House, MotifKind::Grid, MotifKind::Wheel],
        }
    }

    pub fn present(&self, g: &AnnotatedGraph) -> Vec<MotifKind> {
        self.motifs().iter().copied().filter(|&m| contains_motif(g, m)).collect()
    }
}

impl Classifier for MotifClassifier {
    fn class_count(&self) -> usize {
        match self.rule {
            MotifRule::SingleMotif => 3,
            MotifRule::Bams => 2,
        }
    }

    fn locality(&self) -> Locality {
        Locality::Global
    }

    fn evaluate(&self, g: &AnnotatedGraph, _target: Option<usize>) -> Result<LabelDistribution> {
        let found = self.present(g);
        Ok(match self.rule {
            MotifRule::SingleMotif => match found.as_slice() {
                [only] => {
                    let class = self.motifs().iter().position(|m| m == only).unwrap();
                    LabelDistribution::one_hot(3, class)
                }
                _ => LabelDistribution::uniform(3),
            },
            MotifRule::Bams => LabelDistribution::one_hot(2, usize::from(found.len() == 2)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(kind: MotifKind) -> AnnotatedGraph {
        AnnotatedGraph::from_pairs(kind.node_count(), &kind.edges()).unwrap()
    }

    #[test]
    fn templates_contain_only_themselves() {
        for a in MotifKind::ALL {
            for b in MotifKind::ALL {
                assert_eq!(contains_motif(&template(a), b), a == b, "{a} in {b}");
            }
        }
    }

    #[test]
    fn a_square_with_a_chord_is_not_a_cycle() {
        let chord = AnnotatedGraph::from_pairs(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        assert!(!contains_motif(&chord, MotifKind::Cycle5));
        assert!(contains_motif(&template(MotifKind::Cycle5), MotifKind::Cycle5));
    }

    #[test]
    fn no_motif_gives_uniform() {
        let path = AnnotatedGraph::from_pairs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(MotifClassifier::single().evaluate(&path, None).unwrap(), LabelDistribution::uniform(3));
        assert_eq!(
            MotifClassifier::single().evaluate(&template(MotifKind::Crane), None).unwrap(),
            LabelDistribution::one_hot(3, 2)
        );
    }
}
