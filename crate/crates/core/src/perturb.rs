//! Interventional distributions that keep one side of an explanation fixed
//! and perturb the other.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{complement, join_graphs, AnnotatedGraph, EdgeMask, Explanation, NodeId};

/// Which side of the explanation stays untouched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Keep `R`, perturb the complement (sufficiency).
    RFixed,
    /// Keep the complement, perturb `R` (necessity).
    CFixed,
}

#[derive(Clone, Debug)]
pub enum Family {
    /// Zero the features of every node whose incident edges all lie on the
    /// perturbable side.
    ZeroFeatures,
    /// Delete every perturbable edge.
    DeleteAll,
    /// Delete every perturbable edge, then apply the zero-features rule.
    DeleteAndZero,
    /// Keep each perturbable edge independently with probability `keep`.
    Bernoulli { keep: f64 },
    /// Delete a uniformly random `b`-subset of perturbable edges.
    Budget { b: usize },
    /// Swap the perturbable side for the matching side of a uniformly drawn
    /// pool graph, joined with `k_join` random cross edges.
    ReplaceComplement {
        pool: Arc<Vec<(AnnotatedGraph, EdgeMask)>>,
        k_join: Option<usize>,
    },
    /// Scale each node's features by its largest incident kept-side
    /// relevance. Accepts soft masks.
    SoftScale,
    /// Always returns the given graph, keeping node ids.
    PointMass { graph: Arc<AnnotatedGraph> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::ZeroFeatures => "zero-features",
            Family::DeleteAll => "delete-all",
            Family::DeleteAndZero => "delete-and-zero",
            Family::Bernoulli { .. } => "bernoulli",
            Family::Budget { .. } => "budget",
            Family::ReplaceComplement { .. } => "replace-complement",
            Family::SoftScale => "soft-scale",
            Family::PointMass { .. } => "point-mass",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerturbationSpec {
    pub side: Side,
    pub family: Family,
    pub seed: u64,
    /// Nodes that are never zeroed or dropped (node-task targets).
    pub protected: BTreeSet<NodeId>,
}

impl PerturbationSpec {
    pub fn new(side: Side, family: Family) -> Self {
        PerturbationSpec {
            side,
            family,
            seed: 0,
            protected: BTreeSet::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn protect(mut self, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        self.protected.extend(nodes);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.family {
            Family::Bernoulli { keep } if !(0.0..=1.0).contains(keep) => {
                Err(Error::InvalidParameter(format!("keep probability {keep} not in [0, 1]")))
            }
            Family::ReplaceComplement { pool, .. } if pool.is_empty() => {
                Err(Error::InvalidParameter("replacement pool is empty".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A sampled graph. `node_map[u]` is the index of original node `u` in the
/// sample (`None` when dropped); absent map means identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbed {
    pub graph: AnnotatedGraph,
    pub node_map: Option<Vec<Option<NodeId>>>,
    /// The requested budget exceeded the perturbable edges.
    pub clamped: bool,
}

impl Perturbed {
    fn same_nodes(graph: AnnotatedGraph) -> Self {
        Perturbed {
            graph,
            node_map: None,
            clamped: false,
        }
    }

    pub fn map_node(&self, u: NodeId) -> Option<NodeId> {
        match &self.node_map {
            None => Some(u),
            Some(m) => m.get(u).copied().flatten(),
        }
    }

    pub fn map_target(&self, target: Option<NodeId>) -> Result<Option<NodeId>> {
        match target {
            None => Ok(None),
            Some(u) => self
                .map_node(u)
                .map(Some)
                .ok_or_else(|| Error::InvalidParameter(format!("target {u} did not survive the perturbation"))),
        }
    }
}

/// Flags of edges the spec may touch.
pub fn perturbable(side: Side, bits: &[bool]) -> Vec<bool> {
    match side {
        Side::RFixed => bits.iter().map(|b| !b).collect(),
        Side::CFixed => bits.to_vec(),
    }
}

fn zero_rule(g: &AnnotatedGraph, pert: &[bool], protected: &BTreeSet<NodeId>) -> Vec<bool> {
    (0..g.node_count())
        .map(|u| {
            let nb = g.neighbors(u);
            !protected.contains(&u) && !nb.is_empty() && nb.iter().all(|&(_, e)| pert[e])
        })
        .collect()
}

fn zero_features(g: &AnnotatedGraph, zero: &[bool]) -> AnnotatedGraph {
    let d = g.feature_dim();
    let features = g
        .features()
        .iter()
        .zip(zero)
        .map(|(row, &z)| if z { vec![0.0; d] } else { row.clone() })
        .collect();
    g.with_features(features).expect("same shape")
}

struct Prepared<'a> {
    g: &'a AnnotatedGraph,
    spec: &'a PerturbationSpec,
    bits: Vec<bool>,
    pert: Vec<bool>,
    pert_idx: Vec<usize>,
}

fn prepare<'a>(spec: &'a PerturbationSpec, g: &'a AnnotatedGraph, mask: &EdgeMask) -> Result<Prepared<'a>> {
    spec.validate()?;
    mask.check_domain(g)?;
    for &u in &spec.protected {
        g.check_node(u)?;
    }
    let bits = match spec.family {
        Family::SoftScale | Family::PointMass { .. } => vec![false; g.edge_count()],
        _ => mask.bits()?,
    };
    let pert = perturbable(spec.side, &bits);
    let pert_idx = (0..pert.len()).filter(|&i| pert[i]).collect();
    Ok(Prepared {
        g,
        spec,
        bits,
        pert,
        pert_idx,
    })
}

impl Prepared<'_> {
    fn delete(&self, chosen: impl IntoIterator<Item = usize>) -> AnnotatedGraph {
        let mut drop = vec![false; self.g.edge_count()];
        for i in chosen {
            drop[i] = true;
        }
        self.g.without_edges(&drop)
    }

    fn soft_scale(&self, mask: &EdgeMask) -> AnnotatedGraph {
        let g = self.g;
        let features = (0..g.node_count())
            .map(|u| {
                let nb = g.neighbors(u);
                if nb.is_empty() || self.spec.protected.contains(&u) {
                    return g.features()[u].clone();
                }
                let factor = nb
                    .iter()
                    .map(|&(_, e)| match self.spec.side {
                        Side::RFixed => mask.score(e),
                        Side::CFixed => 1.0 - mask.score(e),
                    })
                    .fold(0.0, f64::max);
                g.features()[u].iter().map(|x| x * factor).collect()
            })
            .collect();
        g.with_features(features).expect("same shape")
    }

    fn kept_and_donor_side(&self) -> Result<(EdgeMask, bool)> {
        let kept = EdgeMask::from_bits(&self.bits);
        Ok(match self.spec.side {
            Side::RFixed => (kept, false),
            Side::CFixed => (complement(&kept)?, true),
        })
    }

    /// Kept part as a standalone graph, the default cross-edge count, and the
    /// node map from the host into the joined graph.
    fn kept_part(&self) -> Result<(AnnotatedGraph, usize, Vec<Option<NodeId>>)> {
        let (kept_mask, _) = self.kept_and_donor_side()?;
        let protected: Vec<NodeId> = self.spec.protected.iter().copied().collect();
        let kept = Explanation::new(self.g, &kept_mask, &protected)?;
        let nodes = kept.nodes();
        let node_set: BTreeSet<NodeId> = nodes.iter().copied().collect();
        let kept_flags = kept.selected_flags();
        let cross = self
            .g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(i, e)| {
                let (a, b) = e.endpoints();
                !kept_flags[i] && (node_set.contains(&a) || node_set.contains(&b))
            })
            .count();
        let mut map = vec![None; self.g.node_count()];
        for (i, &u) in nodes.iter().enumerate() {
            map[u] = Some(i);
        }
        Ok((kept.to_graph(), cross, map))
    }

    fn donor_part(&self, donor: &(AnnotatedGraph, EdgeMask)) -> Result<AnnotatedGraph> {
        let (g, mask) = donor;
        let (_, donor_takes_r) = self.kept_and_donor_side()?;
        let side = if donor_takes_r { mask.clone() } else { complement(mask)? };
        Ok(Explanation::new(g, &side, &[])?.to_graph())
    }
}

fn check_budget(p: &Prepared<'_>, b: usize) -> Result<(usize, bool)> {
    if b > 0 && p.pert_idx.is_empty() {
        return Err(Error::NothingToPerturb);
    }
    Ok((b.min(p.pert_idx.len()), b > p.pert_idx.len()))
}

/// Draws one graph from the distribution described by `spec`.
pub fn sample<R: Rng + ?Sized>(
    spec: &PerturbationSpec,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    rng: &mut R,
) -> Result<Perturbed> {
    let p = prepare(spec, g, mask)?;
    Ok(match &spec.family {
        Family::ZeroFeatures => Perturbed::same_nodes(zero_features(g, &zero_rule(g, &p.pert, &spec.protected))),
        Family::DeleteAll => Perturbed::same_nodes(p.delete(p.pert_idx.iter().copied())),
        Family::DeleteAndZero => {
            let zero = zero_rule(g, &p.pert, &spec.protected);
            Perturbed::same_nodes(zero_features(&p.delete(p.pert_idx.iter().copied()), &zero))
        }
        Family::Bernoulli { keep } => {
            let chosen: Vec<usize> = p
                .pert_idx
                .iter()
                .copied()
                .filter(|_| rng.gen::<f64>() >= *keep)
                .collect();
            Perturbed::same_nodes(p.delete(chosen))
        }
        Family::Budget { b } => {
            let (b, clamped) = check_budget(&p, *b)?;
            let picks = index::sample(rng, p.pert_idx.len(), b);
            let mut out = Perturbed::same_nodes(p.delete(picks.into_iter().map(|i| p.pert_idx[i])));
            out.clamped = clamped;
            out
        }
        Family::ReplaceComplement { pool, k_join } => {
            let donor = &pool[rng.gen_range(0..pool.len())];
            let (kept, cross, map) = p.kept_part()?;
            let other = p.donor_part(donor)?;
            let k = k_join.unwrap_or(cross).min(kept.node_count() * other.node_count());
            Perturbed {
                graph: join_graphs(&kept, &other, k, rng)?,
                node_map: Some(map),
                clamped: false,
            }
        }
        Family::SoftScale => Perturbed::same_nodes(p.soft_scale(mask)),
        Family::PointMass { graph } => Perturbed::same_nodes((**graph).clone()),
    })
}

/// Default cap on enumerated support sizes.
pub const SUPPORT_CAP: u128 = 1 << 20;

fn choose(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of elements `enumerate_support` would yield (zero-probability
/// outcomes excluded).
pub fn support_size(spec: &PerturbationSpec, g: &AnnotatedGraph, mask: &EdgeMask) -> Result<u128> {
    let p = prepare(spec, g, mask)?;
    Ok(match &spec.family {
        Family::Bernoulli { keep } if *keep > 0.0 && *keep < 1.0 => {
            if p.pert_idx.len() >= 127 {
                u128::MAX
            } else {
                1u128 << p.pert_idx.len()
            }
        }
        Family::Budget { b } => {
            let (b, _) = check_budget(&p, *b)?;
            choose(p.pert_idx.len(), b)
        }
        Family::ReplaceComplement { pool, k_join } => {
            let (kept, cross, _) = p.kept_part()?;
            let mut total: u128 = 0;
            for donor in pool.iter() {
                let other = p.donor_part(donor)?;
                let pairs = kept.node_count() * other.node_count();
                total = total.saturating_add(choose(pairs, k_join.unwrap_or(cross).min(pairs)));
            }
            total
        }
        _ => 1,
    })
}

/// Lexicographic `k`-subsets of `0..n`.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            cur: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let k = self.cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cur[i] < self.n - k + i {
                self.cur[i] += 1;
                for j in i + 1..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Every support element of the distribution with its probability.
/// Fails with `SupportTooLarge` above `cap`.
pub fn enumerate_support(
    spec: &PerturbationSpec,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    cap: u128,
) -> Result<Vec<(Perturbed, f64)>> {
    let size = support_size(spec, g, mask)?;
    if size > cap {
        return Err(Error::SupportTooLarge { size, cap });
    }
    let p = prepare(spec, g, mask)?;
    let mut out = Vec::with_capacity(size as usize);
    match &spec.family {
        Family::Bernoulli { keep } if *keep > 0.0 && *keep < 1.0 => {
            let m = p.pert_idx.len();
            for bitset in 0u64..(1u64 << m) {
                let deleted = bitset.count_ones() as i32;
                let prob = keep.powi(m as i32 - deleted) * (1.0 - keep).powi(deleted);
                let chosen = (0..m).filter(|&j| bitset >> j & 1 == 1).map(|j| p.pert_idx[j]);
                out.push((Perturbed::same_nodes(p.delete(chosen)), prob));
            }
        }
        Family::Budget { b } => {
            let (b, clamped) = check_budget(&p, *b)?;
            let prob = 1.0 / size as f64;
            for combo in Combinations::new(p.pert_idx.len(), b) {
                let mut s = Perturbed::same_nodes(p.delete(combo.into_iter().map(|i| p.pert_idx[i])));
                s.clamped = clamped;
                out.push((s, prob));
            }
        }
        Family::ReplaceComplement { pool, k_join } => {
            let (kept, cross, map) = p.kept_part()?;
            for donor in pool.iter() {
                let other = p.donor_part(donor)?;
                let (nr, nc) = (kept.node_count(), other.node_count());
                let k = k_join.unwrap_or(cross).min(nr * nc);
                let per_donor = choose(nr * nc, k);
                let prob = 1.0 / (pool.len() as f64 * per_donor as f64);
                for combo in Combinations::new(nr * nc, k) {
                    let graph = join_with_pairs(&kept, &other, &combo)?;
                    out.push((
                        Perturbed {
                            graph,
                            node_map: Some(map.clone()),
                            clamped: false,
                        },
                        prob,
                    ));
                }
            }
        }
        _ => {
            // every remaining family is deterministic given the mask
            let mut rng = rand::rngs::mock::StepRng::new(0, 0);
            out.push((sample(spec, g, mask, &mut rng)?, 1.0));
        }
    }
    Ok(out)
}

/// Join with an explicit set of cross-pair indices, mirroring the layout of
/// [`join_graphs`].
fn join_with_pairs(r: &AnnotatedGraph, c: &AnnotatedGraph, pairs: &[usize]) -> Result<AnnotatedGraph> {
    let base = join_graphs(r, c, 0, &mut rand::rngs::mock::StepRng::new(0, 0))?;
    let nc = c.node_count();
    let nr = r.node_count();
    let mut edges = base.edges().to_vec();
    edges.extend(pairs.iter().map(|&p| crate::graph::Edge::new(p / nc, nr + p % nc)));
    let mut g = AnnotatedGraph::new(base.node_count(), edges, base.features().to_vec())?
        .with_graph_label(base.graph_label())
        .with_node_labels(base.node_labels().map(<[usize]>::to_vec))?;
    if let Some(gt) = base.ground_truth() {
        let mut s = gt.scores().to_vec();
        s.resize(g.edge_count(), 0.0);
        g = g.with_ground_truth(Some(EdgeMask::new(s)?))?;
    }
    Ok(g)
}

/// `max(1, round(ratio * mean edge count))` over a dataset.
pub fn budget_from_dataset(graphs: &[AnnotatedGraph], ratio: f64) -> Result<usize> {
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("budget ratio {ratio} must be positive")));
    }
    let mean = graphs.iter().map(|g| g.edge_count() as f64).sum::<f64>() / graphs.len() as f64;
    Ok(((ratio * mean).round() as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> AnnotatedGraph {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        AnnotatedGraph::from_pairs(n, &pairs).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn budget_zero_and_keep_one_are_identity() {
        let g = path(5);
        let mask = EdgeMask::from_bits(&[true, false, false, true]);
        let spec = PerturbationSpec::new(Side::RFixed, Family::Budget { b: 0 });
        assert_eq!(sample(&spec, &g, &mask, &mut rng()).unwrap().graph, g);
        let spec = PerturbationSpec::new(Side::RFixed, Family::Bernoulli { keep: 1.0 });
        for _ in 0..10 {
            assert_eq!(sample(&spec, &g, &mask, &mut rng()).unwrap().graph, g);
        }
    }

    #[test]
    fn delete_all_keeps_the_target() {
        let g = path(4);
        let mask = EdgeMask::from_bits(&[true, true, false]);
        let spec = PerturbationSpec::new(Side::CFixed, Family::DeleteAll).protect([0]);
        let out = sample(&spec, &g, &mask, &mut rng()).unwrap();
        assert_eq!(out.graph.node_count(), 4);
        assert_eq!(out.graph.edges(), &[Edge::new(2, 3)]);
        assert_eq!(out.map_node(0), Some(0));
    }

    #[test]
    fn empty_side_with_budget_is_reported() {
        let g = path(3);
        let spec = PerturbationSpec::new(Side::RFixed, Family::Budget { b: 1 });
        assert_eq!(
            sample(&spec, &g, &EdgeMask::ones(2), &mut rng()),
            Err(Error::NothingToPerturb)
        );
        let spec = PerturbationSpec::new(Side::RFixed, Family::Budget { b: 5 });
        let out = sample(&spec, &g, &EdgeMask::zeros(2), &mut rng()).unwrap();
        assert!(out.clamped);
        assert_eq!(out.graph.edge_count(), 0);
    }

    #[test]
    fn zero_features_only_touches_fully_perturbable_nodes() {
        let g = path(4);
        let mask = EdgeMask::from_bits(&[true, false, false]);
        let spec = PerturbationSpec::new(Side::RFixed, Family::ZeroFeatures);
        let out = sample(&spec, &g, &mask, &mut rng()).unwrap().graph;
        let f: Vec<f64> = out.features().iter().map(|r| r[0]).collect();
        assert_eq!(f, vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(out.edges(), g.edges());
    }

    #[test]
    fn soft_scale_matches_zero_features_on_binary_masks() {
        let g = path(6);
        let mask = EdgeMask::from_bits(&[false, true, false, false, true]);
        for side in [Side::RFixed, Side::CFixed] {
            let a = sample(&PerturbationSpec::new(side, Family::SoftScale), &g, &mask, &mut rng()).unwrap();
            let b = sample(&PerturbationSpec::new(side, Family::ZeroFeatures), &g, &mask, &mut rng()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn support_examples() {
        let g = path(6);
        let mask = EdgeMask::from_bits(&[true, false, false, false, false]);
        let spec = PerturbationSpec::new(Side::RFixed, Family::Budget { b: 2 });
        let support = enumerate_support(&spec, &g, &mask, SUPPORT_CAP).unwrap();
        assert_eq!(support.len(), 6);
        assert!(support.iter().all(|(_, p)| *p == 1.0 / 6.0));

        let mask = EdgeMask::from_bits(&[true, true, true, false, false]);
        let spec = PerturbationSpec::new(Side::RFixed, Family::Bernoulli { keep: 0.3 });
        let support = enumerate_support(&spec, &g, &mask, SUPPORT_CAP).unwrap();
        let mut probs: Vec<f64> = support.iter().map(|(_, p)| *p).collect();
        probs.sort_by(f64::total_cmp);
        let expect = [0.3 * 0.3, 0.3 * 0.7, 0.3 * 0.7, 0.7 * 0.7];
        for (a, b) in probs.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }

        let spec = PerturbationSpec::new(Side::RFixed, Family::DeleteAll);
        assert_eq!(enumerate_support(&spec, &g, &mask, SUPPORT_CAP).unwrap().len(), 1);

        let spec = PerturbationSpec::new(Side::CFixed, Family::Budget { b: 1 });
        assert!(matches!(
            enumerate_support(&spec, &g, &mask, 2),
            Err(Error::SupportTooLarge { size: 3, cap: 2 })
        ));
    }

    #[test]
    fn replace_complement_keeps_r_and_matches_its_support() {
        let g = path(5);
        let mask = EdgeMask::from_bits(&[true, true, false, false]);
        let donor = AnnotatedGraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let pool = Arc::new(vec![(donor.clone(), EdgeMask::from_bits(&[true, false, false]))]);
        let spec = PerturbationSpec::new(Side::RFixed, Family::ReplaceComplement { pool, k_join: None });
        let support = enumerate_support(&spec, &g, &mask, SUPPORT_CAP).unwrap();
        // R spans 3 nodes, the donor complement spans 3, one original cross edge
        assert_eq!(support.len(), 9);
        let mut r = rng();
        for _ in 0..20 {
            let s = sample(&spec, &g, &mask, &mut r).unwrap();
            assert!(s.graph.has_edge(Edge::new(0, 1)) && s.graph.has_edge(Edge::new(1, 2)));
            assert!(support.iter().any(|(t, _)| t.graph == s.graph));
        }
    }

    #[test]
    fn combinations_count() {
        assert_eq!(Combinations::new(12, 6).count(), 924);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn budget_rule_examples() {
        let with_edges = |m: usize| path(m + 1);
        assert_eq!(budget_from_dataset(&[with_edges(10), with_edges(20)], 0.05).unwrap(), 1);
        assert_eq!(budget_from_dataset(&[with_edges(100)], 0.05).unwrap(), 5);
        assert_eq!(budget_from_dataset(&[with_edges(20)], 0.3).unwrap(), 6);
        assert!(budget_from_dataset(&[], 0.1).is_err());
    }
}
