//! Deterministic synthetic graphs: lines, stars, base-plus-motif graphs with
//! ground-truth masks, ID/OOD splits and BA composites.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{AnnotatedGraph, Edge, EdgeMask};
use crate::motifs::MotifKind;
use crate::seed::task_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseKind {
    Ladder,
    Tree,
    Wheel,
    Path,
    CircularLadder,
}

impl BaseKind {
    pub const ALL: [BaseKind; 5] = [
        BaseKind::Ladder,
        BaseKind::Tree,
        BaseKind::Wheel,
        BaseKind::Path,
        BaseKind::CircularLadder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseKind::Ladder => "ladder",
            BaseKind::Tree => "tree",
            BaseKind::Wheel => "wheel",
            BaseKind::Path => "path",
            BaseKind::CircularLadder => "circular-ladder",
        }
    }

    /// Smallest accepted size parameter. For ladders the size counts rungs,
    /// for wheels rim nodes, otherwise nodes.
    pub fn min_size(self) -> usize {
        match self {
            BaseKind::Ladder | BaseKind::Tree | BaseKind::Path => 2,
            BaseKind::Wheel => 6,
            BaseKind::CircularLadder => 4,
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown base kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureMode {
    Constant { dim: usize },
    /// One-hot degree, degrees above `max_degree` share the last slot.
    OneHotDegree { max_degree: usize },
    /// Uniform in `[0, 1)`, drawn from the graph's own generator.
    SeededRandom { dim: usize },
}

impl Default for FeatureMode {
    fn default() -> Self {
        FeatureMode::Constant { dim: 1 }
    }
}

impl FeatureMode {
    pub fn dim(&self) -> usize {
        match *self {
            FeatureMode::Constant { dim } | FeatureMode::SeededRandom { dim } => dim,
            FeatureMode::OneHotDegree { max_degree } => max_degree + 1,
        }
    }
}

fn features<R: Rng + ?Sized>(n: usize, pairs: &[(usize, usize)], mode: FeatureMode, rng: &mut R) -> Vec<Vec<f64>> {
    match mode {
        FeatureMode::Constant { dim } => vec![vec![1.0; dim]; n],
        FeatureMode::SeededRandom { dim } => (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect(),
        FeatureMode::OneHotDegree { max_degree } => {
            let mut deg = vec![0usize; n];
            for &(a, b) in pairs {
                deg[a] += 1;
                deg[b] += 1;
            }
            deg.into_iter()
                .map(|d| {
                    let mut row = vec![0.0; max_degree + 1];
                    row[d.min(max_degree)] = 1.0;
                    row
                })
                .collect()
        }
    }
}

fn build(n: usize, pairs: &[(usize, usize)], mode: FeatureMode, rng: &mut impl Rng) -> Result<AnnotatedGraph> {
    let x = features(n, pairs, mode, rng);
    AnnotatedGraph::new(n, pairs.iter().map(|&p| Edge::from(p)).collect(), x)
}

/// Path `0 – 1 – … – n−1` with constant unit features.
pub fn gen_line(n: usize) -> Result<AnnotatedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter("a line needs at least 2 nodes".into()));
    }
    let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    AnnotatedGraph::from_pairs(n, &pairs)
}

/// Star with centre 0 and leaves `1..n`, constant unit features.
pub fn gen_star(n: usize) -> Result<AnnotatedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter("a star needs at least 2 nodes".into()));
    }
    let pairs: Vec<_> = (1..n).map(|i| (0, i)).collect();
    AnnotatedGraph::from_pairs(n, &pairs)
}

/// Node count and edges of a base graph.
pub fn base_edges<R: Rng + ?Sized>(kind: BaseKind, size: usize, rng: &mut R) -> Result<(usize, Vec<(usize, usize)>)> {
    if size < kind.min_size() {
        return Err(Error::InvalidParameter(format!(
            "{kind} needs size ≥ {}, got {size}",
            kind.min_size()
        )));
    }
    Ok(match kind {
        BaseKind::Ladder => {
            let k = size;
            let mut e = Vec::new();
            for i in 0..k {
                if i + 1 < k {
                    e.push((i, i + 1));
                    e.push((k + i, k + i + 1));
                }
                e.push((i, k + i));
            }
            (2 * k, e)
        }
        BaseKind::Tree => (size, (1..size).map(|i| (rng.gen_range(0..i), i)).collect()),
        BaseKind::Wheel => {
            let mut e: Vec<_> = (1..=size).map(|i| (0, i)).collect();
            e.extend((1..=size).map(|i| (i, i % size + 1)));
            (size + 1, e)
        }
        BaseKind::Path => (size, (0..size - 1).map(|i| (i, i + 1)).collect()),
        BaseKind::CircularLadder => {
            // an even cycle length keeps the prism bipartite
            let k = size + size % 2;
            let mut e = Vec::new();
            for i in 0..k {
                e.push((i, (i + 1) % k));
                e.push((k + i, k + (i + 1) % k));
                e.push((i, k + i));
            }
            (2 * k, e)
        }
    })
}

/// Class label of a motif in single-motif datasets.
pub fn motif_label(kind: MotifKind) -> usize {
    MotifKind::ALL.iter().position(|&k| k == kind).unwrap()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MotifGraphOptions {
    pub features: FeatureMode,
    /// Mark the bridge edge as part of the ground truth.
    pub gt_includes_bridge: bool,
}

/// Base graph plus motifs, each bridged from a uniformly chosen base node to
/// motif node 0. Node order: base, then motifs. Edge order: base edges, then
/// per motif its template edges followed by its bridge.
fn compose<R: Rng + ?Sized>(
    base: BaseKind,
    base_size: usize,
    motifs: &[MotifKind],
    opts: MotifGraphOptions,
    rng: &mut R,
) -> Result<(usize, Vec<(usize, usize)>, Vec<bool>)> {
    let (mut n, mut pairs) = base_edges(base, base_size, rng)?;
    let base_nodes = n;
    let mut gt = vec![false; pairs.len()];
    for &m in motifs {
        let offset = n;
        for (a, b) in m.edges() {
            pairs.push((a + offset, b + offset));
            gt.push(true);
        }
        pairs.push((rng.gen_range(0..base_nodes), offset));
        gt.push(opts.gt_includes_bridge);
        n += m.node_count();
    }
    Ok((n, pairs, gt))
}

pub fn gen_motif_graph<R: Rng>(
    base: BaseKind,
    motif: MotifKind,
    base_size: usize,
    opts: MotifGraphOptions,
    rng: &mut R,
) -> Result<AnnotatedGraph> {
    let (n, pairs, gt) = compose(base, base_size, &[motif], opts, rng)?;
    build(n, &pairs, opts.features, rng)?
        .with_graph_label(Some(motif_label(motif)))
        .with_ground_truth(Some(EdgeMask::from_bits(&gt)))
}

/// Instance family produced by [`generate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFamily {
    Line(usize),
    Star(usize),
    MotifBasis,
    Bams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub family: DatasetFamily,
    pub id_bases: Vec<BaseKind>,
    pub ood_bases: Vec<BaseKind>,
    pub motifs: Vec<MotifKind>,
    /// Graphs in train, ID test and OOD test.
    pub counts: [usize; 3],
    /// Inclusive range of the base size parameter.
    pub base_size: (usize, usize),
    pub options: MotifGraphOptions,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            family: DatasetFamily::MotifBasis,
            id_bases: vec![BaseKind::Ladder, BaseKind::Tree],
            ood_bases: vec![BaseKind::CircularLadder],
            motifs: vec![MotifKind::House, MotifKind::Cycle5, MotifKind::Crane],
            counts: [60, 20, 20],
            base_size: (6, 10),
            options: MotifGraphOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: Vec<AnnotatedGraph>,
    pub id_test: Vec<AnnotatedGraph>,
    pub ood_test: Vec<AnnotatedGraph>,
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ood_bases.is_empty() {
            return Err(Error::InvalidSplit("no base kind is held out for the OOD split".into()));
        }
        if self.id_bases.is_empty() {
            return Err(Error::InvalidSplit("no base kind for the ID splits".into()));
        }
        if let Some(k) = self.ood_bases.iter().find(|k| self.id_bases.contains(k)) {
            return Err(Error::InvalidSplit(format!("{k} is used by both ID and OOD splits")));
        }
        if self.motifs.is_empty() {
            return Err(Error::InvalidParameter("no motif kinds".into()));
        }
        if self.counts.contains(&0) {
            return Err(Error::InvalidParameter("split counts must be at least 1".into()));
        }
        if self.base_size.0 > self.base_size.1 {
            return Err(Error::InvalidParameter("empty base size range".into()));
        }
        Ok(())
    }
}

/// Graph `index` of split `split` (0 train, 1 ID test, 2 OOD test). Motifs
/// rotate round-robin; base kind and size are drawn from the graph's own
/// generator.
pub fn gen_split_graph(cfg: &DatasetConfig, split: usize, index: usize) -> Result<AnnotatedGraph> {
    let mut rng = task_rng(cfg.seed, split as u64, index as u64, 0);
    let bases = if split == 2 { &cfg.ood_bases } else { &cfg.id_bases };
    let base = bases[rng.gen_range(0..bases.len())];
    let size = rng.gen_range(cfg.base_size.0..=cfg.base_size.1).max(base.min_size());
    let motif = cfg.motifs[index % cfg.motifs.len()];
    gen_motif_graph(base, motif, size, cfg.options, &mut rng)
}

pub fn gen_split(cfg: &DatasetConfig) -> Result<Split> {
    cfg.validate()?;
    let make = |split: usize| (0..cfg.counts[split]).map(|i| gen_split_graph(cfg, split, i)).collect::<Result<Vec<_>>>();
    Ok(Split {
        train: make(0)?,
        id_test: make(1)?,
        ood_test: make(2)?,
    })
}

/// Replaces the features of `g` according to `mode`.
pub fn apply_features<R: Rng + ?Sized>(g: &AnnotatedGraph, mode: FeatureMode, rng: &mut R) -> Result<AnnotatedGraph> {
    let pairs: Vec<_> = g.edges().iter().map(|e| e.endpoints()).collect();
    g.with_features(features(g.node_count(), &pairs, mode, rng))
}

/// Generates the three splits of any family. Lines and stars are a single
/// train graph; BA composites are cut into consecutive splits.
pub fn generate(cfg: &DatasetConfig) -> Result<Split> {
    let single = |g: AnnotatedGraph| -> Result<Split> {
        let mut rng = task_rng(cfg.seed, 0, 0, 0);
        Ok(Split {
            train: vec![apply_features(&g, cfg.options.features, &mut rng)?],
            id_test: vec![],
            ood_test: vec![],
        })
    };
    match cfg.family {
        DatasetFamily::Line(n) => single(gen_line(n)?),
        DatasetFamily::Star(n) => single(gen_star(n)?),
        DatasetFamily::MotifBasis => gen_split(cfg),
        DatasetFamily::Bams => {
            if cfg.counts.contains(&0) {
                return Err(Error::InvalidParameter("split counts must be at least 1".into()));
            }
            let mut all = gen_bams(cfg.counts.iter().sum(), cfg.base_size, cfg.options.features, cfg.seed)?;
            let ood_test = all.split_off(cfg.counts[0] + cfg.counts[1]);
            let id_test = all.split_off(cfg.counts[0]);
            Ok(Split {
                train: all,
                id_test,
                ood_test,
            })
        }
    }
}

/// Motif sets of the two-class BA composites, class 0 first.
pub const BAMS_CLASS0: [&[MotifKind]; 5] = [
    &[],
    &[MotifKind::House],
    &[MotifKind::Grid],
    &[MotifKind::Wheel],
    &[MotifKind::House, MotifKind::Grid, MotifKind::Wheel],
];
pub const BAMS_CLASS1: [&[MotifKind]; 3] = [
    &[MotifKind::House, MotifKind::Grid],
    &[MotifKind::House, MotifKind::Wheel],
    &[MotifKind::Grid, MotifKind::Wheel],
];

/// Preferential-attachment tree: node `i` links to an existing node chosen
/// with probability proportional to its degree.
pub fn ba_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut ends: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for i in 1..n {
        let j = if ends.is_empty() { 0 } else { ends[rng.gen_range(0..ends.len())] };
        pairs.push((j, i));
        ends.push(j);
        ends.push(i);
    }
    pairs
}

/// BA composites: even indices are class 0, odd indices class 1, cycling
/// through the motif sets of each class.
pub fn gen_bams(count: usize, base_nodes: (usize, usize), features: FeatureMode, seed: u64) -> Result<Vec<AnnotatedGraph>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if base_nodes.0 < 2 || base_nodes.0 > base_nodes.1 {
        return Err(Error::InvalidParameter("invalid BA size range".into()));
    }
    (0..count)
        .map(|i| {
            let mut rng = task_rng(seed, 3, i as u64, 0);
            let (label, motifs) = if i % 2 == 0 {
                (0, BAMS_CLASS0[(i / 2) % BAMS_CLASS0.len()])
            } else {
                (1, BAMS_CLASS1[(i / 2) % BAMS_CLASS1.len()])
            };
            let n0 = rng.gen_range(base_nodes.0..=base_nodes.1);
            let mut pairs = ba_tree(n0, &mut rng);
            let mut gt = vec![false; pairs.len()];
            let mut n = n0;
            for &m in motifs {
                for (a, b) in m.edges() {
                    pairs.push((a + n, b + n));
                    gt.push(true);
                }
                pairs.push((rng.gen_range(0..n0), n));
                gt.push(false);
                n += m.node_count();
            }
            let g = build(n, &pairs, features, &mut rng)?.with_graph_label(Some(label));
            // a plain base has no ground truth to mark
            let mask = gt.contains(&true).then(|| EdgeMask::from_bits(&gt));
            g.with_ground_truth(mask)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lines_and_stars() {
        let l = gen_line(3).unwrap();
        assert_eq!(l.edges(), &[Edge::new(0, 1), Edge::new(1, 2)]);
        assert_eq!(gen_line(9).unwrap().edge_count(), 8);
        let s = gen_star(4).unwrap();
        assert_eq!(s.degree(0), 3);
        assert!((1..4).all(|u| s.degree(u) == 1));
        assert!(gen_line(1).is_err());
    }

    #[test]
    fn motif_graphs_mark_only_motif_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (motif, count, label) in [(MotifKind::Cycle5, 5, 1), (MotifKind::House, 6, 0), (MotifKind::Crane, 7, 2)] {
            let g = gen_motif_graph(BaseKind::Ladder, motif, 4, MotifGraphOptions::default(), &mut rng).unwrap();
            assert_eq!(g.ground_truth().unwrap().count_selected(), count);
            assert_eq!(g.graph_label(), Some(label));
            let bridge = g.edge_count() - 1;
            assert_eq!(g.ground_truth().unwrap().score(bridge), 0.0);
        }
        let opts = MotifGraphOptions {
            gt_includes_bridge: true,
            ..MotifGraphOptions::default()
        };
        let g = gen_motif_graph(BaseKind::Path, MotifKind::Cycle5, 3, opts, &mut rng).unwrap();
        assert_eq!(g.ground_truth().unwrap().count_selected(), 6);
    }

    #[test]
    fn split_needs_a_held_out_base() {
        let cfg = DatasetConfig {
            ood_bases: vec![],
            ..DatasetConfig::default()
        };
        assert!(matches!(gen_split(&cfg), Err(Error::InvalidSplit(_))));
        let cfg = DatasetConfig {
            ood_bases: vec![BaseKind::Tree],
            ..DatasetConfig::default()
        };
        assert!(matches!(gen_split(&cfg), Err(Error::InvalidSplit(_))));
    }

    #[test]
    fn motif_classifier_labels_every_split_graph() {
        use crate::models::{Classifier, MotifClassifier};
        let cfg = DatasetConfig {
            id_bases: vec![BaseKind::Ladder, BaseKind::Tree, BaseKind::Path],
            ood_bases: vec![BaseKind::CircularLadder, BaseKind::Wheel],
            counts: [12, 6, 6],
            ..DatasetConfig::default()
        };
        let split = gen_split(&cfg).unwrap();
        assert_eq!(split, gen_split(&cfg).unwrap());
        let clf = MotifClassifier::single();
        for g in split.train.iter().chain(&split.id_test).chain(&split.ood_test) {
            let p = clf.evaluate(g, None).unwrap();
            assert_eq!(Some(p.argmax()), g.graph_label());
            assert_eq!(p.prob(p.argmax()), 1.0);
        }
        for (i, g) in split.train.iter().enumerate() {
            assert_eq!(g.graph_label(), Some(i % 3));
        }
    }

    #[test]
    fn bams_classes_follow_the_two_motif_rule() {
        use crate::models::{Classifier, MotifClassifier};
        let gs = gen_bams(16, (8, 14), FeatureMode::default(), 5).unwrap();
        assert!(gs[0].ground_truth().is_none());
        let clf = MotifClassifier::bams();
        for g in &gs {
            assert_eq!(Some(clf.evaluate(g, None).unwrap().argmax()), g.graph_label());
        }
    }

    #[test]
    fn bases_have_expected_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(base_edges(BaseKind::Ladder, 3, &mut rng).unwrap(), (6, vec![(0, 1), (3, 4), (0, 3), (1, 2), (4, 5), (1, 4), (2, 5)]));
        let (n, e) = base_edges(BaseKind::Wheel, 6, &mut rng).unwrap();
        assert_eq!((n, e.len()), (7, 12));
        let (n, e) = base_edges(BaseKind::CircularLadder, 5, &mut rng).unwrap();
        assert_eq!((n, e.len()), (12, 18));
        let (n, e) = base_edges(BaseKind::Tree, 10, &mut rng).unwrap();
        assert_eq!((n, e.len()), (10, 9));
        assert!(base_edges(BaseKind::Wheel, 5, &mut rng).is_err());
    }
}
