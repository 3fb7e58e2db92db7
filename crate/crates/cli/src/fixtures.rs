//! Small constructed instances shared by the verification sweeps and the
//! acceptance suite.

use std::collections::BTreeSet;

use faithkit::canon::graph_certificate;
use faithkit::graph::Edge;
use faithkit::models::{
    GinParams, GroundTruthDetector, HashClassifier, MaskingMode, ModularModel, MotifClassifier, Readout, Stage, Switches,
};
use faithkit::motifs::MotifKind;
use faithkit::perturb::{budget_from_dataset, Family, PerturbationSpec, Side};
use faithkit::synth::{gen_split, gen_star, BaseKind, DatasetConfig, FeatureMode, MotifGraphOptions};
use faithkit::{AnnotatedGraph, EdgeMask, Result};
use faithkit::seed::task_rng;
use rand::Rng;

/// Leaf whose prediction the star fixture explains.
pub const STAR_TARGET: usize = 1;

/// Star with `leaves` leaves around node 0.
pub fn star(leaves: usize) -> Result<AnnotatedGraph> {
    gen_star(leaves + 1)
}

/// One-hop hash classifier on the star target: only edge (0, 1) is truly
/// relevant, and deleting it flips the predicted class.
pub fn star_classifier() -> HashClassifier {
    HashClassifier {
        classes: 3,
        hops: Some(1),
    }
}

/// Explanation made of the relevant edge (0, 1) plus the next `k` spokes.
pub fn star_mask(g: &AnnotatedGraph, k: usize) -> EdgeMask {
    let bits: Vec<bool> = g
        .edges()
        .iter()
        .map(|e| {
            let (_, leaf) = e.endpoints();
            leaf == STAR_TARGET || (leaf > STAR_TARGET && leaf <= STAR_TARGET + k)
        })
        .collect();
    EdgeMask::from_bits(&bits)
}

/// A house hanging off a 3-rung ladder; the explanation is everything but
/// the house. Deleting the house's top edge leaves an induced five-cycle.
pub fn house_fixture() -> Result<(AnnotatedGraph, EdgeMask)> {
    let mut rng = task_rng(0, 0, 0, 0);
    let g = faithkit::synth::gen_motif_graph(
        BaseKind::Ladder,
        MotifKind::House,
        3,
        MotifGraphOptions::default(),
        &mut rng,
    )?;
    let gt = g.ground_truth().expect("motif graphs carry ground truth").clone();
    let mask = faithkit::graph::complement(&gt)?;
    Ok((g, mask))
}

pub fn house_classifier() -> MotifClassifier {
    MotifClassifier::single()
}

/// Connected graphs with 2 to 6 nodes and at most 8 edges, one per
/// isomorphism class, unit features.
pub fn small_connected_graphs() -> Vec<AnnotatedGraph> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 2..=6usize {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for subset in 0u32..(1u32 << slots.len()) {
            let m = subset.count_ones() as usize;
            if m < n - 1 || m > 8 {
                continue;
            }
            let pairs: Vec<_> = (0..slots.len()).filter(|&i| subset >> i & 1 == 1).map(|i| slots[i]).collect();
            if !connected(n, &pairs) {
                continue;
            }
            let g = AnnotatedGraph::from_pairs(n, &pairs).expect("valid pairs");
            if seen.insert(graph_certificate(&g, None)) {
                out.push(g);
            }
        }
    }
    out
}

fn connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parts = n;
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            parts -= 1;
        }
    }
    parts == 1
}

/// One instance of the specialization corpus.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: AnnotatedGraph,
    pub model: GinParams,
    pub target: Option<usize>,
    /// Binary explanation with both sides non-empty.
    pub mask: EdgeMask,
    /// Soft scores for the probability-of-necessity/sufficiency rows.
    pub soft: EdgeMask,
}

/// Ten GIN instances with at most 12 edges, mixed graph and node tasks,
/// features and masks drawn from `seed`.
pub fn specialization_corpus(seed: u64) -> Result<Vec<Instance>> {
    let mut rng = task_rng(seed, 0, 0, 0);
    let mut shapes: Vec<(usize, Vec<(usize, usize)>)> = vec![
        (5, (0..4).map(|i| (i, i + 1)).collect()),
        (6, (1..6).map(|i| (0, i)).collect()),
    ];
    for kind in [MotifKind::House, MotifKind::Cycle5, MotifKind::Crane, MotifKind::Wheel] {
        shapes.push((kind.node_count(), kind.edges()));
    }
    // lollipop, two triangles joined by a path, tree, ladder with chord
    shapes.push((6, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)]));
    shapes.push((7, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 6), (6, 4)]));
    shapes.push((8, vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6), (6, 7)]));
    shapes.push((8, vec![(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7), (0, 4), (1, 5), (2, 6), (3, 7), (0, 5)]));
    let dim = 3;
    shapes
        .into_iter()
        .enumerate()
        .map(|(i, (n, pairs))| {
            let features = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let graph = AnnotatedGraph::new(n, pairs.iter().map(|&p| Edge::from(p)).collect(), features)?;
            let m = graph.edge_count();
            let mut bits: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
            bits[0] = true;
            bits[m - 1] = false;
            let soft = EdgeMask::new((0..m).map(|_| rng.gen::<f64>()).collect())?;
            Ok(Instance {
                model: GinParams::seeded(dim, 3, 2, 100 + i as u64),
                target: if i % 2 == 1 { Some(i % n) } else { None },
                mask: EdgeMask::from_bits(&bits),
                soft,
                graph,
            })
        })
        .collect()
}

/// ID/OOD splits sharing their motifs, a model per leakage tier and the
/// complement perturbation used for the sufficiency terms.
pub struct TierSuite {
    pub id: Vec<AnnotatedGraph>,
    pub ood: Vec<AnnotatedGraph>,
    pub models: Vec<(String, ModularModel)>,
    pub suf_spec: PerturbationSpec,
    pub nec_spec: PerturbationSpec,
}

/// Hidden width and parameter seed of the tier classifier.
pub const TIER_DIM: usize = 3;
pub const TIER_SEED: u64 = 8;

pub fn tier_classifier() -> GinParams {
    GinParams::seeded(TIER_DIM, 3, 2, TIER_SEED)
        .with_readout(Readout::Mean)
        .with_switches(Switches {
            hs: false,
            cf: true,
            er: true,
            la: true,
        })
}

/// Ideal detector with hard masking, then soft masking with complement scores
/// 0.5 and 1.0.
pub fn tier_models() -> Vec<(String, ModularModel)> {
    let stage = || Stage::Gin(tier_classifier());
    vec![
        (
            "ideal".to_string(),
            ModularModel::new(GroundTruthDetector::ideal(), stage(), MaskingMode::HardSubgraph),
        ),
        (
            "leaky-0.5".to_string(),
            ModularModel::new(GroundTruthDetector::leaky(0.5), stage(), MaskingMode::SoftScale),
        ),
        (
            "leaky-1.0".to_string(),
            ModularModel::new(GroundTruthDetector::leaky(1.0), stage(), MaskingMode::SoftScale),
        ),
    ]
}

pub fn tier_dataset(seed: u64) -> DatasetConfig {
    DatasetConfig {
        id_bases: vec![BaseKind::Ladder, BaseKind::Tree],
        ood_bases: vec![BaseKind::CircularLadder],
        counts: [3, 12, 12],
        base_size: (4, 6),
        options: MotifGraphOptions {
            features: FeatureMode::Constant { dim: TIER_DIM },
            gt_includes_bridge: false,
        },
        seed,
        ..DatasetConfig::default()
    }
}

pub fn tier_suite(seed: u64) -> Result<TierSuite> {
    let split = gen_split(&tier_dataset(seed))?;
    let b = budget_from_dataset(&split.id_test, 0.05)?;
    Ok(TierSuite {
        models: tier_models(),
        suf_spec: PerturbationSpec::new(Side::RFixed, Family::Budget { b }).with_seed(seed),
        nec_spec: PerturbationSpec::new(Side::CFixed, Family::Budget { b }).with_seed(seed),
        id: split.id_test,
        ood: split.ood_test,
    })
}

/// Triangle with a three-edge tail; the triangle is the ground truth.
pub fn witness_graph() -> Result<AnnotatedGraph> {
    let g = AnnotatedGraph::new(
        6,
        [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)].into_iter().map(Edge::from).collect(),
        (0..6).map(|u| vec![0.2 + 0.1 * u as f64, 1.0 - 0.15 * u as f64, 0.5]).collect(),
    )?;
    g.with_ground_truth(Some(EdgeMask::from_bits(&[true, true, true, false, false, false])))
}

fn witness_stage(hs: bool) -> Stage {
    Stage::Gin(
        GinParams::seeded(3, 3, 2, 0)
            .with_readout(Readout::Sum)
            .with_switches(Switches {
                hs,
                cf: true,
                er: true,
                la: true,
            }),
    )
}

/// Detector scoring the complement 0.3 (maximally plausible once binarized)
/// feeding a soft-masked classifier.
pub fn witness_soft_model() -> ModularModel {
    ModularModel::new(GroundTruthDetector::leaky(0.3), witness_stage(false), MaskingMode::SoftScale)
}

/// Same detector behind hard masking with every switch closed.
pub fn witness_hard_model() -> ModularModel {
    ModularModel::new(GroundTruthDetector::leaky(0.3), witness_stage(true), MaskingMode::HardSubgraph)
}

/// Complement deletions of one edge.
pub fn witness_spec() -> PerturbationSpec {
    PerturbationSpec::new(Side::RFixed, Family::Budget { b: 1 })
}
