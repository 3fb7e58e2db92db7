//! Terms of the ID/OOD likelihood-gap bound for modular models: topological
//! and feature distance of the detected subgraph, its degree of sufficiency,
//! and the gap itself.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{threshold_binarize, AnnotatedGraph, EdgeMask, Explanation};
use crate::metrics::{expectation, faith_best, pearson, wiou, Divergence, MetricParams};
use crate::models::{Classifier, Detector, ModularModel, Stage};
use crate::oracles::test_nonstrict_sufficiency;
use crate::perturb::{PerturbationSpec, Side};

/// Seed stream offset separating OOD graphs from ID graphs.
const OOD_STREAM: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// `|E_id p(y|G) − E_ood p(y|G)|`.
    pub lhs: f64,
    pub lambda_topo_id: f64,
    pub lambda_topo_ood: f64,
    pub lambda_feat_id: f64,
    pub lambda_feat_ood: f64,
    pub lambda_suff_id: f64,
    pub lambda_suff_ood: f64,
    pub id_count: usize,
    pub ood_count: usize,
    /// Graphs excluded from the sufficiency terms.
    pub failures: usize,
}

fn nonempty(graphs: &[AnnotatedGraph]) -> Result<()> {
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("empty graph list".into()));
    }
    Ok(())
}

fn ground_truth(g: &AnnotatedGraph) -> Result<&EdgeMask> {
    g.ground_truth().ok_or(Error::MissingGroundTruth)
}

/// Mean of `1 − wiou(detector(g), ground truth)`.
pub fn lambda_topo<D: Detector + ?Sized>(detector: &D, graphs: &[AnnotatedGraph]) -> Result<f64> {
    nonempty(graphs)?;
    let mut total = 0.0;
    for g in graphs {
        let gt = ground_truth(g)?;
        total += 1.0 - wiou(&detector.detect(g)?, gt)?;
    }
    Ok(total / graphs.len() as f64)
}

/// Mean L1 distance between aligned feature rows, divided by the dimension and
/// by the value range of the aligned entries. `alignment` pairs a row of
/// `detected` with a row of `reference`.
pub fn lambda_feat(detected: &[Vec<f64>], reference: &[Vec<f64>], alignment: &[(usize, usize)]) -> Result<f64> {
    if alignment.is_empty() {
        return Err(Error::AlignmentError("no aligned nodes".into()));
    }
    let mut seen_a = vec![false; detected.len()];
    let mut seen_b = vec![false; reference.len()];
    let mut rows = Vec::with_capacity(alignment.len());
    for &(a, b) in alignment {
        if a >= detected.len() || b >= reference.len() {
            return Err(Error::AlignmentError(format!("pair ({a}, {b}) out of range")));
        }
        if std::mem::replace(&mut seen_a[a], true) || std::mem::replace(&mut seen_b[b], true) {
            return Err(Error::AlignmentError(format!("pair ({a}, {b}) reuses a node")));
        }
        if detected[a].len() != reference[b].len() {
            return Err(Error::AlignmentError(format!("pair ({a}, {b}) has mismatched dimensions")));
        }
        rows.push((&detected[a], &reference[b]));
    }
    let dim = rows[0].0.len();
    if dim == 0 || rows.iter().any(|(x, _)| x.len() != dim) {
        return Err(Error::AlignmentError("feature rows must share a positive dimension".into()));
    }
    let (lo, hi) = rows
        .iter()
        .flat_map(|(x, y)| x.iter().chain(y.iter()))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range == 0.0 {
        return Ok(0.0);
    }
    let total: f64 = rows
        .iter()
        .map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p - q).abs()).sum::<f64>())
        .sum();
    Ok(total / (rows.len() as f64 * dim as f64 * range))
}

/// Node inputs the classification stage receives for `g`.
fn stage_inputs(model: &ModularModel, g: &AnnotatedGraph) -> Result<Vec<Vec<f64>>> {
    match (&model.stage, &model.backbone) {
        (Stage::Gin(p), Some(backbone)) if !p.switches.cf => backbone.embed(g, None, None),
        _ => Ok(g.features().to_vec()),
    }
}

/// Feature distance between what the classifier sees for the ground-truth
/// nodes inside the full graph and inside the ground-truth subgraph alone,
/// averaged over graphs.
pub fn lambda_feat_split(model: &ModularModel, graphs: &[AnnotatedGraph]) -> Result<f64> {
    nonempty(graphs)?;
    let mut total = 0.0;
    for g in graphs {
        let gt = ground_truth(g)?;
        let expl = Explanation::new(g, gt, &[])?;
        let nodes = expl.nodes();
        let sub = expl.to_graph();
        let in_context = stage_inputs(model, g)?;
        let alone = stage_inputs(model, &sub)?;
        let alignment: Vec<_> = nodes.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        total += lambda_feat(&in_context, &alone, &alignment)?;
    }
    Ok(total / graphs.len() as f64)
}

fn label(g: &AnnotatedGraph) -> Result<usize> {
    g.graph_label().ok_or(Error::MissingLabel)
}

/// Mean sufficiency of the ground-truth subgraph under `spec` with the
/// likelihood of the true label as divergence. Graphs whose perturbable side
/// is empty are skipped and counted.
pub fn lambda_suff_counted<C: Classifier + ?Sized>(
    model: &C,
    graphs: &[AnnotatedGraph],
    spec: &PerturbationSpec,
    params: &MetricParams,
    stream: u64,
) -> Result<(f64, usize)> {
    nonempty(graphs)?;
    if spec.side != Side::RFixed {
        return Err(Error::InvalidParameter("sufficiency keeps the explanation fixed".into()));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    let mut failures = 0usize;
    for (i, g) in graphs.iter().enumerate() {
        let local = MetricParams {
            divergence: Divergence::PredLikelihood { class: Some(label(g)?) },
            ..params.clone()
        };
        match expectation(model, g, ground_truth(g)?, None, spec, &local, stream + i as u64, 0) {
            Ok(e) => {
                total += e.value;
                used += 1;
            }
            Err(Error::NothingToPerturb) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(Error::NothingToPerturb);
    }
    Ok((total / used as f64, failures))
}

pub fn lambda_suff<C: Classifier + ?Sized>(
    model: &C,
    graphs: &[AnnotatedGraph],
    spec: &PerturbationSpec,
    params: &MetricParams,
) -> Result<f64> {
    lambda_suff_counted(model, graphs, spec, params, 0).map(|(v, _)| v)
}

fn mean_likelihood<C: Classifier + ?Sized>(model: &C, graphs: &[AnnotatedGraph]) -> Result<f64> {
    nonempty(graphs)?;
    let mut total = 0.0;
    for g in graphs {
        total += model.evaluate(g, None)?.prob(label(g)?);
    }
    Ok(total / graphs.len() as f64)
}

/// `|mean_id p(y|G) − mean_ood p(y|G)|` with ground-truth labels `y`.
pub fn likelihood_gap<C: Classifier + ?Sized>(model: &C, id: &[AnnotatedGraph], ood: &[AnnotatedGraph]) -> Result<f64> {
    Ok((mean_likelihood(model, id)? - mean_likelihood(model, ood)?).abs())
}

/// Every term of the bound for one modular model.
pub fn bound_report(
    model: &ModularModel,
    id: &[AnnotatedGraph],
    ood: &[AnnotatedGraph],
    spec: &PerturbationSpec,
    params: &MetricParams,
) -> Result<BoundReport> {
    let (suff_id, fail_id) = lambda_suff_counted(model, id, spec, params, 0)?;
    let (suff_ood, fail_ood) = lambda_suff_counted(model, ood, spec, params, OOD_STREAM)?;
    Ok(BoundReport {
        lhs: likelihood_gap(model, id, ood)?,
        lambda_topo_id: lambda_topo(model.detector.as_ref(), id)?,
        lambda_topo_ood: lambda_topo(model.detector.as_ref(), ood)?,
        lambda_feat_id: lambda_feat_split(model, id)?,
        lambda_feat_ood: lambda_feat_split(model, ood)?,
        lambda_suff_id: suff_id,
        lambda_suff_ood: suff_ood,
        id_count: id.len(),
        ood_count: ood.len(),
        failures: fail_id + fail_ood,
    })
}

/// Searches for a complement perturbation that moves the model's output by at
/// least `tau` while the detector recovers the ground truth exactly (after
/// binarizing at 0.5). `true` means the prediction is not domain invariant.
pub fn leak_witness_check<R: Rng + ?Sized>(
    model: &ModularModel,
    g: &AnnotatedGraph,
    spec: &PerturbationSpec,
    sigma: usize,
    tau: f64,
    rng: &mut R,
) -> Result<bool> {
    let gt = ground_truth(g)?;
    let detected = threshold_binarize(&model.detector.detect(g)?, 0.5)?;
    let w = wiou(&detected, gt)?;
    if w != 1.0 {
        return Err(Error::NotMaximallyPlausible(w));
    }
    test_nonstrict_sufficiency(model, g, gt, None, spec, &Divergence::L1, sigma, tau, rng)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationRow {
    pub name: String,
    pub wiou: f64,
    pub faith: f64,
    /// `wiou × faith`.
    pub combined: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationOutcome {
    /// Pearson correlation of the combined score with the likelihood gap;
    /// negative when better explanations come with smaller gaps.
    pub pearson: f64,
    pub rows: Vec<CorrelationRow>,
}

/// Per-model mean plausibility and best-ratio faithfulness on the ID split,
/// their product, and the ID/OOD likelihood gap.
pub fn correlation_experiment(
    models: &[(String, ModularModel)],
    id: &[AnnotatedGraph],
    ood: &[AnnotatedGraph],
    suf_spec: &PerturbationSpec,
    nec_spec: &PerturbationSpec,
    params: &MetricParams,
) -> Result<CorrelationOutcome> {
    if models.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 models".into()));
    }
    nonempty(id)?;
    let mut rows = Vec::with_capacity(models.len());
    for (name, model) in models {
        let mut w = 0.0;
        let mut f = 0.0;
        let mut counted = 0usize;
        for (i, g) in id.iter().enumerate() {
            let scores = model.detector.detect(g)?;
            w += wiou(&scores, ground_truth(g)?)?;
            if let Ok((_, v)) = faith_best(model, g, &scores, None, suf_spec, nec_spec, params, i as u64) {
                f += v.faith;
                counted += 1;
            }
        }
        let wiou = w / id.len() as f64;
        let faith = if counted == 0 { 0.0 } else { f / counted as f64 };
        rows.push(CorrelationRow {
            name: name.clone(),
            wiou,
            faith,
            combined: wiou * faith,
            gap: likelihood_gap(model, id, ood)?,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.combined).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    Ok(CorrelationOutcome {
        pearson: pearson(&xs, &ys)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ConstantDetector, GroundTruthDetector};

    fn house_on_path() -> AnnotatedGraph {
        let mut pairs = vec![(0, 1), (1, 2)];
        pairs.extend([(3, 4), (4, 5), (5, 6), (6, 3), (7, 3), (7, 4)]);
        pairs.push((2, 3));
        let mut gt = vec![false; 2];
        gt.extend([true; 6]);
        gt.push(false);
        AnnotatedGraph::from_pairs(8, &pairs)
            .unwrap()
            .with_graph_label(Some(0))
            .with_ground_truth(Some(EdgeMask::from_bits(&gt)))
            .unwrap()
    }

    #[test]
    fn lambda_topo_examples() {
        let gs = [house_on_path()];
        assert_eq!(lambda_topo(&GroundTruthDetector::ideal(), &gs).unwrap(), 0.0);
        assert_eq!(lambda_topo(&ConstantDetector { score: 0.0 }, &gs).unwrap(), 1.0);
        // wiou = 6 / (6 + 3 · 2/3) = 0.75
        let d = GroundTruthDetector::leaky(2.0 / 3.0);
        assert!((lambda_topo(&d, &gs).unwrap() - 0.25).abs() < 1e-15);
        let bare = AnnotatedGraph::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(lambda_topo(&d, &[bare]), Err(Error::MissingGroundTruth));
    }

    #[test]
    fn lambda_feat_examples() {
        let ones = vec![vec![1.0; 3]; 2];
        let zeros = vec![vec![0.0; 3]; 2];
        let align = [(0, 0), (1, 1)];
        assert_eq!(lambda_feat(&ones, &ones, &align).unwrap(), 0.0);
        assert_eq!(lambda_feat(&ones, &zeros, &align).unwrap(), 1.0);
        let half = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let flipped = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(lambda_feat(&half, &flipped, &align).unwrap(), 0.5);
        assert!(matches!(lambda_feat(&ones, &ones, &[(0, 0), (0, 1)]), Err(Error::AlignmentError(_))));
        assert!(matches!(lambda_feat(&ones, &ones, &[(2, 0)]), Err(Error::AlignmentError(_))));
    }

    #[test]
    fn likelihood_gap_of_identical_splits_is_zero() {
        let gs = [house_on_path()];
        let m = crate::models::MotifClassifier::single();
        assert_eq!(likelihood_gap(&m, &gs, &gs).unwrap(), 0.0);
        let unlabeled = [house_on_path().with_graph_label(None)];
        assert_eq!(likelihood_gap(&m, &gs, &unlabeled), Err(Error::MissingLabel));
    }
}
