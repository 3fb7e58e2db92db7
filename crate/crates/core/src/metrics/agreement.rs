//! Plausibility, stability and correlation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{topk_binarize, AnnotatedGraph, Edge, EdgeMask};
use crate::metrics::MetricParams;
use crate::models::Detector;
use crate::perturb::{sample, PerturbationSpec, Side};
use crate::seed::task_rng;

/// Weighted Jaccard similarity `Σ min(s, g) / Σ max(s, g)`.
pub fn wiou(scores: &EdgeMask, ground_truth: &EdgeMask) -> Result<f64> {
    if scores.len() != ground_truth.len() {
        return Err(Error::ShapeError("masks cover different edge sets".into()));
    }
    if !ground_truth.is_binary() {
        return Err(Error::InvalidMask);
    }
    if ground_truth.count_selected() == 0 {
        return Err(Error::UndefinedPlausibility);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (&s, &t) in scores.scores().iter().zip(ground_truth.scores()) {
        num += s.min(t);
        den += s.max(t);
    }
    Ok(num / den)
}

/// Matthews correlation of two binary masks; 0 when a marginal is empty.
pub fn mcc(a: &EdgeMask, b: &EdgeMask) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeError("masks must share a non-empty domain".into()));
    }
    let (a, b) = (a.bits()?, b.bits()?);
    let (mut tp, mut tn, mut fp, mut fn_) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(&b) {
        match (x, y) {
            (true, true) => tp += 1.0,
            (false, false) => tn += 1.0,
            (false, true) => fp += 1.0,
            (true, false) => fn_ += 1.0,
        }
    }
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((tp * tn - fp * fn_) / den)
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::ShapeError("need two equally long series of length ≥ 2".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// MCC between the clean binarized explanation and the one obtained after
/// perturbing the complement, averaged over `q1` perturbations and the
/// stability ratios. Only edges present in both graphs are compared. When the
/// graph has a ground truth the perturbation keeps it intact; otherwise it
/// keeps the clean explanation at each ratio.
pub fn stability<D: Detector + ?Sized>(
    detector: &D,
    g: &AnnotatedGraph,
    spec: &PerturbationSpec,
    params: &MetricParams,
    graph_index: u64,
) -> Result<f64> {
    if spec.side != Side::RFixed {
        return Err(Error::InvalidParameter("stability perturbs the complement".into()));
    }
    let clean = detector.detect(g)?;
    clean.check_domain(g)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for (ri, &ratio) in params.stability_ratios.iter().enumerate() {
        let before = topk_binarize(&clean, ratio)?;
        let keep = match g.ground_truth() {
            Some(gt) => gt.clone(),
            None => before.clone(),
        };
        for s in 0..params.q1 {
            let mut rng = task_rng(spec.seed, graph_index, ri as u64, s as u64);
            let out = sample(spec, g, &keep, &mut rng)?;
            let after_scores = detector.detect(&out.graph)?;
            after_scores.check_domain(&out.graph)?;
            let after = topk_binarize(&after_scores, ratio)?;
            // edge of the sample -> position, keyed by original endpoints
            let inverse: HashMap<usize, usize> = (0..g.node_count())
                .filter_map(|u| out.map_node(u).map(|v| (v, u)))
                .collect();
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (j, e) in out.graph.edges().iter().enumerate() {
                let (x, y) = e.endpoints();
                let (Some(&ox), Some(&oy)) = (inverse.get(&x), inverse.get(&y)) else {
                    continue;
                };
                if let Some(i) = g.edge_index(Edge::new(ox, oy)) {
                    a.push(before.score(i) == 1.0);
                    b.push(after.score(j) == 1.0);
                }
            }
            if a.is_empty() {
                continue;
            }
            total += mcc(&EdgeMask::from_bits(&a), &EdgeMask::from_bits(&b))?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NothingToPerturb);
    }
    Ok(total / count as f64)
}
