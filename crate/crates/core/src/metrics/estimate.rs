use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{topk_binarize, AnnotatedGraph, EdgeMask, LabelDistribution};
use crate::metrics::Divergence;
use crate::models::Classifier;
use crate::perturb::{enumerate_support, sample, support_size, PerturbationSpec, Side, SUPPORT_CAP};
use crate::seed::task_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimationMode {
    /// Exact when the support has at most [`EXACT_AUTO_LIMIT`] elements.
    Auto,
    Exact,
    MonteCarlo,
}

pub const EXACT_AUTO_LIMIT: u128 = 1 << 12;

/// Estimation protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricParams {
    /// Perturbations drawn per graph.
    pub q1: usize,
    /// Graphs evaluated per dataset.
    pub q2: usize,
    pub topk_ratios: Vec<f64>,
    /// Budget as a fraction of the dataset's mean edge count.
    pub budget_ratio: f64,
    pub divergence: Divergence,
    pub seed: u64,
    pub mode: EstimationMode,
    pub bernoulli_keep: f64,
    pub stability_ratios: Vec<f64>,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            q1: 8,
            q2: 800,
            topk_ratios: vec![0.3, 0.6, 0.9],
            budget_ratio: 0.05,
            divergence: Divergence::L1,
            seed: 0,
            mode: EstimationMode::Auto,
            bernoulli_keep: 0.7,
            stability_ratios: vec![0.3, 0.6],
        }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        if self.q1 == 0 || self.q2 == 0 {
            return Err(Error::InvalidParameter("q1 and q2 must be at least 1".into()));
        }
        for &r in self.topk_ratios.iter().chain(&self.stability_ratios) {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidParameter(format!("ratio {r} not in (0, 1]")));
            }
        }
        if self.topk_ratios.is_empty() {
            return Err(Error::InvalidParameter("no topk ratios".into()));
        }
        if !(self.budget_ratio > 0.0) {
            return Err(Error::InvalidParameter("budget ratio must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.bernoulli_keep) {
            return Err(Error::InvalidParameter("keep probability not in [0, 1]".into()));
        }
        self.divergence.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub exact: bool,
    /// Support size in exact mode, sample count otherwise.
    pub evaluations: usize,
    pub clamped: bool,
}

/// Expected `d(p(G), p(G'))` for `G' ~ spec`, with per-sample generators
/// derived from `(spec.seed, graph_index, ratio_index, sample)`.
#[allow(clippy::too_many_arguments)]
pub fn expectation<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    spec: &PerturbationSpec,
    params: &MetricParams,
    graph_index: u64,
    ratio_index: u64,
) -> Result<Estimate> {
    let exact = match params.mode {
        EstimationMode::Exact => true,
        EstimationMode::MonteCarlo => false,
        EstimationMode::Auto => support_size(spec, g, mask)? <= EXACT_AUTO_LIMIT,
    };
    let d = &params.divergence;
    if exact {
        exact_expectation(model, g, mask, target, spec, d)
    } else {
        let (value, _, clamped) = monte_carlo(model, g, mask, target, spec, d, params.q1, graph_index, ratio_index)?;
        Ok(Estimate {
            value,
            exact: false,
            evaluations: params.q1,
            clamped,
        })
    }
}

/// Exact expectation over the enumerated support. Outcomes are grouped by
/// divergence value and summed as `Σ v · P(Δ = v)` in ascending `v`, so two
/// supports inducing the same law of `Δ` give the same number.
pub fn exact_expectation<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    spec: &PerturbationSpec,
    d: &Divergence,
) -> Result<Estimate> {
    let base = model.evaluate(g, target)?;
    let support = enumerate_support(spec, g, mask, SUPPORT_CAP)?;
    let mut law: BTreeMap<u64, f64> = BTreeMap::new();
    let mut clamped = false;
    for (s, p) in &support {
        clamped |= s.clamped;
        let v = d.eval(&base, &model.evaluate(&s.graph, s.map_target(target)?)?)?;
        // non-negative floats order like their bit patterns
        *law.entry(v.to_bits()).or_insert(0.0) += p;
    }
    let value = law.iter().map(|(&bits, &p)| f64::from_bits(bits) * p).sum();
    Ok(Estimate {
        value,
        exact: true,
        evaluations: support.len(),
        clamped,
    })
}

/// Monte Carlo mean and sample standard deviation of `Δ` over `n` draws.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    spec: &PerturbationSpec,
    d: &Divergence,
    n: usize,
    graph_index: u64,
    ratio_index: u64,
) -> Result<(f64, f64, bool)> {
    if n == 0 {
        return Err(Error::InvalidParameter("no samples requested".into()));
    }
    let base: LabelDistribution = model.evaluate(g, target)?;
    let mut values = Vec::with_capacity(n);
    let mut clamped = false;
    for s in 0..n {
        let mut rng = task_rng(spec.seed, graph_index, ratio_index, s as u64);
        let out = sample(spec, g, mask, &mut rng)?;
        clamped |= out.clamped;
        values.push(d.eval(&base, &model.evaluate(&out.graph, out.map_target(target)?)?)?);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok((mean, var.sqrt(), clamped))
}

fn require_side(spec: &PerturbationSpec, side: Side) -> Result<()> {
    if spec.side != side {
        return Err(Error::InvalidParameter(format!(
            "spec keeps {:?} but the metric needs {side:?}",
            spec.side
        )));
    }
    Ok(())
}

/// Raw degree of sufficiency: expected divergence when the complement is
/// perturbed and the explanation kept.
pub fn suf_raw<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    spec: &PerturbationSpec,
    params: &MetricParams,
) -> Result<f64> {
    require_side(spec, Side::RFixed)?;
    expectation(model, g, mask, target, spec, params, 0, 0).map(|e| e.value)
}

/// Raw degree of necessity: expected divergence when the explanation is
/// perturbed and the complement kept.
pub fn nec_raw<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    spec: &PerturbationSpec,
    params: &MetricParams,
) -> Result<f64> {
    require_side(spec, Side::CFixed)?;
    expectation(model, g, mask, target, spec, params, 0, 0).map(|e| e.value)
}

fn check_raw(raw: f64) -> Result<()> {
    if raw.is_nan() || raw < 0.0 {
        return Err(Error::InvalidRaw(raw));
    }
    Ok(())
}

/// `exp(−raw)`: 1 for a strictly sufficient explanation.
pub fn normalize_suf(raw: f64) -> Result<f64> {
    check_raw(raw)?;
    Ok((-raw).exp())
}

/// `1 − exp(−raw)`: 0 when perturbing the explanation never matters.
pub fn normalize_nec(raw: f64) -> Result<f64> {
    check_raw(raw)?;
    Ok(-(-raw).exp_m1())
}

/// Harmonic mean of normalized sufficiency and necessity.
pub fn faith(suf_n: f64, nec_n: f64) -> f64 {
    if suf_n + nec_n == 0.0 {
        0.0
    } else {
        2.0 * suf_n * nec_n / (suf_n + nec_n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaithValue {
    pub suf_raw: f64,
    pub nec_raw: f64,
    pub suf_n: f64,
    pub nec_n: f64,
    pub faith: f64,
}

impl FaithValue {
    pub fn from_raw(suf_raw: f64, nec_raw: f64) -> Result<Self> {
        let suf_n = normalize_suf(suf_raw)?;
        let nec_n = normalize_nec(nec_raw)?;
        Ok(FaithValue {
            suf_raw,
            nec_raw,
            suf_n,
            nec_n,
            faith: faith(suf_n, nec_n),
        })
    }
}

/// Sufficiency, necessity and faithfulness of one binary explanation.
#[allow(clippy::too_many_arguments)]
pub fn faith_at<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    suf_spec: &PerturbationSpec,
    nec_spec: &PerturbationSpec,
    params: &MetricParams,
    graph_index: u64,
    ratio_index: u64,
) -> Result<FaithValue> {
    require_side(suf_spec, Side::RFixed)?;
    require_side(nec_spec, Side::CFixed)?;
    let s = expectation(model, g, mask, target, suf_spec, params, graph_index, ratio_index)?;
    let n = expectation(model, g, mask, target, nec_spec, params, graph_index, ratio_index)?;
    FaithValue::from_raw(s.value, n.value)
}

/// Binarizes `scores` at every configured top-k ratio and returns the ratio
/// with the highest faithfulness (smallest ratio on ties). Ratios whose
/// evaluation fails are skipped; if all fail the last error is returned.
#[allow(clippy::too_many_arguments)]
pub fn faith_best<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    scores: &EdgeMask,
    target: Option<usize>,
    suf_spec: &PerturbationSpec,
    nec_spec: &PerturbationSpec,
    params: &MetricParams,
    graph_index: u64,
) -> Result<(f64, FaithValue)> {
    let mut order: Vec<(usize, f64)> = params.topk_ratios.iter().copied().enumerate().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best: Option<(f64, FaithValue)> = None;
    let mut last_err = Error::InvalidParameter("no topk ratios".into());
    for (ri, ratio) in order {
        let result = topk_binarize(scores, ratio).and_then(|mask| {
            faith_at(model, g, &mask, target, suf_spec, nec_spec, params, graph_index, ri as u64)
        });
        match result {
            Ok(v) => {
                if best.as_ref().is_none_or(|(_, b)| v.faith > b.faith) {
                    best = Some((ratio, v));
                }
            }
            Err(e) => last_err = e,
        }
    }
    best.ok_or(last_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_suf(0.0).unwrap(), 1.0);
        assert_eq!(normalize_nec(0.0).unwrap(), 0.0);
        assert!((normalize_suf(std::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(normalize_suf(f64::INFINITY).unwrap(), 0.0);
        assert_eq!(normalize_nec(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(normalize_suf(-1e-9), Err(Error::InvalidRaw(-1e-9)));
    }

    #[test]
    fn faith_examples() {
        assert_eq!(faith(1.0, 1.0), 1.0);
        assert_eq!(faith(0.0, 0.7), 0.0);
        assert_eq!(faith(0.0, 0.0), 0.0);
        assert!((faith(0.8, 0.4) - 8.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn default_protocol() {
        let p = MetricParams::default();
        assert_eq!((p.q1, p.q2, p.budget_ratio), (8, 800, 0.05));
        assert_eq!(p.topk_ratios, vec![0.3, 0.6, 0.9]);
        assert_eq!(p.divergence, Divergence::L1);
        assert!(p.validate().is_ok());
    }
}
