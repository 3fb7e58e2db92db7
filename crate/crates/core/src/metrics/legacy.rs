//! Fidelity-style metrics computed directly, each matching one
//! (divergence, perturbation) choice of the general estimator.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{AnnotatedGraph, EdgeMask, LabelDistribution};
use crate::metrics::{expectation, Divergence, EstimationMode, MetricParams, EXACT_AUTO_LIMIT};
use crate::models::Classifier;
use crate::perturb::{Family, PerturbationSpec, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LegacyMetric {
    Unf,
    FidMinus,
    FidPlus,
    RfidMinus,
    RfidPlus,
    Ps,
    Pn,
}

impl LegacyMetric {
    pub const ALL: [LegacyMetric; 7] = [
        LegacyMetric::Unf,
        LegacyMetric::FidMinus,
        LegacyMetric::FidPlus,
        LegacyMetric::RfidMinus,
        LegacyMetric::RfidPlus,
        LegacyMetric::Ps,
        LegacyMetric::Pn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LegacyMetric::Unf => "unf",
            LegacyMetric::FidMinus => "fid-",
            LegacyMetric::FidPlus => "fid+",
            LegacyMetric::RfidMinus => "rfid-",
            LegacyMetric::RfidPlus => "rfid+",
            LegacyMetric::Ps => "ps",
            LegacyMetric::Pn => "pn",
        }
    }

    /// The side kept fixed: the `-`/sufficiency variants keep the explanation.
    pub fn side(self) -> Side {
        match self {
            LegacyMetric::Unf | LegacyMetric::FidMinus | LegacyMetric::RfidMinus | LegacyMetric::Ps => Side::RFixed,
            LegacyMetric::FidPlus | LegacyMetric::RfidPlus | LegacyMetric::Pn => Side::CFixed,
        }
    }

    /// The equivalent divergence and perturbation for the general estimator.
    pub fn as_spec(self, params: &MetricParams, target: Option<usize>) -> (Divergence, PerturbationSpec) {
        let (d, family) = match self {
            LegacyMetric::Unf => (Divergence::kl(), Family::ZeroFeatures),
            LegacyMetric::FidMinus | LegacyMetric::FidPlus => {
                (Divergence::PredLikelihood { class: None }, Family::DeleteAndZero)
            }
            LegacyMetric::RfidMinus | LegacyMetric::RfidPlus => (
                Divergence::PredLikelihood { class: None },
                Family::Bernoulli {
                    keep: params.bernoulli_keep,
                },
            ),
            LegacyMetric::Ps | LegacyMetric::Pn => (Divergence::PredChange, Family::SoftScale),
        };
        let spec = PerturbationSpec::new(self.side(), family)
            .with_seed(params.seed)
            .protect(target);
        (d, spec)
    }
}

impl fmt::Display for LegacyMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LegacyMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LegacyMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown legacy metric `{s}`")))
    }
}

fn argmax(p: &LabelDistribution) -> usize {
    p.argmax()
}

fn likelihood_gap(p: &LabelDistribution, q: &LabelDistribution) -> f64 {
    let y = argmax(p);
    (p.prob(y) - q.prob(y)).abs()
}

/// Is edge `e` on the side this metric perturbs?
fn on_perturbed_side(metric: LegacyMetric, selected: bool) -> bool {
    match metric.side() {
        Side::RFixed => !selected,
        Side::CFixed => selected,
    }
}

fn zeroed_features(g: &AnnotatedGraph, touched: &[bool], target: Option<usize>) -> Vec<Vec<f64>> {
    (0..g.node_count())
        .map(|u| {
            let nb = g.neighbors(u);
            let zero = Some(u) != target && !nb.is_empty() && nb.iter().all(|&(_, e)| touched[e]);
            if zero {
                vec![0.0; g.feature_dim()]
            } else {
                g.features()[u].clone()
            }
        })
        .collect()
}

/// Largest number of perturbed edges enumerated exactly for the randomized
/// fidelities; beyond it they fall back to Monte Carlo. `Auto` stops at the
/// usual exact support limit.
const RFID_EXACT_EDGES: usize = 20;
const RFID_AUTO_EDGES: usize = EXACT_AUTO_LIMIT.trailing_zeros() as usize;

/// Computes a legacy metric for binary `mask` (soft scores for `ps`/`pn`).
pub fn legacy_metric<C: Classifier + ?Sized>(
    metric: LegacyMetric,
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    params: &MetricParams,
) -> Result<f64> {
    mask.check_domain(g)?;
    let p = model.evaluate(g, target)?;
    match metric {
        LegacyMetric::Ps | LegacyMetric::Pn => {
            let features = (0..g.node_count())
                .map(|u| {
                    let nb = g.neighbors(u);
                    if nb.is_empty() || Some(u) == target {
                        return g.features()[u].clone();
                    }
                    let mut factor: f64 = 0.0;
                    for &(_, e) in nb {
                        let s = mask.score(e);
                        factor = factor.max(if metric == LegacyMetric::Ps { s } else { 1.0 - s });
                    }
                    g.features()[u].iter().map(|x| x * factor).collect()
                })
                .collect();
            let q = model.evaluate(&g.with_features(features)?, target)?;
            Ok(f64::from(u8::from(argmax(&p) != argmax(&q))))
        }
        _ => {
            let bits = mask.bits()?;
            let touched: Vec<bool> = bits.iter().map(|&b| on_perturbed_side(metric, b)).collect();
            match metric {
                LegacyMetric::Unf => {
                    let q = model.evaluate(&g.with_features(zeroed_features(g, &touched, target))?, target)?;
                    Divergence::kl().eval(&p, &q)
                }
                LegacyMetric::FidMinus | LegacyMetric::FidPlus => {
                    let features = zeroed_features(g, &touched, target);
                    let h = g.without_edges(&touched).with_features(features)?;
                    Ok(likelihood_gap(&p, &model.evaluate(&h, target)?))
                }
                _ => {
                    let idx: Vec<usize> = (0..touched.len()).filter(|&i| touched[i]).collect();
                    let limit = match params.mode {
                        EstimationMode::Auto => RFID_AUTO_EDGES,
                        _ => RFID_EXACT_EDGES,
                    };
                    if idx.len() > limit || params.mode == EstimationMode::MonteCarlo {
                        let (d, spec) = metric.as_spec(params, target);
                        let local = MetricParams {
                            divergence: d,
                            mode: EstimationMode::MonteCarlo,
                            ..params.clone()
                        };
                        return expectation(model, g, mask, target, &spec, &local, 0, 0).map(|e| e.value);
                    }
                    let keep = params.bernoulli_keep;
                    let mut total = 0.0;
                    for subset in 0u64..(1u64 << idx.len()) {
                        let mut drop = vec![false; g.edge_count()];
                        let mut prob = 1.0;
                        for (j, &e) in idx.iter().enumerate() {
                            if subset >> j & 1 == 1 {
                                drop[e] = true;
                                prob *= 1.0 - keep;
                            } else {
                                prob *= keep;
                            }
                        }
                        if prob == 0.0 {
                            continue;
                        }
                        total += prob * likelihood_gap(&p, &model.evaluate(&g.without_edges(&drop), target)?);
                    }
                    Ok(total)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LineToy;

    #[test]
    fn unf_with_everything_relevant_is_zero() {
        let g = AnnotatedGraph::new(
            3,
            vec![(0, 1).into(), (1, 2).into()],
            vec![vec![-0.3, 0.2], vec![0.5, -0.1], vec![-0.7, 0.9]],
        )
        .unwrap();
        let toy = LineToy::new(2);
        let v = legacy_metric(LegacyMetric::Unf, &toy, &g, &EdgeMask::ones(2), Some(0), &MetricParams::default());
        assert_eq!(v.unwrap(), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for m in LegacyMetric::ALL {
            assert_eq!(m.name().parse::<LegacyMetric>().unwrap(), m);
        }
    }
}
