//! Closed forms and brute-force checks used as ground truth for the
//! estimators.

use std::ops::RangeInclusive;
use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{l_hop_neighborhood, AnnotatedGraph, EdgeMask};
use crate::metrics::Divergence;
use crate::models::{Classifier, Locality};
use crate::perturb::{enumerate_support, sample, Combinations, Family, PerturbationSpec, Side, SUPPORT_CAP};

/// Exact `C(n, k)` for `0 ≤ k ≤ n ≤ 64`.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n || n > 64 {
        return Err(Error::Overflow(n, k));
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow(n, k))
}

/// Outcomes of deleting `b` of `m_r` explanation edges, `r` of which are
/// truly relevant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HitStatistics {
    /// Number of `b`-subsets.
    pub support_size: u64,
    /// Subsets containing at least one relevant edge.
    pub hit_count: u64,
    pub probability: Ratio<u64>,
}

impl HitStatistics {
    fn new(support_size: u64, hit_count: u64) -> Self {
        HitStatistics {
            support_size,
            hit_count,
            probability: Ratio::new(hit_count, support_size),
        }
    }

    pub fn probability_f64(&self) -> f64 {
        *self.probability.numer() as f64 / *self.probability.denom() as f64
    }
}

fn check_hit_args(m_r: u64, r: u64, b: u64) -> Result<()> {
    if r > m_r || b == 0 || b > m_r {
        return Err(Error::InvalidParameter(format!(
            "need 0 ≤ r ≤ m and 1 ≤ b ≤ m, got m = {m_r}, r = {r}, b = {b}"
        )));
    }
    Ok(())
}

/// `|S| = C(m, b)` and `|A| = Σ_{c=1}^{min(b,r)} C(r, c) C(m − r, b − c)`.
pub fn hit_stats_budget(m_r: u64, r: u64, b: u64) -> Result<HitStatistics> {
    check_hit_args(m_r, r, b)?;
    let support = binomial(m_r, b)?;
    let mut hits: u64 = 0;
    for c in 1..=b.min(r) {
        if b - c > m_r - r {
            continue;
        }
        hits += binomial(r, c)? * binomial(m_r - r, b - c)?;
    }
    Ok(HitStatistics::new(support, hits))
}

/// Brute-force counterpart of [`hit_stats_budget`]: edges `0..r` are the
/// relevant ones.
pub fn hit_stats_enumerated(m_r: u64, r: u64, b: u64) -> Result<HitStatistics> {
    check_hit_args(m_r, r, b)?;
    if m_r > 24 {
        return Err(Error::SupportTooLarge {
            size: 1u128 << m_r,
            cap: 1 << 24,
        });
    }
    let (mut support, mut hits) = (0u64, 0u64);
    for combo in Combinations::new(m_r as usize, b as usize) {
        support += 1;
        if combo.iter().any(|&e| (e as u64) < r) {
            hits += 1;
        }
    }
    Ok(HitStatistics::new(support, hits))
}

/// Probability that independent deletions with keep probability `kappa`
/// remove at least one of `r` relevant edges: `1 − κ^r`.
pub fn hit_prob_bernoulli(r: u32, kappa: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!("keep probability {kappa} not in [0, 1]")));
    }
    Ok(1.0 - kappa.powi(r as i32))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetRule {
    /// `b = max(1, floor(ρ · m))` for an explanation with `m` edges.
    Fraction(f64),
    /// The same `b` for every explanation (clamped to `m`).
    Fixed(u64),
}

impl BudgetRule {
    pub fn budget(&self, m_r: u64) -> u64 {
        match *self {
            // the nudge keeps e.g. 0.1 * 30 at 3 rather than 2.9999999999999996
            BudgetRule::Fraction(rho) => ((rho * m_r as f64 + 1e-9).floor() as u64).max(1).min(m_r),
            BudgetRule::Fixed(b) => b.min(m_r),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub irrelevant: u64,
    pub budget: u64,
    pub probability: Ratio<u64>,
}

impl CurvePoint {
    pub fn probability_f64(&self) -> f64 {
        *self.probability.numer() as f64 / *self.probability.denom() as f64
    }
}

/// Hit probability for `r` relevant edges as irrelevant ones are added.
pub fn budget_probability_curve(
    r: u64,
    irrelevant: RangeInclusive<u64>,
    rule: BudgetRule,
) -> Result<Vec<CurvePoint>> {
    if r == 0 {
        return Err(Error::InvalidParameter("need at least one relevant edge".into()));
    }
    if let BudgetRule::Fraction(rho) = rule {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("fraction {rho} not in (0, 1]")));
        }
    }
    irrelevant
        .map(|i| {
            let m = r + i;
            let b = rule.budget(m);
            if b == 0 {
                return Err(Error::InvalidParameter("budget rule yields zero deletions".into()));
            }
            Ok(CurvePoint {
                irrelevant: i,
                budget: b,
                probability: hit_stats_budget(m, r, b)?.probability,
            })
        })
        .collect()
}

/// Edge indices whose messages can reach the prediction.
pub fn computational_graph<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    target: Option<usize>,
) -> Result<Vec<usize>> {
    match (target, model.locality()) {
        (Some(u), Locality::Local(l)) => {
            let hood = l_hop_neighborhood(g, u, l)?;
            Ok((0..g.edge_count())
                .filter(|&i| {
                    let (a, b) = g.edges()[i].endpoints();
                    hood.contains(&a) && hood.contains(&b)
                })
                .collect())
        }
        _ => Ok((0..g.edge_count()).collect()),
    }
}

/// Largest edge count the exhaustive checks accept.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 16;

/// Deviation treated as "no change".
pub const STRICT_TOLERANCE: f64 = 1e-12;

fn side_indices(mask: &EdgeMask, selected: bool) -> Result<Vec<usize>> {
    let bits = mask.bits()?;
    Ok((0..bits.len()).filter(|&i| bits[i] == selected).collect())
}

fn check_exhaustive(g: &AnnotatedGraph, mask: &EdgeMask) -> Result<()> {
    mask.check_domain(g)?;
    if g.edge_count() > EXHAUSTIVE_EDGE_LIMIT {
        return Err(Error::SupportTooLarge {
            size: 1u128 << g.edge_count(),
            cap: 1 << EXHAUSTIVE_EDGE_LIMIT,
        });
    }
    Ok(())
}

/// Calls `visit` with every non-empty deletion of the edges in `idx`; stops
/// as soon as `visit` returns `false`.
fn for_each_deletion(
    g: &AnnotatedGraph,
    idx: &[usize],
    mut visit: impl FnMut(&AnnotatedGraph) -> Result<bool>,
) -> Result<bool> {
    for subset in 1u32..(1u32 << idx.len()) {
        let mut drop = vec![false; g.edge_count()];
        for (j, &e) in idx.iter().enumerate() {
            drop[e] = subset >> j & 1 == 1;
        }
        if !visit(&g.without_edges(&drop))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sufficiency half of [`strict_faithfulness_exhaustive`], stopping at the
/// first deletion that moves the output.
pub fn strictly_sufficient<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
) -> Result<bool> {
    check_exhaustive(g, mask)?;
    let base = model.evaluate(g, target)?;
    for_each_deletion(g, &side_indices(mask, false)?, |h| {
        Ok(Divergence::L1.eval(&base, &model.evaluate(h, target)?)? <= STRICT_TOLERANCE)
    })
}

/// Checks every deletion-only perturbation: sufficient iff no deletion of
/// complement edges moves the output, necessary iff every deletion of
/// explanation edges does. Output changes are measured in L1.
pub fn strict_faithfulness_exhaustive<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
) -> Result<(bool, bool)> {
    let sufficient = strictly_sufficient(model, g, mask, target)?;
    let base = model.evaluate(g, target)?;
    let necessary = for_each_deletion(g, &side_indices(mask, true)?, |h| {
        Ok(Divergence::L1.eval(&base, &model.evaluate(h, target)?)? > STRICT_TOLERANCE)
    })?;
    Ok((sufficient, necessary))
}

/// Draws up to `sigma` perturbations from `spec` and reports whether one of
/// them moves the output by at least `tau`. `false` certifies nothing unless
/// the draws cover the support; see [`test_nonstrict_sufficiency_exhaustive`].
#[allow(clippy::too_many_arguments)]
pub fn test_nonstrict_sufficiency<C: Classifier + ?Sized, R: Rng + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    spec: &PerturbationSpec,
    d: &Divergence,
    sigma: usize,
    tau: f64,
    rng: &mut R,
) -> Result<bool> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    if sigma == 0 {
        return Ok(false);
    }
    let base = model.evaluate(g, target)?;
    for _ in 0..sigma {
        let s = sample(spec, g, mask, rng)?;
        if d.eval(&base, &model.evaluate(&s.graph, s.map_target(target)?)?)? >= tau {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The same test with one draw per support element.
pub fn test_nonstrict_sufficiency_exhaustive<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    spec: &PerturbationSpec,
    d: &Divergence,
    tau: f64,
) -> Result<bool> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let base = model.evaluate(g, target)?;
    for (s, p) in enumerate_support(spec, g, mask, SUPPORT_CAP)? {
        if p > 0.0 && d.eval(&base, &model.evaluate(&s.graph, s.map_target(target)?)?)? >= tau {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Two perturbation distributions over supergraphs of the same explanation
/// whose sufficiencies differ by the largest amount found.
#[derive(Clone, Debug)]
pub struct NonInterchangeability {
    pub spec_a: PerturbationSpec,
    pub spec_b: PerturbationSpec,
    pub suf_a: f64,
    pub suf_b: f64,
}

impl NonInterchangeability {
    pub fn gap(&self) -> f64 {
        (self.suf_a - self.suf_b).abs()
    }
}

/// Largest complement size whose whole deletion lattice is searched; larger
/// complements are searched up to two deletions.
const LATTICE_LIMIT: usize = 16;

/// Builds `spec_a` as the point mass on `g` (so `Suf = 0`) and `spec_b` as a
/// point mass on the supergraph of the explanation that moves the output the
/// most. Candidates are complement deletions (breadth-first by size) and
/// swaps of the complement for that of a pool graph, joined by the original
/// number of cross edges.
pub fn demonstrate_non_interchangeability<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    mask: &EdgeMask,
    target: Option<usize>,
    d: &Divergence,
    pool: &[(AnnotatedGraph, EdgeMask)],
) -> Result<NonInterchangeability> {
    mask.check_domain(g)?;
    let base = model.evaluate(g, target)?;
    let ceiling = d.range().unwrap_or(f64::INFINITY);
    let mut best: Option<(f64, AnnotatedGraph, Option<usize>)> = None;
    // records a candidate; true once the divergence hits its ceiling
    let consider = |best: &mut Option<(f64, AnnotatedGraph, Option<usize>)>,
                    h: AnnotatedGraph,
                    t: Option<usize>|
     -> Result<bool> {
        let v = d.eval(&base, &model.evaluate(&h, t)?)?;
        if best.as_ref().map_or(v > 0.0, |(b, _, _)| v > *b) {
            *best = Some((v, h, t));
        }
        Ok(v >= ceiling)
    };

    let comp = side_indices(mask, false)?;
    let depth = if comp.len() <= LATTICE_LIMIT { comp.len() } else { 2 };
    let mut done = false;
    'lattice: for size in 1..=depth {
        for combo in Combinations::new(comp.len(), size) {
            let mut drop = vec![false; g.edge_count()];
            for j in combo {
                drop[comp[j]] = true;
            }
            if consider(&mut best, g.without_edges(&drop), target)? {
                done = true;
                break 'lattice;
            }
        }
    }
    if !done {
        for (i, donor) in pool.iter().enumerate() {
            let spec = PerturbationSpec::new(
                Side::RFixed,
                Family::ReplaceComplement {
                    pool: Arc::new(vec![donor.clone()]),
                    k_join: None,
                },
            )
            .protect(target);
            let mut rng = crate::seed::task_rng(0, i as u64, 0, 0);
            let s = sample(&spec, g, mask, &mut rng)?;
            let t = s.map_target(target)?;
            if consider(&mut best, s.graph, t)? {
                break;
            }
        }
    }

    let (_, counterfactual, t) = best.ok_or(Error::NoCounterfactual)?;
    // both specs are point masses, so their sufficiency is a single divergence
    let suf_a = d.eval(&base, &model.evaluate(g, target)?)?;
    let suf_b = d.eval(&base, &model.evaluate(&counterfactual, t)?)?;
    let point = |graph: AnnotatedGraph| {
        PerturbationSpec::new(Side::RFixed, Family::PointMass { graph: Arc::new(graph) })
    };
    Ok(NonInterchangeability {
        spec_a: point(g.clone()),
        spec_b: point(counterfactual),
        suf_a,
        suf_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(9, 0).unwrap(), 1);
        assert_eq!(binomial(12, 6).unwrap(), 924);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert_eq!(binomial(65, 1), Err(Error::Overflow(65, 1)));
        assert_eq!(binomial(3, 4), Err(Error::Overflow(3, 4)));
    }

    #[test]
    fn hit_examples() {
        assert_eq!(hit_stats_budget(2, 1, 1).unwrap().probability, Ratio::new(1, 2));
        assert_eq!(hit_stats_budget(2, 1, 2).unwrap().probability, Ratio::new(1, 1));
        let s = hit_stats_budget(4, 2, 2).unwrap();
        assert_eq!((s.hit_count, s.support_size), (5, 6));
        assert_eq!(hit_stats_budget(5, 0, 3).unwrap().hit_count, 0);
        assert!(hit_stats_budget(3, 4, 1).is_err());
        assert!(hit_stats_budget(3, 1, 0).is_err());
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(hit_prob_bernoulli(4, 1.0).unwrap(), 0.0);
        assert_eq!(hit_prob_bernoulli(3, 0.0).unwrap(), 1.0);
        assert_eq!(hit_prob_bernoulli(2, 0.5).unwrap(), 0.75);
    }

    #[test]
    fn fraction_budget_is_robust_to_float_products() {
        assert_eq!(BudgetRule::Fraction(0.1).budget(30), 3);
        assert_eq!(BudgetRule::Fraction(0.1).budget(19), 1);
        assert_eq!(BudgetRule::Fraction(0.1).budget(20), 2);
        assert_eq!(BudgetRule::Fixed(3).budget(2), 2);
    }
}
