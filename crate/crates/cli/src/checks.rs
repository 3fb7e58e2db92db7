//! Verification sweeps behind `faithkit verify`. Each check reports a
//! pass/fail verdict and the measured discrepancy.

use std::fmt;

use faithkit::graph::EdgeMask;
use faithkit::invariance::leak_witness_check;
use faithkit::metrics::{exact_expectation, legacy_metric, Divergence, LegacyMetric, MetricParams};
use faithkit::models::HashClassifier;
use faithkit::oracles::{
    computational_graph, demonstrate_non_interchangeability, hit_stats_enumerated, strict_faithfulness_exhaustive,
    strictly_sufficient, HitStatistics,
};
use faithkit::perturb::{budget_from_dataset, Family, PerturbationSpec, Side};
use faithkit::seed::task_rng;
use faithkit::Result;

use crate::fixtures::{
    house_classifier, house_fixture, small_connected_graphs, star, star_classifier, star_mask, witness_graph,
    witness_hard_model, witness_soft_model, witness_spec, STAR_TARGET,
};

/// Closed-form hit statistics `(m_R, r, b)`; injectable so the harness can be
/// exercised against a broken implementation.
pub type HitFn<'a> = &'a dyn Fn(u64, u64, u64) -> Result<HitStatistics>;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub discrepancy: f64,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} discrepancy={:.6} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.discrepancy,
            self.detail
        )
    }
}

fn outcome(name: &str, passed: bool, discrepancy: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        discrepancy,
        detail,
    }
}

/// Keep probability with an exact binary expansion, so that probabilities of
/// equal-law outcomes add up without rounding.
pub const DYADIC_KEEP: f64 = 0.75;
/// Leaves of the invariance star; the explanation grows up to 11 spokes.
pub const INVARIANCE_LEAVES: usize = 16;
pub const MAX_IRRELEVANT: usize = 10;

/// Fid+, PN and the exact RFid+ on the star for `k` irrelevant edges in R.
pub fn star_row(k: usize) -> Result<[f64; 3]> {
    let g = star(INVARIANCE_LEAVES)?;
    let model = star_classifier();
    let mask = star_mask(&g, k);
    let target = Some(STAR_TARGET);
    let params = MetricParams {
        bernoulli_keep: DYADIC_KEEP,
        ..MetricParams::default()
    };
    let fid = legacy_metric(LegacyMetric::FidPlus, &model, &g, &mask, target, &params)?;
    let pn = legacy_metric(LegacyMetric::Pn, &model, &g, &mask, target, &params)?;
    let (d, spec) = LegacyMetric::RfidPlus.as_spec(&params, target);
    let rfid = exact_expectation(&model, &g, &mask, target, &spec, &d)?.value;
    Ok([fid, pn, rfid])
}

pub fn check_invariance() -> Result<CheckOutcome> {
    let base = star_row(0)?;
    let mut worst = 0.0f64;
    let mut identical = true;
    for k in 1..=MAX_IRRELEVANT {
        let row = star_row(k)?;
        for (a, b) in base.iter().zip(&row) {
            identical &= a.to_bits() == b.to_bits();
            worst = worst.max((a - b).abs());
        }
    }
    Ok(outcome(
        "irrelevant-edge-invariance",
        identical && base[0] > 0.0,
        worst,
        format!("fid+={:.6} pn={:.6} rfid+={:.6} for k=0..={MAX_IRRELEVANT}", base[0], base[1], base[2]),
    ))
}

/// Leaves of the sensitivity star; its edge count fixes the dataset budget.
pub const SENSITIVITY_LEAVES: usize = 40;
pub const SENSITIVITY_MAX_IRRELEVANT: usize = 30;

/// Exact Nec under the fixed budget and the oracle hit probability, for each
/// number of irrelevant edges `1..=SENSITIVITY_MAX_IRRELEVANT`.
pub fn sensitivity_curve(hit: HitFn<'_>) -> Result<(usize, Vec<(f64, f64)>)> {
    let g = star(SENSITIVITY_LEAVES)?;
    let b = budget_from_dataset(std::slice::from_ref(&g), MetricParams::default().budget_ratio)?;
    let model = star_classifier();
    let spec = PerturbationSpec::new(Side::CFixed, Family::Budget { b }).protect([STAR_TARGET]);
    let mut rows = Vec::new();
    for k in 1..=SENSITIVITY_MAX_IRRELEVANT {
        let mask = star_mask(&g, k);
        let nec = exact_expectation(&model, &g, &mask, Some(STAR_TARGET), &spec, &Divergence::PredChange)?.value;
        let p = hit(k as u64 + 1, 1, b as u64)?.probability_f64();
        rows.push((nec, p));
    }
    Ok((b, rows))
}

pub fn check_sensitivity(hit: HitFn<'_>) -> Result<CheckOutcome> {
    let (b, rows) = sensitivity_curve(hit)?;
    let worst = rows.iter().map(|(n, p)| (n - p).abs()).fold(0.0, f64::max);
    let decreasing = rows.windows(2).all(|w| w[1].0 < w[0].0);
    Ok(outcome(
        "budget-sensitivity",
        decreasing && worst <= 1e-12,
        worst,
        format!("b={b} nec {:.6} -> {:.6}", rows[0].0, rows[rows.len() - 1].0),
    ))
}

/// Largest explanation size of the counting sweep.
pub const COUNTING_MAX_EDGES: u64 = 12;

/// Compares closed-form hit counts with brute-force enumeration for every
/// `(m_R, r, b)` with `m_R ≤ COUNTING_MAX_EDGES`; returns (cases, mismatches).
pub fn counting_sweep(hit: HitFn<'_>) -> Result<(usize, usize)> {
    let mut cases = 0;
    let mut bad = 0;
    for m in 1..=COUNTING_MAX_EDGES {
        for r in 0..=m {
            for b in 1..=m {
                cases += 1;
                let want = hit_stats_enumerated(m, r, b)?;
                match hit(m, r, b) {
                    Ok(got) if got == want => {}
                    _ => bad += 1,
                }
            }
        }
    }
    Ok((cases, bad))
}

pub fn check_counting(hit: HitFn<'_>) -> Result<CheckOutcome> {
    let (cases, bad) = counting_sweep(hit)?;
    Ok(outcome(
        "hit-counting",
        bad == 0,
        bad as f64,
        format!("{bad} mismatches over {cases} cases"),
    ))
}

/// Over every small connected graph, every explanation mask and both the
/// graph task and one-hop node tasks: strictly sufficient iff the mask covers
/// the computational graph. Returns (cases, counterexamples).
pub fn iff_sweep() -> Result<(usize, usize)> {
    let mut cases = 0;
    let mut bad = 0;
    for g in small_connected_graphs() {
        let m = g.edge_count();
        let mut tasks = vec![(HashClassifier::default(), None)];
        if m <= 6 {
            tasks.extend((0..g.node_count()).map(|u| (HashClassifier::local(1), Some(u))));
        }
        for (model, target) in tasks {
            let comp = computational_graph(&model, &g, target)?;
            for subset in 0u32..(1u32 << m) {
                let bits: Vec<bool> = (0..m).map(|i| subset >> i & 1 == 1).collect();
                let covers = comp.iter().all(|&e| bits[e]);
                let sufficient = strictly_sufficient(&model, &g, &EdgeMask::from_bits(&bits), target)?;
                cases += 1;
                if sufficient != covers {
                    bad += 1;
                }
            }
        }
    }
    Ok((cases, bad))
}

pub fn check_iff() -> Result<CheckOutcome> {
    let (cases, bad) = iff_sweep()?;
    Ok(outcome(
        "sufficiency-iff-coverage",
        bad == 0,
        bad as f64,
        format!("{bad} counterexamples over {cases} (graph, task, mask) cases"),
    ))
}

/// Sufficiency gaps of the constructed perturbation pair under pred-change and
/// pred-likelihood.
pub fn construction_gaps() -> Result<(f64, f64)> {
    let (g, mask) = house_fixture()?;
    let model = house_classifier();
    let change = demonstrate_non_interchangeability(&model, &g, &mask, None, &Divergence::PredChange, &[])?;
    let likelihood = demonstrate_non_interchangeability(
        &model,
        &g,
        &mask,
        None,
        &Divergence::PredLikelihood { class: None },
        &[],
    )?;
    Ok((change.gap(), likelihood.gap()))
}

pub fn check_construction() -> Result<CheckOutcome> {
    let (change, likelihood) = construction_gaps()?;
    Ok(outcome(
        "non-interchangeability",
        (change - 1.0).abs() <= 1e-9 && likelihood >= 0.9,
        (1.0 - change).abs(),
        format!("gap pred-change={change:.6} pred-likelihood={likelihood:.6}"),
    ))
}

/// Soft masking leaks the complement, hard masking does not, and a found
/// witness rules out strict sufficiency.
pub fn witness_results(sigma: usize, tau: f64, seed: u64) -> Result<(bool, bool, bool)> {
    let g = witness_graph()?;
    let spec = witness_spec();
    let soft = leak_witness_check(&witness_soft_model(), &g, &spec, sigma, tau, &mut task_rng(seed, 0, 0, 0))?;
    let hard = leak_witness_check(&witness_hard_model(), &g, &spec, sigma, tau, &mut task_rng(seed, 0, 0, 1))?;
    let gt = g.ground_truth().expect("witness graph has ground truth");
    let (strict, _) = strict_faithfulness_exhaustive(&witness_soft_model(), &g, gt, None)?;
    Ok((soft, hard, strict))
}

pub fn check_leak_witness(sigma: usize, tau: f64, seed: u64) -> Result<CheckOutcome> {
    let (soft, hard, strict) = witness_results(sigma, tau, seed)?;
    let consistent = !soft || !strict;
    Ok(outcome(
        "soft-mask-leak",
        soft && !hard && consistent,
        f64::from(u8::from(!soft) + u8::from(hard) + u8::from(!consistent)),
        format!("soft={soft} hard={hard} strictly-sufficient={strict}"),
    ))
}

/// Runs the named check; unknown names are a parse error.
pub fn run_check(name: &str, hit: HitFn<'_>, sigma: usize, tau: f64, seed: u64) -> Result<CheckOutcome> {
    match name {
        "irrelevant-edge-invariance" => check_invariance(),
        "budget-sensitivity" => check_sensitivity(hit),
        "hit-counting" => check_counting(hit),
        "sufficiency-iff-coverage" => check_iff(),
        "non-interchangeability" => check_construction(),
        "soft-mask-leak" => check_leak_witness(sigma, tau, seed),
        other => Err(faithkit::Error::Parse(format!("unknown check `{other}`"))),
    }
}
