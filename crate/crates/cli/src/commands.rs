//! The five subcommands as library functions. Each is a pure function of the
//! configuration and its input files.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use faithkit::graph::{topk_binarize, AnnotatedGraph, EdgeMask, LabelDistribution};
use faithkit::invariance::{bound_report, correlation_experiment, CorrelationOutcome};
use faithkit::io::{load_gin, load_graphs, save_graphs};
use faithkit::metrics::{faith_at, legacy_metric, nec_raw, stability, wiou, LegacyMetric, MetricParams};
use faithkit::models::{
    Classifier, ConstantClassifier, ConstantDetector, Detector, GinParams, GroundTruthDetector, HashClassifier,
    MaskingMode, ModularModel, MotifClassifier, Readout, Stage, Switches,
};
use faithkit::oracles::{budget_probability_curve, hit_stats_budget, BudgetRule};
use faithkit::perturb::{budget_from_dataset, Family, PerturbationSpec, Side};
use faithkit::report::{BoundTable, MetricReport, MetricRow};
use faithkit::seed::task_rng;
use faithkit::synth::{generate, Split};
use faithkit::{Error, Result};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{run_check, CheckOutcome, HitFn};
use crate::config::RunConfig;

/// A classifier plus the detector its explanations come from, if any.
#[derive(Clone)]
pub struct BuiltModel {
    pub model: Arc<dyn Classifier>,
    pub detector: Option<Arc<dyn Detector>>,
}

fn gin_from_config(cfg: &RunConfig, feature_dim: usize) -> Result<GinParams> {
    let m = &cfg.model;
    if let Some(path) = &m.params {
        return load_gin(path);
    }
    let readout = match m.readout.as_str() {
        "sum" => Readout::Sum,
        "mean" => Readout::Mean,
        other => return Err(Error::Parse(format!("unknown readout `{other}`"))),
    };
    let p = GinParams::seeded(
        m.dim.unwrap_or(feature_dim),
        m.classes,
        m.layers,
        m.model_seed.unwrap_or(cfg.seed),
    )
    .with_readout(readout)
    .with_switches(Switches {
        hs: m.hs,
        cf: m.cf,
        er: m.er,
        la: m.la,
    });
    p.validate()?;
    Ok(p)
}

/// Builds the configured model for graphs with `feature_dim` features.
pub fn build_model(cfg: &RunConfig, feature_dim: usize) -> Result<BuiltModel> {
    let m = &cfg.model;
    let plain = |model: Arc<dyn Classifier>| BuiltModel { model, detector: None };
    Ok(match m.name.as_str() {
        "gin" => plain(Arc::new(gin_from_config(cfg, feature_dim)?)),
        "hash" => plain(Arc::new(HashClassifier {
            classes: m.classes,
            hops: m.hops,
        })),
        "motif" => plain(Arc::new(MotifClassifier::single())),
        "bams-motif" => plain(Arc::new(MotifClassifier::bams())),
        "constant" => plain(Arc::new(ConstantClassifier::new(LabelDistribution::uniform(m.classes)))),
        "modular" => {
            let detector: Arc<dyn Detector> = match m.detector.as_str() {
                "ideal" => Arc::new(GroundTruthDetector::ideal()),
                "leaky" => Arc::new(GroundTruthDetector::leaky(m.complement_score)),
                "constant" => Arc::new(ConstantDetector {
                    score: m.complement_score,
                }),
                other => return Err(Error::Parse(format!("unknown detector `{other}`"))),
            };
            let mode = match m.masking.as_str() {
                "soft" => MaskingMode::SoftScale,
                "hard" => MaskingMode::HardSubgraph,
                other => return Err(Error::Parse(format!("unknown masking `{other}`"))),
            };
            let stage = match m.stage.as_str() {
                "gin" => Stage::Gin(gin_from_config(cfg, feature_dim)?),
                "motif" => Stage::Opaque(Arc::new(MotifClassifier::single())),
                other => return Err(Error::Parse(format!("unknown stage `{other}`"))),
            };
            let model = ModularModel {
                detector: detector.clone(),
                stage,
                mode,
                backbone: None,
            };
            BuiltModel {
                model: Arc::new(model),
                detector: Some(detector),
            }
        }
        other => return Err(Error::Parse(format!("unknown model `{other}`"))),
    })
}

fn family(name: &str, cfg: &RunConfig, graphs: &[AnnotatedGraph]) -> Result<Family> {
    Ok(match name {
        "budget" => Family::Budget {
            b: match cfg.metrics.budget {
                Some(b) => b,
                None => budget_from_dataset(graphs, cfg.metrics.budget_ratio)?,
            },
        },
        "bernoulli" => Family::Bernoulli {
            keep: cfg.metrics.bernoulli_keep,
        },
        "delete-all" => Family::DeleteAll,
        "zero-features" => Family::ZeroFeatures,
        "delete-and-zero" => Family::DeleteAndZero,
        "soft-scale" => Family::SoftScale,
        "replace-complement" => {
            let pool: Vec<_> = graphs
                .iter()
                .filter_map(|g| g.ground_truth().map(|m| (g.clone(), m.clone())))
                .collect();
            if pool.is_empty() {
                return Err(Error::MissingGroundTruth);
            }
            Family::ReplaceComplement {
                pool: Arc::new(pool),
                k_join: None,
            }
        }
        other => return Err(Error::Parse(format!("unknown perturbation family `{other}`"))),
    })
}

/// Sufficiency and necessity specs for a dataset.
pub fn metric_specs(cfg: &RunConfig, graphs: &[AnnotatedGraph]) -> Result<(PerturbationSpec, PerturbationSpec)> {
    let suf = PerturbationSpec::new(Side::RFixed, family(&cfg.metrics.suf_family, cfg, graphs)?).with_seed(cfg.seed);
    let nec = PerturbationSpec::new(Side::CFixed, family(&cfg.metrics.nec_family, cfg, graphs)?).with_seed(cfg.seed);
    suf.validate()?;
    nec.validate()?;
    Ok((suf, nec))
}

/// The configured input dataset, or every split of the configured generator.
pub fn load_dataset(cfg: &RunConfig) -> Result<Vec<AnnotatedGraph>> {
    if let Some(path) = &cfg.input.dataset {
        return load_graphs(path);
    }
    let s = generate(&cfg.dataset_config()?)?;
    Ok(s.train.into_iter().chain(s.id_test).chain(s.ood_test).collect())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_hash: String,
    pub counts: SplitCounts,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitCounts {
    pub train: usize,
    pub id_test: usize,
    pub ood_test: usize,
}

pub const SPLIT_FILES: [&str; 3] = ["train.jsonl", "id_test.jsonl", "ood_test.jsonl"];
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes one record file per split and a manifest into `out`.
pub fn cmd_generate(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let Split {
        train,
        id_test,
        ood_test,
    } = generate(&cfg.dataset_config()?)?;
    std::fs::create_dir_all(out)?;
    for (name, graphs) in SPLIT_FILES.iter().zip([&train, &id_test, &ood_test]) {
        save_graphs(out.join(name), graphs)?;
    }
    let manifest = Manifest {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        counts: SplitCounts {
            train: train.len(),
            id_test: id_test.len(),
            ood_test: ood_test.len(),
        },
        files: SPLIT_FILES.iter().map(|s| s.to_string()).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(out.join(MANIFEST_FILE), text + "\n")?;
    Ok(manifest)
}

fn explanation_scores(cfg: &RunConfig, built: &BuiltModel, g: &AnnotatedGraph) -> Result<EdgeMask> {
    let source = cfg.model.explanation.as_deref().unwrap_or(if built.detector.is_some() {
        "detector"
    } else {
        "ground-truth"
    });
    match (source, &built.detector) {
        ("detector", Some(d)) => d.detect(g),
        ("detector", None) => Err(Error::InvalidParameter("model has no detector".into())),
        ("ground-truth", _) => g.ground_truth().cloned().ok_or(Error::MissingGroundTruth),
        (other, _) => Err(Error::Parse(format!("unknown explanation source `{other}`"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn evaluate_graph(
    cfg: &RunConfig,
    built: &BuiltModel,
    g: &AnnotatedGraph,
    graph_id: usize,
    suf: &PerturbationSpec,
    nec: &PerturbationSpec,
    params: &MetricParams,
) -> MetricRow {
    let mut row = MetricRow {
        graph_id,
        ..MetricRow::default()
    };
    let scores = match explanation_scores(cfg, built, g) {
        Ok(s) => s,
        Err(_) => {
            row.failures = params.topk_ratios.len();
            return row;
        }
    };
    let gi = graph_id as u64;
    let mut best: Option<(f64, faithkit::metrics::FaithValue)> = None;
    for (ri, &ratio) in params.topk_ratios.iter().enumerate() {
        let value = topk_binarize(&scores, ratio)
            .and_then(|mask| faith_at(built.model.as_ref(), g, &mask, None, suf, nec, params, gi, ri as u64));
        match value {
            Ok(v) if best.as_ref().is_none_or(|(_, b)| v.faith > b.faith) => best = Some((ratio, v)),
            Ok(_) => {}
            Err(_) => row.failures += 1,
        }
    }
    if let Some((ratio, v)) = best {
        row.ratio = Some(ratio);
        row.suf_raw = Some(v.suf_raw);
        row.suf_n = Some(v.suf_n);
        row.nec_raw = Some(v.nec_raw);
        row.nec_n = Some(v.nec_n);
        row.faith = Some(v.faith);
    }
    row.wiou = g.ground_truth().and_then(|gt| wiou(&scores, gt).ok());
    row.stability = built
        .detector
        .as_ref()
        .and_then(|d| stability(d.as_ref(), g, suf, params, gi).ok());
    row
}

/// Per-graph faithfulness at the best top-k ratio, plausibility and
/// stability. At most `q2` graphs are evaluated, taken in a seeded shuffle.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<MetricReport> {
    let graphs = load_dataset(cfg)?;
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let params = cfg.metric_params()?;
    params.validate()?;
    let built = build_model(cfg, graphs[0].feature_dim())?;
    let (suf, nec) = metric_specs(cfg, &graphs)?;
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    order.shuffle(&mut task_rng(cfg.seed, u64::MAX, 0, 0));
    order.truncate(params.q2);
    let rows = pool(cfg.workers)?.install(|| {
        order
            .par_iter()
            .map(|&i| evaluate_graph(cfg, &built, &graphs[i], i, &suf, &nec, &params))
            .collect()
    });
    Ok(MetricReport { rows })
}

/// Graphs whose evaluation failed at every ratio.
pub fn graph_failures(report: &MetricReport) -> usize {
    report.rows.iter().filter(|r| r.faith.is_none()).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ledger {
    pub checks: Vec<CheckOutcome>,
}

impl Ledger {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        self.checks.iter().map(|c| format!("{c}\n")).collect()
    }
}

/// Runs the configured checks with an injected hit-statistics function.
pub fn cmd_verify_with(cfg: &RunConfig, hit: HitFn<'_>) -> Result<Ledger> {
    let v = &cfg.verify;
    let checks = v
        .checks
        .iter()
        .map(|name| run_check(name, hit, v.sigma, v.tau, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ledger { checks })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Ledger> {
    cmd_verify_with(cfg, &hit_stats_budget)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    /// `rule,irrelevant,budget,probability`.
    pub curves: String,
    /// `ratio,rfid_plus,nec,graphs`.
    pub sweep: String,
}

/// Hit-probability curves for the fraction rules and the dataset budget, and
/// the RFid+ versus Nec explanation-size sweep.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Simulation> {
    let s = &cfg.simulate;
    let graphs = load_dataset(cfg)?;
    let fixed = match s.fixed {
        Some(b) => b,
        None => budget_from_dataset(&graphs, cfg.metrics.budget_ratio)? as u64,
    };
    let mut rules: Vec<(String, BudgetRule)> = s
        .fractions
        .iter()
        .map(|&f| (format!("fraction-{f:.2}"), BudgetRule::Fraction(f)))
        .collect();
    rules.push((format!("fixed-{fixed}"), BudgetRule::Fixed(fixed)));
    let mut curves = String::from("rule,irrelevant,budget,probability\n");
    for (name, rule) in &rules {
        for p in budget_probability_curve(s.relevant, s.irrelevant[0]..=s.irrelevant[1], *rule)? {
            let _ = writeln!(curves, "{name},{},{},{:.6}", p.irrelevant, p.budget, p.probability_f64());
        }
    }

    let params = cfg.metric_params()?;
    let used = &graphs[..graphs.len().min(s.sweep_graphs)];
    let built = build_model(cfg, used.first().map_or(1, |g| g.feature_dim()))?;
    let (_, nec_spec) = metric_specs(cfg, &graphs)?;
    let rows = pool(cfg.workers)?.install(|| {
        s.sweep_ratios
            .par_iter()
            .map(|&ratio| {
                let mut rfid = 0.0;
                let mut nec = 0.0;
                let mut count = 0usize;
                for g in used {
                    let values = explanation_scores(cfg, &built, g)
                        .and_then(|scores| topk_binarize(&scores, ratio))
                        .and_then(|mask| {
                            let r = legacy_metric(LegacyMetric::RfidPlus, built.model.as_ref(), g, &mask, None, &params)?;
                            let n = nec_raw(built.model.as_ref(), g, &mask, None, &nec_spec, &params)?;
                            Ok((r, n))
                        });
                    if let Ok((r, n)) = values {
                        rfid += r;
                        nec += n;
                        count += 1;
                    }
                }
                (ratio, rfid, nec, count)
            })
            .collect::<Vec<_>>()
    });
    let mut sweep = String::from("ratio,rfid_plus,nec,graphs\n");
    for (ratio, rfid, nec, count) in rows {
        if count == 0 {
            let _ = writeln!(sweep, "{ratio:.6},,,0");
        } else {
            let n = count as f64;
            let _ = writeln!(sweep, "{ratio:.6},{:.6},{:.6},{count}", rfid / n, nec / n);
        }
    }
    Ok(Simulation { curves, sweep })
}

/// Modular model named `ideal` or `leaky-<score>` around `stage`.
pub fn tier_model(name: &str, stage: &GinParams) -> Result<ModularModel> {
    let stage = Stage::Gin(stage.clone());
    if name == "ideal" {
        return Ok(ModularModel::new(GroundTruthDetector::ideal(), stage, MaskingMode::HardSubgraph));
    }
    let score: f64 = name
        .strip_prefix("leaky-")
        .and_then(|s| s.parse().ok())
        .filter(|s| (0.0..=1.0).contains(s))
        .ok_or_else(|| Error::Parse(format!("unknown bound model `{name}`")))?;
    Ok(ModularModel::new(GroundTruthDetector::leaky(score), stage, MaskingMode::SoftScale))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundOutput {
    pub table: BoundTable,
    /// `None` when fewer than three models or zero variance.
    pub correlation: Option<CorrelationOutcome>,
}

impl BoundOutput {
    pub fn render(&self) -> Result<String> {
        let mut out = self.table.to_csv()?;
        match &self.correlation {
            Some(c) => {
                let _ = writeln!(out, "# pearson(wiou*faith, gap) = {:.6}", c.pearson);
                for r in &c.rows {
                    let _ = writeln!(
                        out,
                        "# {} wiou={:.6} faith={:.6} combined={:.6} gap={:.6}",
                        r.name, r.wiou, r.faith, r.combined, r.gap
                    );
                }
            }
            None => out.push_str("# pearson(wiou*faith, gap) = undefined\n"),
        }
        Ok(out)
    }
}

/// Bound terms per model on the ID and OOD splits, plus the correlation of
/// plausibility times faithfulness with the likelihood gap.
pub fn cmd_bound(cfg: &RunConfig) -> Result<BoundOutput> {
    let (id, ood) = match (&cfg.input.id, &cfg.input.ood) {
        (Some(a), Some(b)) => (load_graphs(a)?, load_graphs(b)?),
        (None, None) => {
            let s = generate(&cfg.dataset_config()?)?;
            (s.id_test, s.ood_test)
        }
        _ => return Err(Error::InvalidParameter("bound needs both id and ood inputs".into())),
    };
    if id.is_empty() || ood.is_empty() {
        return Err(Error::InvalidParameter("bound needs non-empty ID and OOD splits".into()));
    }
    let params = cfg.metric_params()?;
    let stage = GinParams::seeded(id[0].feature_dim(), cfg.model.classes, 2, cfg.bound.gin_seed)
        .with_readout(Readout::Mean)
        .with_switches(Switches {
            hs: false,
            cf: true,
            er: true,
            la: true,
        });
    let models = cfg
        .bound
        .models
        .iter()
        .map(|n| Ok((n.clone(), tier_model(n, &stage)?)))
        .collect::<Result<Vec<_>>>()?;
    let b = match cfg.metrics.budget {
        Some(b) => b,
        None => budget_from_dataset(&id, params.budget_ratio)?,
    };
    let suf = PerturbationSpec::new(Side::RFixed, Family::Budget { b }).with_seed(cfg.seed);
    let nec = PerturbationSpec::new(Side::CFixed, Family::Budget { b }).with_seed(cfg.seed);
    let rows = pool(cfg.workers)?.install(|| {
        models
            .par_iter()
            .map(|(name, m)| Ok((name.clone(), bound_report(m, &id, &ood, &suf, &params)?)))
            .collect::<Result<Vec<_>>>()
    })?;
    let correlation = match correlation_experiment(&models, &id, &ood, &suf, &nec, &params) {
        Ok(c) => Some(c),
        Err(Error::UndefinedCorrelation) | Err(Error::InvalidParameter(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundOutput {
        table: BoundTable { rows },
        correlation,
    })
}
