//! Run configuration: a TOML file with a mandatory top-level `seed` and
//! optional sections `[dataset]`, `[metrics]`, `[model]`, `[input]`,
//! `[verify]`, `[simulate]` and `[bound]`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use faithkit::metrics::{Divergence, EstimationMode, MetricParams};
use faithkit::motifs::MotifKind;
use faithkit::synth::{BaseKind, DatasetConfig, DatasetFamily, FeatureMode, MotifGraphOptions};
use faithkit::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub bound: BoundSection,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    /// `line`, `star`, `motif-basis` or `bams`.
    pub family: String,
    /// Node count of a line or star.
    pub n: usize,
    pub id_bases: Vec<String>,
    pub ood_bases: Vec<String>,
    pub motifs: Vec<String>,
    /// Train, ID test and OOD test sizes.
    pub counts: [usize; 3],
    /// Inclusive base size range.
    pub base_size: [usize; 2],
    /// `constant`, `one-hot-degree` or `seeded-random`.
    pub features: String,
    pub feature_dim: usize,
    pub max_degree: usize,
    pub gt_includes_bridge: bool,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            family: "motif-basis".into(),
            n: 10,
            id_bases: vec!["ladder".into(), "tree".into()],
            ood_bases: vec!["circular-ladder".into()],
            motifs: vec!["house".into(), "cycle5".into(), "crane".into()],
            counts: [60, 20, 20],
            base_size: [6, 10],
            features: "constant".into(),
            feature_dim: 1,
            max_degree: 4,
            gt_includes_bridge: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub q1: usize,
    pub q2: usize,
    pub topk_ratios: Vec<f64>,
    pub budget_ratio: f64,
    /// Fixed budget overriding `budget_ratio`.
    pub budget: Option<usize>,
    /// `l1`, `kl`, `pred-likelihood` or `pred-change`.
    pub divergence: String,
    /// `auto`, `exact` or `monte-carlo`.
    pub mode: String,
    pub bernoulli_keep: f64,
    pub stability_ratios: Vec<f64>,
    /// Perturbation families for sufficiency and necessity: `budget`,
    /// `bernoulli`, `delete-all`, `zero-features`, `delete-and-zero`,
    /// `soft-scale` or `replace-complement`.
    pub suf_family: String,
    pub nec_family: String,
    /// Graph-level failures tolerated before `evaluate` exits nonzero.
    pub max_failures: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        let p = MetricParams::default();
        MetricsSection {
            q1: p.q1,
            q2: p.q2,
            topk_ratios: p.topk_ratios,
            budget_ratio: p.budget_ratio,
            budget: None,
            divergence: "l1".into(),
            mode: "auto".into(),
            bernoulli_keep: p.bernoulli_keep,
            stability_ratios: p.stability_ratios,
            suf_family: "budget".into(),
            nec_family: "budget".into(),
            max_failures: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// `gin`, `hash`, `motif` (default), `bams-motif`, `constant` or
    /// `modular`.
    pub name: String,
    /// GIN parameter record; seeded parameters are used when absent.
    pub params: Option<PathBuf>,
    /// Width of seeded parameters; defaults to the dataset feature dimension.
    pub dim: Option<usize>,
    pub classes: usize,
    pub layers: usize,
    /// Seed of seeded parameters; defaults to the run seed.
    pub model_seed: Option<u64>,
    /// `sum` or `mean`.
    pub readout: String,
    pub hs: bool,
    pub cf: bool,
    pub er: bool,
    pub la: bool,
    /// Hops of the hash classifier; absent reads the whole graph.
    pub hops: Option<usize>,
    /// Modular detector: `ideal`, `leaky` or `constant`.
    pub detector: String,
    /// Complement score of the leaky detector, or the constant score.
    pub complement_score: f64,
    /// Modular masking: `soft` or `hard`.
    pub masking: String,
    /// Modular classification stage: `gin` or `motif`.
    pub stage: String,
    /// Where explanations come from: `detector` or `ground-truth`; absent
    /// picks the detector of modular models and the ground truth otherwise.
    pub explanation: Option<String>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            name: "motif".into(),
            params: None,
            dim: None,
            classes: 3,
            layers: 2,
            model_seed: None,
            readout: "sum".into(),
            hs: false,
            cf: true,
            er: false,
            la: true,
            hops: None,
            detector: "ideal".into(),
            complement_score: 0.0,
            masking: "hard".into(),
            stage: "gin".into(),
            explanation: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputSection {
    /// Graph records evaluated by `evaluate` and `simulate`.
    pub dataset: Option<PathBuf>,
    /// ID and OOD graph records for `bound`.
    pub id: Option<PathBuf>,
    pub ood: Option<PathBuf>,
}

pub const ALL_CHECKS: [&str; 6] = [
    "irrelevant-edge-invariance",
    "budget-sensitivity",
    "hit-counting",
    "sufficiency-iff-coverage",
    "non-interchangeability",
    "soft-mask-leak",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub checks: Vec<String>,
    /// Draws of the non-invariance search.
    pub sigma: usize,
    pub tau: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            checks: ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
            sigma: 64,
            tau: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// Truly relevant edges in the explanation.
    pub relevant: u64,
    /// Inclusive range of irrelevant edge counts.
    pub irrelevant: [u64; 2],
    pub fractions: Vec<f64>,
    /// Fixed budget; defaults to the dataset-derived budget.
    pub fixed: Option<u64>,
    /// Explanation sizes of the RFid+/Nec sweep.
    pub sweep_ratios: Vec<f64>,
    /// Graphs used by the sweep.
    pub sweep_graphs: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            relevant: 5,
            irrelevant: [0, 50],
            fractions: vec![0.03, 0.05, 0.10],
            fixed: None,
            sweep_ratios: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            sweep_graphs: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    /// `ideal` or `leaky-<score>`.
    pub models: Vec<String>,
    /// Seed of the classification stage.
    pub gin_seed: u64,
}

impl Default for BoundSection {
    fn default() -> Self {
        BoundSection {
            models: vec!["ideal".into(), "leaky-0.5".into(), "leaky-1.0".into()],
            gin_seed: crate::fixtures::TIER_SEED,
        }
    }
}

fn parse_list<T: std::str::FromStr<Err = Error>>(xs: &[String]) -> Result<Vec<T>> {
    xs.iter().map(|s| s.parse()).collect()
}

impl RunConfig {
    /// Defaults everywhere except the seed.
    pub fn with_seed(seed: u64) -> Self {
        RunConfig {
            seed,
            workers: 1,
            out: None,
            dataset: DatasetSection::default(),
            metrics: MetricsSection::default(),
            model: ModelSection::default(),
            input: InputSection::default(),
            verify: VerifySection::default(),
            simulate: SimulateSection::default(),
            bound: BoundSection::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks every section that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        self.dataset_config()?;
        self.metric_params()?.validate()?;
        for path in [&self.input.dataset, &self.input.id, &self.input.ood, &self.model.params]
            .into_iter()
            .flatten()
        {
            if !path.is_file() {
                return Err(Error::Io(format!("{} does not exist", path.display())));
            }
        }
        for c in &self.verify.checks {
            if !ALL_CHECKS.contains(&c.as_str()) {
                return Err(Error::Parse(format!("unknown check `{c}`")));
            }
        }
        if self.simulate.irrelevant[0] > self.simulate.irrelevant[1] {
            return Err(Error::InvalidParameter("empty irrelevant range".into()));
        }
        Ok(())
    }

    pub fn dataset_config(&self) -> Result<DatasetConfig> {
        let d = &self.dataset;
        let family = match d.family.as_str() {
            "line" => DatasetFamily::Line(d.n),
            "star" => DatasetFamily::Star(d.n),
            "motif-basis" => DatasetFamily::MotifBasis,
            "bams" => DatasetFamily::Bams,
            other => return Err(Error::Parse(format!("unknown dataset family `{other}`"))),
        };
        let features = match d.features.as_str() {
            "constant" => FeatureMode::Constant { dim: d.feature_dim },
            "one-hot-degree" => FeatureMode::OneHotDegree {
                max_degree: d.max_degree,
            },
            "seeded-random" => FeatureMode::SeededRandom { dim: d.feature_dim },
            other => return Err(Error::Parse(format!("unknown feature mode `{other}`"))),
        };
        if d.base_size[0] > d.base_size[1] {
            return Err(Error::InvalidParameter("empty base size range".into()));
        }
        Ok(DatasetConfig {
            family,
            id_bases: parse_list::<BaseKind>(&d.id_bases)?,
            ood_bases: parse_list::<BaseKind>(&d.ood_bases)?,
            motifs: parse_list::<MotifKind>(&d.motifs)?,
            counts: d.counts,
            base_size: (d.base_size[0], d.base_size[1]),
            options: MotifGraphOptions {
                features,
                gt_includes_bridge: d.gt_includes_bridge,
            },
            seed: self.seed,
        })
    }

    pub fn metric_params(&self) -> Result<MetricParams> {
        let m = &self.metrics;
        let divergence = match m.divergence.as_str() {
            "l1" => Divergence::L1,
            "kl" => Divergence::kl(),
            "pred-likelihood" => Divergence::PredLikelihood { class: None },
            "pred-change" => Divergence::PredChange,
            other => return Err(Error::Parse(format!("unknown divergence `{other}`"))),
        };
        let mode = match m.mode.as_str() {
            "auto" => EstimationMode::Auto,
            "exact" => EstimationMode::Exact,
            "monte-carlo" => EstimationMode::MonteCarlo,
            other => return Err(Error::Parse(format!("unknown estimation mode `{other}`"))),
        };
        Ok(MetricParams {
            q1: m.q1,
            q2: m.q2,
            topk_ratios: m.topk_ratios.clone(),
            budget_ratio: m.budget_ratio,
            divergence,
            seed: self.seed,
            mode,
            bernoulli_keep: m.bernoulli_keep,
            stability_ratios: m.stability_ratios.clone(),
        })
    }

    /// SHA-256 of the configuration with the runtime knobs `workers` and
    /// `out` cleared, as lowercase hex.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = 1;
        canonical.out = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
