use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{AnnotatedGraph, EdgeMask, LabelDistribution};
use crate::models::{Classifier, GinParams, Locality};

/// Produces per-edge relevance scores for a graph.
pub trait Detector: Send + Sync {
    fn detect(&self, g: &AnnotatedGraph) -> Result<EdgeMask>;
}

/// Scores ground-truth edges 1 and every other edge `complement_score`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundTruthDetector {
    pub complement_score: f64,
}

impl GroundTruthDetector {
    pub fn ideal() -> Self {
        GroundTruthDetector { complement_score: 0.0 }
    }

    pub fn leaky(complement_score: f64) -> Self {
        GroundTruthDetector { complement_score }
    }
}

impl Detector for GroundTruthDetector {
    fn detect(&self, g: &AnnotatedGraph) -> Result<EdgeMask> {
        let gt = g.ground_truth().ok_or(Error::MissingGroundTruth)?;
        EdgeMask::new(
            gt.scores()
                .iter()
                .map(|&s| if s == 1.0 { 1.0 } else { self.complement_score })
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantDetector {
    pub score: f64,
}

impl Detector for ConstantDetector {
    fn detect(&self, g: &AnnotatedGraph) -> Result<EdgeMask> {
        EdgeMask::new(vec![self.score; g.edge_count()])
    }
}

type DetectFn = dyn Fn(&AnnotatedGraph) -> Result<EdgeMask> + Send + Sync;

/// Detector backed by a closure.
#[derive(Clone)]
pub struct FnDetector(pub Arc<DetectFn>);

impl FnDetector {
    pub fn new(f: impl Fn(&AnnotatedGraph) -> Result<EdgeMask> + Send + Sync + 'static) -> Self {
        FnDetector(Arc::new(f))
    }
}

impl Detector for FnDetector {
    fn detect(&self, g: &AnnotatedGraph) -> Result<EdgeMask> {
        (self.0)(g)
    }
}

impl fmt::Debug for FnDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnDetector")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskingMode {
    /// Multiply messages by edge scores.
    SoftScale,
    /// Binarize at 0.5 and delete the complement.
    HardSubgraph,
}

#[derive(Clone)]
pub enum Stage {
    Gin(GinParams),
    Opaque(Arc<dyn Classifier>),
}

/// Detector followed by a classifier that only sees the masked graph.
#[derive(Clone)]
pub struct ModularModel {
    pub detector: Arc<dyn Detector>,
    pub stage: Stage,
    pub mode: MaskingMode,
    /// Embeds the full input graph when the stage's `cf` switch is off.
    pub backbone: Option<GinParams>,
}

impl ModularModel {
    pub fn new(detector: impl Detector + 'static, stage: Stage, mode: MaskingMode) -> Self {
        ModularModel {
            detector: Arc::new(detector),
            stage,
            mode,
            backbone: None,
        }
    }

    pub fn with_backbone(mut self, backbone: GinParams) -> Self {
        self.backbone = Some(backbone);
        self
    }

    fn hard_scores(&self) -> bool {
        match &self.stage {
            Stage::Gin(p) => p.switches.hs,
            Stage::Opaque(_) => true,
        }
    }

    fn content_features(&self) -> bool {
        match &self.stage {
            Stage::Gin(p) => p.switches.cf,
            Stage::Opaque(_) => true,
        }
    }

    /// Runs detector and classifier, returning both the mask and the output.
    pub fn forward(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<(EdgeMask, LabelDistribution)> {
        let mask = self.detector.detect(g)?;
        mask.check_domain(g)?;
        let override_features = if self.content_features() {
            None
        } else {
            let backbone = self
                .backbone
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("cf = false needs a backbone".into()))?;
            Some(backbone.embed(g, None, None)?)
        };
        let binarized: Vec<f64> = mask.scores().iter().map(|&s| if s >= 0.5 { 1.0 } else { 0.0 }).collect();
        let (seen, weights) = match self.mode {
            MaskingMode::HardSubgraph => {
                let drop: Vec<bool> = binarized.iter().map(|&s| s == 0.0).collect();
                let h = g.without_edges(&drop);
                let ones = vec![1.0; h.edge_count()];
                (h, ones)
            }
            MaskingMode::SoftScale => {
                let w = if self.hard_scores() { binarized } else { mask.scores().to_vec() };
                (g.clone(), w)
            }
        };
        let out = match &self.stage {
            Stage::Gin(p) => p.forward(&seen, Some(&weights), override_features.as_deref(), target)?,
            Stage::Opaque(c) => {
                if self.mode == MaskingMode::SoftScale {
                    return Err(Error::InvalidParameter("soft masking needs a message-passing stage".into()));
                }
                match override_features {
                    Some(f) => c.evaluate(&seen.with_features(f)?, target)?,
                    None => c.evaluate(&seen, target)?,
                }
            }
        };
        Ok((mask, out))
    }
}

impl Classifier for ModularModel {
    fn class_count(&self) -> usize {
        match &self.stage {
            Stage::Gin(p) => p.classes(),
            Stage::Opaque(c) => c.class_count(),
        }
    }

    fn locality(&self) -> Locality {
        Locality::Global
    }

    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution> {
        self.forward(g, target).map(|(_, out)| out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::MotifClassifier;
    use crate::motifs::MotifKind;

    fn house_on_path() -> AnnotatedGraph {
        let mut pairs = vec![(0, 1), (1, 2)];
        pairs.extend(MotifKind::House.edges().into_iter().map(|(a, b)| (a + 3, b + 3)));
        pairs.push((2, 3));
        let gt: Vec<bool> = (0..pairs.len()).map(|i| (2..8).contains(&i)).collect();
        AnnotatedGraph::from_pairs(8, &pairs)
            .unwrap()
            .with_ground_truth(Some(EdgeMask::from_bits(&gt)))
            .unwrap()
    }

    #[test]
    fn all_ones_detector_in_hard_mode_is_transparent() {
        let g = house_on_path();
        let model = ModularModel::new(
            ConstantDetector { score: 1.0 },
            Stage::Opaque(Arc::new(MotifClassifier::single())),
            MaskingMode::HardSubgraph,
        );
        assert_eq!(
            model.evaluate(&g, None).unwrap(),
            MotifClassifier::single().evaluate(&g, None).unwrap()
        );
    }

    #[test]
    fn ground_truth_detector_recovers_the_motif_class() {
        let g = house_on_path();
        let model = ModularModel::new(
            GroundTruthDetector::ideal(),
            Stage::Opaque(Arc::new(MotifClassifier::single())),
            MaskingMode::HardSubgraph,
        );
        let (mask, out) = model.forward(&g, None).unwrap();
        assert_eq!(&mask, g.ground_truth().unwrap());
        assert_eq!(out, LabelDistribution::one_hot(3, 0));
    }
}
