//! Classifier interface and the deterministic toy models.

mod gin;
mod hash;
mod modular;
mod motif;

pub use gin::{GinLayer, GinParams, LineToy, Readout, Switches};
pub use hash::{distribution_from_digest, HashClassifier};
pub use modular::{
    ConstantDetector, Detector, FnDetector, GroundTruthDetector, MaskingMode, ModularModel, Stage,
};
pub use motif::{contains_motif, MotifClassifier, MotifRule};

use crate::error::Result;
use crate::graph::{AnnotatedGraph, LabelDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locality {
    /// Node predictions read only the `L`-hop neighbourhood.
    Local(usize),
    Global,
}

/// Anything mapping a graph (and optional target node) to class probabilities.
/// Implementations must be deterministic and invariant to node relabeling.
pub trait Classifier: Send + Sync {
    fn class_count(&self) -> usize;
    fn locality(&self) -> Locality;
    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution>;
}

/// Returns the same distribution for every input.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantClassifier {
    probs: LabelDistribution,
}

impl ConstantClassifier {
    pub fn new(probs: LabelDistribution) -> Self {
        ConstantClassifier { probs }
    }
}

impl Classifier for ConstantClassifier {
    fn class_count(&self) -> usize {
        self.probs.classes()
    }

    fn locality(&self) -> Locality {
        Locality::Local(0)
    }

    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution> {
        if let Some(u) = target {
            g.check_node(u)?;
        }
        Ok(self.probs.clone())
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn class_count(&self) -> usize {
        (**self).class_count()
    }

    fn locality(&self) -> Locality {
        (**self).locality()
    }

    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution> {
        (**self).evaluate(g, target)
    }
}

impl<C: Classifier + ?Sized> Classifier for std::sync::Arc<C> {
    fn class_count(&self) -> usize {
        (**self).class_count()
    }

    fn locality(&self) -> Locality {
        (**self).locality()
    }

    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution> {
        (**self).evaluate(g, target)
    }
}
