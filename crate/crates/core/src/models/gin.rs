use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AnnotatedGraph, LabelDistribution};
use crate::models::{Classifier, Locality};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    Sum,
    Mean,
}

/// Architectural switches. `hs`: binarize attached edge scores at 0.5.
/// `cf`: a modular classifier stage reads raw features instead of backbone
/// embeddings. `er`: scale node embeddings by their mean incident edge score
/// before readout. `la`: local aggregation only; when false a zero-feature
/// virtual node adjacent to every node takes part in message passing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Switches {
    pub hs: bool,
    pub cf: bool,
    pub er: bool,
    pub la: bool,
}

impl Default for Switches {
    fn default() -> Self {
        Switches {
            hs: false,
            cf: true,
            er: false,
            la: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GinLayer {
    pub eps: f64,
    /// d×d, row-major.
    pub weight: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GinParams {
    pub layers: Vec<GinLayer>,
    pub readout: Readout,
    /// d×c, row-major.
    pub output: Vec<Vec<f64>>,
    pub switches: Switches,
}

fn seeded_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-1.0..=1.0) * scale).collect())
        .collect()
}

impl GinParams {
    /// Parameters drawn uniformly from `[-1, 1] / sqrt(d)`.
    pub fn seeded(dim: usize, classes: usize, layers: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (dim.max(1) as f64).sqrt();
        let layers = (0..layers)
            .map(|_| GinLayer {
                eps: rng.gen_range(-1.0..=1.0) * scale,
                weight: seeded_matrix(dim, dim, scale, &mut rng),
            })
            .collect();
        let output = seeded_matrix(dim, classes, scale, &mut rng);
        GinParams {
            layers,
            readout: Readout::Sum,
            output,
            switches: Switches::default(),
        }
    }

    pub fn with_switches(mut self, switches: Switches) -> Self {
        self.switches = switches;
        self
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn dim(&self) -> usize {
        self.output.len()
    }

    pub fn classes(&self) -> usize {
        self.output.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let c = self.classes();
        if c == 0 || self.output.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeError("output matrix is ragged or empty".into()));
        }
        for layer in &self.layers {
            if layer.weight.len() != d || layer.weight.iter().any(|row| row.len() != d) {
                return Err(Error::ShapeError("layer weights are not d×d".into()));
            }
        }
        let finite = self
            .layers
            .iter()
            .flat_map(|l| l.weight.iter().flatten().chain(std::iter::once(&l.eps)))
            .chain(self.output.iter().flatten())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite GIN parameter".into()));
        }
        Ok(())
    }

    fn check_inputs(&self, g: &AnnotatedGraph, weights: Option<&[f64]>, features: Option<&[Vec<f64>]>) -> Result<()> {
        let d = self.dim();
        match features {
            Some(f) => {
                if f.len() != g.node_count() || f.iter().any(|row| row.len() != d) {
                    return Err(Error::ShapeError("feature override does not match the graph".into()));
                }
            }
            None => {
                if g.node_count() > 0 && g.feature_dim() != d {
                    return Err(Error::ShapeError(format!(
                        "model expects dimension {d}, graph has {}",
                        g.feature_dim()
                    )));
                }
            }
        }
        if let Some(w) = weights {
            if w.len() != g.edge_count() {
                return Err(Error::ShapeError("edge weights do not match the graph".into()));
            }
        }
        Ok(())
    }

    fn effective_weights(&self, g: &AnnotatedGraph, weights: Option<&[f64]>) -> Vec<f64> {
        match weights {
            Some(w) if self.switches.hs => w.iter().map(|&s| if s >= 0.5 { 1.0 } else { 0.0 }).collect(),
            Some(w) => w.to_vec(),
            None => vec![1.0; g.edge_count()],
        }
    }

    /// Final-layer node embeddings of the real nodes.
    pub fn embed(
        &self,
        g: &AnnotatedGraph,
        weights: Option<&[f64]>,
        features: Option<&[Vec<f64>]>,
    ) -> Result<Vec<Vec<f64>>> {
        self.check_inputs(g, weights, features)?;
        let w = self.effective_weights(g, weights);
        Ok(self.propagate(g, &w, features.unwrap_or(g.features())))
    }

    fn propagate(&self, g: &AnnotatedGraph, w: &[f64], x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = g.node_count();
        let d = self.dim();
        let virtual_node = !self.switches.la;
        let mut h: Vec<Vec<f64>> = x.to_vec();
        if virtual_node {
            h.push(vec![0.0; d]);
        }
        for layer in &self.layers {
            let mut next = Vec::with_capacity(h.len());
            for u in 0..h.len() {
                let mut agg: Vec<f64> = h[u].iter().map(|v| (1.0 + layer.eps) * v).collect();
                if u < n {
                    for &(v, e) in g.neighbors(u) {
                        for k in 0..d {
                            agg[k] += w[e] * h[v][k];
                        }
                    }
                    if virtual_node {
                        for k in 0..d {
                            agg[k] += h[n][k];
                        }
                    }
                } else {
                    for hv in &h[..n] {
                        for k in 0..d {
                            agg[k] += hv[k];
                        }
                    }
                }
                next.push(
                    layer
                        .weight
                        .iter()
                        .map(|row| row.iter().zip(&agg).map(|(a, b)| a * b).sum::<f64>().max(0.0))
                        .collect(),
                );
            }
            h = next;
        }
        h.truncate(n);
        h
    }

    fn logits(&self, h: &[f64]) -> Vec<f64> {
        (0..self.classes())
            .map(|k| h.iter().zip(&self.output).map(|(x, row)| x * row[k]).sum())
            .collect()
    }

    /// Forward pass with optional attached edge scores and feature override.
    /// `target = Some(u)` selects the node task.
    pub fn forward(
        &self,
        g: &AnnotatedGraph,
        weights: Option<&[f64]>,
        features: Option<&[Vec<f64>]>,
        target: Option<usize>,
    ) -> Result<LabelDistribution> {
        self.check_inputs(g, weights, features)?;
        let w = self.effective_weights(g, weights);
        let h = self.propagate(g, &w, features.unwrap_or(g.features()));
        if let Some(u) = target {
            g.check_node(u)?;
            return Ok(LabelDistribution::softmax(&self.logits(&h[u])));
        }
        let d = self.dim();
        let node_mask: Vec<f64> = if self.switches.er && weights.is_some() {
            (0..g.node_count())
                .map(|u| {
                    let nb = g.neighbors(u);
                    if nb.is_empty() {
                        0.0
                    } else {
                        nb.iter().map(|&(_, e)| w[e]).sum::<f64>() / nb.len() as f64
                    }
                })
                .collect()
        } else {
            vec![1.0; g.node_count()]
        };
        let mut pooled = vec![0.0; d];
        for (hu, m) in h.iter().zip(&node_mask) {
            for k in 0..d {
                pooled[k] += m * hu[k];
            }
        }
        if self.readout == Readout::Mean {
            let total: f64 = node_mask.iter().sum();
            if total > 0.0 {
                pooled.iter_mut().for_each(|x| *x /= total);
            }
        }
        Ok(LabelDistribution::softmax(&self.logits(&pooled)))
    }
}

impl Classifier for GinParams {
    fn class_count(&self) -> usize {
        self.classes()
    }

    fn locality(&self) -> Locality {
        if self.switches.la {
            Locality::Local(self.layers.len())
        } else {
            Locality::Global
        }
    }

    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution> {
        self.forward(g, None, None, target)
    }
}

/// One-layer GIN with seed-1 parameters, used for node-level line examples.
#[derive(Clone, Debug)]
pub struct LineToy {
    params: GinParams,
}

impl LineToy {
    pub fn new(dim: usize) -> Self {
        LineToy {
            params: GinParams::seeded(dim, 2, 1, 1),
        }
    }

    pub fn params(&self) -> &GinParams {
        &self.params
    }
}

impl Classifier for LineToy {
    fn class_count(&self) -> usize {
        2
    }

    fn locality(&self) -> Locality {
        Locality::Local(1)
    }

    fn evaluate(&self, g: &AnnotatedGraph, target: Option<usize>) -> Result<LabelDistribution> {
        self.params.forward(g, None, None, target)
    }
}
