//! Line-delimited JSON records for graphs and GIN parameters.
//!
//! A graph record is one JSON object per line:
//!
//! ```text
//! {"kind":"graph","node_count":3,"edges":[[0,1],[1,2]],"feature_dim":1,
//!  "features":[1.0,1.0,1.0],"graph_label":0,"node_labels":null,"ground_truth_mask":[1.0,0.0]}
//! ```
//!
//! `features` is row-major with `feature_dim` entries per node. Floats are
//! written in shortest round-trip form, so reading back is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AnnotatedGraph, Edge, EdgeMask};
use crate::models::GinParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub node_count: usize,
    pub edges: Vec<[usize; 2]>,
    pub feature_dim: usize,
    pub features: Vec<f64>,
    pub graph_label: Option<usize>,
    pub node_labels: Option<Vec<usize>>,
    pub ground_truth_mask: Option<Vec<f64>>,
}

/// One line of a record file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Graph(GraphRecord),
    Gin(GinParams),
}

impl From<&AnnotatedGraph> for GraphRecord {
    fn from(g: &AnnotatedGraph) -> Self {
        GraphRecord {
            node_count: g.node_count(),
            edges: g.edges().iter().map(|e| e.endpoints().into()).collect(),
            feature_dim: g.feature_dim(),
            features: g.features().concat(),
            graph_label: g.graph_label(),
            node_labels: g.node_labels().map(<[usize]>::to_vec),
            ground_truth_mask: g.ground_truth().map(|m| m.scores().to_vec()),
        }
    }
}

impl TryFrom<GraphRecord> for AnnotatedGraph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        if r.features.len() != r.node_count * r.feature_dim {
            return Err(Error::ShapeError(format!(
                "{} feature values for {} nodes of dimension {}",
                r.features.len(),
                r.node_count,
                r.feature_dim
            )));
        }
        let rows = (0..r.node_count)
            .map(|u| r.features[u * r.feature_dim..(u + 1) * r.feature_dim].to_vec())
            .collect();
        let edges = r.edges.iter().map(|&[a, b]| Edge::new(a, b)).collect();
        let mask = r.ground_truth_mask.map(EdgeMask::new).transpose()?;
        AnnotatedGraph::new(r.node_count, edges, rows)?
            .with_graph_label(r.graph_label)
            .with_node_labels(r.node_labels)?
            .with_ground_truth(mask)
    }
}

pub fn graph_to_line(g: &AnnotatedGraph) -> Result<String> {
    Ok(serde_json::to_string(&Record::Graph(g.into()))?)
}

pub fn graph_from_line(line: &str) -> Result<AnnotatedGraph> {
    match serde_json::from_str(line)? {
        Record::Graph(r) => r.try_into(),
        Record::Gin(_) => Err(Error::Parse("expected a graph record, found gin".into())),
    }
}

pub fn write_graphs<W: Write>(mut w: W, graphs: &[AnnotatedGraph]) -> Result<()> {
    for g in graphs {
        writeln!(w, "{}", graph_to_line(g)?)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every non-blank line as a graph record.
pub fn read_graphs<R: BufRead>(r: R) -> Result<Vec<AnnotatedGraph>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(graph_from_line(&line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

pub fn save_graphs(path: impl AsRef<Path>, graphs: &[AnnotatedGraph]) -> Result<()> {
    write_graphs(BufWriter::new(File::create(path)?), graphs)
}

pub fn load_graphs(path: impl AsRef<Path>) -> Result<Vec<AnnotatedGraph>> {
    read_graphs(BufReader::new(File::open(path)?))
}

pub fn gin_to_line(p: &GinParams) -> Result<String> {
    Ok(serde_json::to_string(&Record::Gin(p.clone()))?)
}

pub fn gin_from_line(line: &str) -> Result<GinParams> {
    match serde_json::from_str(line)? {
        Record::Gin(p) => {
            p.validate()?;
            Ok(p)
        }
        Record::Graph(_) => Err(Error::Parse("expected a gin record, found graph".into())),
    }
}

pub fn save_gin(path: impl AsRef<Path>, p: &GinParams) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", gin_to_line(p)?)?;
    w.flush()?;
    Ok(())
}

/// Reads the first non-blank line of `path` as GIN parameters.
pub fn load_gin(path: impl AsRef<Path>) -> Result<GinParams> {
    let text = std::fs::read_to_string(path)?;
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse("empty parameter file".into()))?;
    gin_from_line(line)
}
