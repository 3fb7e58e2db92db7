//! Faithfulness metrics for subgraph explanations of graph classifiers:
//! interventional perturbation distributions, sufficiency and necessity
//! estimators, toy classifiers, synthetic datasets and brute-force oracles.

pub mod canon;
pub mod error;
pub mod graph;
pub mod invariance;
pub mod io;
pub mod metrics;
pub mod models;
pub mod motifs;
pub mod oracles;
pub mod perturb;
pub mod report;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{AnnotatedGraph, Edge, EdgeMask, Explanation, LabelDistribution};
