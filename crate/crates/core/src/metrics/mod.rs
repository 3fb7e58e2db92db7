//! Divergences, sufficiency/necessity estimators and agreement scores.

mod agreement;
mod divergence;
mod estimate;
mod legacy;

pub use agreement::{mcc, pearson, stability, wiou};
pub use divergence::{delta, kl_unclamped_infinite, Divergence};
pub use estimate::{
    exact_expectation, expectation, faith, faith_at, faith_best, monte_carlo, nec_raw, normalize_nec,
    normalize_suf, suf_raw, Estimate, EstimationMode, FaithValue, MetricParams, EXACT_AUTO_LIMIT,
};
pub use legacy::{legacy_metric, LegacyMetric};
