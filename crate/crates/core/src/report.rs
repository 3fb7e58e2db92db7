//! Comma-separated report tables. Floats are printed with 6 decimals, so a
//! table parsed back and printed again is byte-identical.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::invariance::BoundReport;

pub const METRIC_COLUMNS: [&str; 10] = [
    "graph_id", "ratio", "suf_raw", "suf_n", "nec_raw", "nec_n", "faith", "wiou", "stability", "failures",
];

pub const BOUND_COLUMNS: [&str; 11] = [
    "model",
    "lhs",
    "lambda_topo_id",
    "lambda_topo_ood",
    "lambda_feat_id",
    "lambda_feat_ood",
    "lambda_suff_id",
    "lambda_suff_ood",
    "id_count",
    "ood_count",
    "failures",
];

/// One graph at its selected ratio. Missing values (a failed evaluation, an
/// undefined plausibility) print as empty cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricRow {
    pub graph_id: usize,
    pub ratio: Option<f64>,
    pub suf_raw: Option<f64>,
    pub suf_n: Option<f64>,
    pub nec_raw: Option<f64>,
    pub nec_n: Option<f64>,
    pub faith: Option<f64>,
    pub wiou: Option<f64>,
    pub stability: Option<f64>,
    pub failures: usize,
}

impl MetricRow {
    fn values(&self) -> [Option<f64>; 8] {
        [
            self.ratio,
            self.suf_raw,
            self.suf_n,
            self.nec_raw,
            self.nec_n,
            self.faith,
            self.wiou,
            self.stability,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

/// Mean and sample standard deviation of the present values.
pub fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map(|x| format!("{x:.decimals$}")).unwrap_or_default()
}

fn parse_cell(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

fn parse_count(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("bad count `{s}`")))
}

fn check_header(line: Option<&str>, columns: &[&str]) -> Result<()> {
    if line != Some(columns.join(",").as_str()) {
        return Err(Error::Parse("unexpected table header".into()));
    }
    Ok(())
}

impl MetricReport {
    /// Total failed evaluations.
    pub fn failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }

    /// Column-wise mean and sample standard deviation of the value columns.
    pub fn aggregate(&self) -> [(Option<f64>, Option<f64>); 8] {
        std::array::from_fn(|j| {
            let xs: Vec<f64> = self.rows.iter().filter_map(|r| r.values()[j]).collect();
            mean_std(&xs)
        })
    }

    /// Per-graph rows, then `mean` and `std` rows, then the same two scaled
    /// by 100 at 2 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = METRIC_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{}", r.graph_id);
            for v in r.values() {
                let _ = write!(out, ",{}", cell(v, 6));
            }
            let _ = writeln!(out, ",{}", r.failures);
        }
        let agg = self.aggregate();
        let total = self.failures();
        for (name, scale, decimals, pick) in [
            ("mean", 1.0, 6, 0),
            ("std", 1.0, 6, 1),
            ("mean_x100", 100.0, 2, 0),
            ("std_x100", 100.0, 2, 1),
        ] {
            out.push_str(name);
            for (mean, std) in agg {
                let v = if pick == 0 { mean } else { std };
                let _ = write!(out, ",{}", cell(v.map(|x| x * scale), decimals));
            }
            let _ = writeln!(out, ",{total}");
        }
        out
    }

    /// Reads the per-graph rows back; aggregate rows are recomputed, not read.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        check_header(lines.next(), &METRIC_COLUMNS)?;
        let mut rows = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != METRIC_COLUMNS.len() {
                return Err(Error::Parse(format!("expected {} cells: `{line}`", METRIC_COLUMNS.len())));
            }
            let Ok(graph_id) = f[0].parse() else {
                continue; // aggregate row
            };
            rows.push(MetricRow {
                graph_id,
                ratio: parse_cell(f[1])?,
                suf_raw: parse_cell(f[2])?,
                suf_n: parse_cell(f[3])?,
                nec_raw: parse_cell(f[4])?,
                nec_n: parse_cell(f[5])?,
                faith: parse_cell(f[6])?,
                wiou: parse_cell(f[7])?,
                stability: parse_cell(f[8])?,
                failures: parse_count(f[9])?,
            });
        }
        Ok(MetricReport { rows })
    }
}

/// Bound terms for several models, one row each.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundTable {
    pub rows: Vec<(String, BoundReport)>,
}

impl BoundTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut out = BOUND_COLUMNS.join(",");
        out.push('\n');
        for (name, b) in &self.rows {
            if name.is_empty() || name.contains([',', '\n']) {
                return Err(Error::InvalidParameter(format!("model name `{name}` is not a plain cell")));
            }
            out.push_str(name);
            for v in [
                b.lhs,
                b.lambda_topo_id,
                b.lambda_topo_ood,
                b.lambda_feat_id,
                b.lambda_feat_ood,
                b.lambda_suff_id,
                b.lambda_suff_ood,
            ] {
                let _ = write!(out, ",{v:.6}");
            }
            let _ = writeln!(out, ",{},{},{}", b.id_count, b.ood_count, b.failures);
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        check_header(lines.next(), &BOUND_COLUMNS)?;
        let mut rows = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != BOUND_COLUMNS.len() {
                return Err(Error::Parse(format!("expected {} cells: `{line}`", BOUND_COLUMNS.len())));
            }
            let num = |i: usize| parse_cell(f[i])?.ok_or_else(|| Error::Parse("empty cell".into()));
            rows.push((
                f[0].to_string(),
                BoundReport {
                    lhs: num(1)?,
                    lambda_topo_id: num(2)?,
                    lambda_topo_ood: num(3)?,
                    lambda_feat_id: num(4)?,
                    lambda_feat_ood: num(5)?,
                    lambda_suff_id: num(6)?,
                    lambda_suff_ood: num(7)?,
                    id_count: parse_count(f[8])?,
                    ood_count: parse_count(f[9])?,
                    failures: parse_count(f[10])?,
                },
            ));
        }
        Ok(BoundTable { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, Some(2.5));
        assert!((s.unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (Some(7.0), None));
    }

    #[test]
    fn metric_table_round_trips_at_printed_precision() {
        let report = MetricReport {
            rows: vec![
                MetricRow {
                    graph_id: 0,
                    ratio: Some(0.3),
                    suf_raw: Some(0.123_456_789),
                    suf_n: Some(0.9),
                    nec_raw: Some(1.0 / 3.0),
                    nec_n: Some(0.25),
                    faith: Some(0.4),
                    wiou: None,
                    stability: Some(-0.5),
                    failures: 0,
                },
                MetricRow {
                    graph_id: 1,
                    failures: 3,
                    ..MetricRow::default()
                },
            ],
        };
        let text = report.to_csv();
        assert!(text.contains("\n0,0.300000,0.123457,"));
        assert!(text.contains("\nmean_x100,30.00,"));
        let again = MetricReport::from_csv(&text).unwrap();
        assert_eq!(again.rows.len(), 2);
        assert_eq!(again.to_csv(), text);
    }

    #[test]
    fn bound_table_round_trips() {
        let b = BoundReport {
            lhs: 0.125,
            lambda_topo_id: 0.0,
            lambda_topo_ood: 0.0,
            lambda_feat_id: 0.0,
            lambda_feat_ood: 1.0 / 7.0,
            lambda_suff_id: 0.2,
            lambda_suff_ood: 0.3,
            id_count: 4,
            ood_count: 5,
            failures: 1,
        };
        let t = BoundTable {
            rows: vec![("ideal".into(), b)],
        };
        let text = t.to_csv().unwrap();
        assert_eq!(BoundTable::from_csv(&text).unwrap().to_csv().unwrap(), text);
        let bad = BoundTable {
            rows: vec![("a,b".into(), t.rows[0].1.clone())],
        };
        assert!(bad.to_csv().is_err());
    }
}
