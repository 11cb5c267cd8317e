//! Evaluation report schema.
//!
//! Metric names form a dotted namespace (`rouge1.f1`, `overlap.n2`,
//! `structure_similarity`) shared by CSV columns and the comparison tooling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::text_metrics::Prf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMetrics {
    pub id: String,
    pub rouge1: Prf,
    pub rouge2: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
    pub structure_similarity: Option<f64>,
    pub prediction_length_words: usize,
    pub overlap: Option<Overlap>,
}

/// Means of the per-record fields; optional fields average over the records
/// that carry them and stay `None` when none do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub records: usize,
    pub rouge1: Prf,
    pub rouge2: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
    pub structure_similarity: Option<f64>,
    pub prediction_length_words: f64,
    pub overlap: Option<Overlap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub toolkit_version: String,
    #[serde(default)]
    pub config: serde_json::Value,
    pub per_record: Vec<RecordMetrics>,
    pub aggregate: AggregateMetrics,
    pub wall_clock_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<BTreeMap<String, f64>>,
}

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every metric name accepted by [`RecordMetrics::metric`], in CSV column
/// order.
pub const METRIC_NAMES: [&str; 14] = [
    "rouge1.p",
    "rouge1.r",
    "rouge1.f1",
    "rouge2.p",
    "rouge2.r",
    "rouge2.f1",
    "rougeL.p",
    "rougeL.r",
    "rougeL.f1",
    "structure_similarity",
    "prediction_length_words",
    "overlap.n1",
    "overlap.n2",
    "overlap.n3",
];

fn prf_field(prf: &Prf, field: &str) -> Option<f64> {
    match field {
        "p" => Some(prf.precision),
        "r" => Some(prf.recall),
        "f1" => Some(prf.f1),
        _ => None,
    }
}

fn overlap_field(overlap: &Overlap, field: &str) -> Option<f64> {
    match field {
        "n1" => Some(overlap.n1),
        "n2" => Some(overlap.n2),
        "n3" => Some(overlap.n3),
        _ => None,
    }
}

pub fn is_known_metric(name: &str) -> bool {
    METRIC_NAMES.contains(&name)
}

impl RecordMetrics {
    /// Looks up a dotted metric name. Returns `None` for unknown names and
    /// for optional metrics absent on this record.
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name.split_once('.') {
            Some(("rouge1", f)) => prf_field(&self.rouge1, f),
            Some(("rouge2", f)) => prf_field(&self.rouge2, f),
            Some(("rougeL", f)) => prf_field(&self.rouge_l, f),
            Some(("overlap", f)) => self.overlap.as_ref().and_then(|o| overlap_field(o, f)),
            Some(_) => None,
            None => match name {
                "structure_similarity" => self.structure_similarity,
                "prediction_length_words" => Some(self.prediction_length_words as f64),
                _ => None,
            },
        }
    }
}

impl AggregateMetrics {
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name.split_once('.') {
            Some(("rouge1", f)) => prf_field(&self.rouge1, f),
            Some(("rouge2", f)) => prf_field(&self.rouge2, f),
            Some(("rougeL", f)) => prf_field(&self.rouge_l, f),
            Some(("overlap", f)) => self.overlap.as_ref().and_then(|o| overlap_field(o, f)),
            Some(_) => None,
            None => match name {
                "structure_similarity" => self.structure_similarity,
                "prediction_length_words" => Some(self.prediction_length_words),
                _ => None,
            },
        }
    }

    pub fn from_records(records: &[RecordMetrics]) -> Self {
        fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
            let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            (n > 0).then(|| sum / n as f64)
        }
        let prf = |get: fn(&RecordMetrics) -> &Prf| Prf {
            precision: mean(records.iter().map(|r| get(r).precision)).unwrap_or(0.0),
            recall: mean(records.iter().map(|r| get(r).recall)).unwrap_or(0.0),
            f1: mean(records.iter().map(|r| get(r).f1)).unwrap_or(0.0),
        };
        let with_overlap: Vec<&Overlap> = records.iter().filter_map(|r| r.overlap.as_ref()).collect();
        let overlap = (!with_overlap.is_empty()).then(|| Overlap {
            n1: mean(with_overlap.iter().map(|o| o.n1)).unwrap_or(0.0),
            n2: mean(with_overlap.iter().map(|o| o.n2)).unwrap_or(0.0),
            n3: mean(with_overlap.iter().map(|o| o.n3)).unwrap_or(0.0),
        });
        Self {
            records: records.len(),
            rouge1: prf(|r| &r.rouge1),
            rouge2: prf(|r| &r.rouge2),
            rouge_l: prf(|r| &r.rouge_l),
            structure_similarity: mean(records.iter().filter_map(|r| r.structure_similarity)),
            prediction_length_words: mean(records.iter().map(|r| r.prediction_length_words as f64))
                .unwrap_or(0.0),
            overlap,
        }
    }
}

impl EvalReport {
    pub fn new(per_record: Vec<RecordMetrics>, config: serde_json::Value, wall_clock_seconds: f64) -> Self {
        let aggregate = AggregateMetrics::from_records(&per_record);
        Self {
            toolkit_version: TOOLKIT_VERSION.to_string(),
            config,
            per_record,
            aggregate,
            wall_clock_seconds,
            external: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prf(v: f64) -> Prf {
        Prf {
            precision: v,
            recall: v,
            f1: v,
        }
    }

    fn record(id: &str, v: f64, ss: Option<f64>) -> RecordMetrics {
        RecordMetrics {
            id: id.into(),
            rouge1: prf(v),
            rouge2: prf(v / 2.0),
            rouge_l: prf(v),
            structure_similarity: ss,
            prediction_length_words: 10,
            overlap: None,
        }
    }

    #[test]
    fn aggregate_skips_absent_fields() {
        let recs = vec![record("a", 1.0, Some(0.5)), record("b", 0.5, None)];
        let agg = AggregateMetrics::from_records(&recs);
        assert_eq!(agg.rouge1.f1, 0.75);
        assert_eq!(agg.rouge2.precision, 0.375);
        assert_eq!(agg.structure_similarity, Some(0.5));
        assert_eq!(agg.overlap, None);
        assert_eq!(agg.prediction_length_words, 10.0);
    }

    #[test]
    fn metric_namespace() {
        let r = record("a", 1.0, None);
        assert_eq!(r.metric("rouge2.f1"), Some(0.5));
        assert_eq!(r.metric("rougeL.p"), Some(1.0));
        assert_eq!(r.metric("structure_similarity"), None);
        assert_eq!(r.metric("bleu"), None);
        assert!(METRIC_NAMES.iter().all(|m| is_known_metric(m)));
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("rougeL").is_some());
    }
}
