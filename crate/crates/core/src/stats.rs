//! Paired bootstrap confidence intervals for per-record metric differences.
//!
//! Resample `k` (0-based) draws `n` indices from its own stream
//! `SplitMix64(stream_seed(seed, [k]))` with `index(n)`, averages
//! `a[i] - b[i]` over the drawn indices in draw order, and the interval is
//! read off the sorted resample means with type-7 quantiles:
//! `h = (m - 1) * p`, `q = x[floor(h)] + (h - floor(h)) * (x[floor(h) + 1] - x[floor(h)])`
//! at `p = (1 - confidence) / 2` and `p = (1 + confidence) / 2`. Streams are
//! independent per resample, so the work can be split across threads
//! without changing the result.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::{is_known_metric, EvalReport};
use crate::rng::{stream_seed, SplitMix64};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("invalid paired samples: {0}")]
    InvalidSamples(String),
    #[error("confidence must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error("resample count must be positive")]
    NoResamples,
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("record ids differ: missing from a {missing_in_a:?}, missing from b {missing_in_b:?}")]
    IdMismatch {
        missing_in_a: Vec<String>,
        missing_in_b: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    ids: Vec<String>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSamples {
    pub fn new(ids: Vec<String>, a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        if ids.is_empty() {
            return Err(StatsError::InvalidSamples("no samples".into()));
        }
        if a.len() != ids.len() || b.len() != ids.len() {
            return Err(StatsError::InvalidSamples(format!(
                "length mismatch: {} ids, {} a, {} b",
                ids.len(),
                a.len(),
                b.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(StatsError::InvalidSamples(format!("duplicate id {dup:?}")));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(StatsError::InvalidSamples("non-finite value".into()));
        }
        Ok(Self { ids, a, b })
    }

    /// Samples with generated ids `0..n`.
    pub fn unlabeled(a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        let ids = (0..a.len()).map(|i| i.to_string()).collect();
        Self::new(ids, a, b)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn swapped(&self) -> Self {
        Self {
            ids: self.ids.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    fn diffs(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mean_diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub resamples: usize,
    pub significant: bool,
}

/// Type-7 quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bootstrap means of the paired differences, in resample order.
pub fn resample_means(samples: &PairedSamples, resamples: usize, seed: u64) -> Vec<f64> {
    let diffs = samples.diffs();
    let n = diffs.len();
    (0..resamples)
        .into_par_iter()
        .map(|k| {
            let mut rng = SplitMix64::new(stream_seed(seed, &[k as u64]));
            let sum: f64 = (0..n).map(|_| diffs[rng.index(n)]).sum();
            sum / n as f64
        })
        .collect()
}

pub fn paired_bootstrap(
    samples: &PairedSamples,
    confidence: f64,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult, StatsError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::InvalidConfidence(confidence));
    }
    if resamples == 0 {
        return Err(StatsError::NoResamples);
    }
    let diffs = samples.diffs();
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let mut means = resample_means(samples, resamples, seed);
    means.sort_by(f64::total_cmp);
    let ci_low = quantile_sorted(&means, (1.0 - confidence) / 2.0);
    let ci_high = quantile_sorted(&means, (1.0 + confidence) / 2.0);
    Ok(BootstrapResult {
        mean_diff,
        ci_low,
        ci_high,
        confidence,
        resamples,
        significant: !(ci_low <= 0.0 && 0.0 <= ci_high),
    })
}

/// Pairs per-record values of `metric` by id. Records lacking an optional
/// metric count as missing.
pub fn align_reports(a: &EvalReport, b: &EvalReport, metric: &str) -> Result<PairedSamples, StatsError> {
    if !is_known_metric(metric) {
        return Err(StatsError::UnknownMetric(metric.to_string()));
    }
    let values = |r: &EvalReport| -> Vec<(String, f64)> {
        r.per_record
            .iter()
            .filter_map(|rec| rec.metric(metric).map(|v| (rec.id.clone(), v)))
            .collect()
    };
    let (va, vb) = (values(a), values(b));
    let lookup_b: HashMap<&str, f64> = vb.iter().map(|(id, v)| (id.as_str(), *v)).collect();
    let ids_a: HashSet<&str> = va.iter().map(|(id, _)| id.as_str()).collect();
    let missing_in_b: Vec<String> = va
        .iter()
        .filter(|(id, _)| !lookup_b.contains_key(id.as_str()))
        .map(|(id, _)| id.clone())
        .collect();
    let missing_in_a: Vec<String> = vb
        .iter()
        .filter(|(id, _)| !ids_a.contains(id.as_str()))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing_in_a.is_empty() || !missing_in_b.is_empty() || va.is_empty() {
        return Err(StatsError::IdMismatch {
            missing_in_a,
            missing_in_b,
        });
    }
    let (ids, a_vals): (Vec<String>, Vec<f64>) = va.into_iter().unzip();
    let b_vals = ids.iter().map(|id| lookup_b[id.as_str()]).collect();
    PairedSamples::new(ids, a_vals, b_vals)
}

pub fn compare_reports(
    a: &EvalReport,
    b: &EvalReport,
    metric: &str,
    confidence: f64,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult, StatsError> {
    paired_bootstrap(&align_reports(a, b, metric)?, confidence, resamples, seed)
}
