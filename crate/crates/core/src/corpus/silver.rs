use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::sentences_trimmed;
use crate::bridge::{Classifier, ScorerError};
use crate::labels::{LabelSequence, StructureLabel};
use crate::record::CorpusRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilverLabelReport {
    pub labeled: usize,
    pub skipped: usize,
    /// Records whose least confident sentence fell below the threshold.
    /// They are labeled all the same.
    pub low_confidence: usize,
    pub label_histogram: BTreeMap<StructureLabel, usize>,
    /// Mean of the winning probability over every labeled sentence.
    pub mean_confidence: f64,
}

struct Labeled {
    labels: LabelSequence,
    confidences: Vec<f64>,
}

fn label_one(classifier: &dyn Classifier, summary: &str) -> Result<Labeled, ScorerError> {
    let sentences: Vec<String> = sentences_trimmed(summary).into_iter().map(String::from).collect();
    if sentences.is_empty() {
        return Ok(Labeled {
            labels: LabelSequence::empty(),
            confidences: Vec::new(),
        });
    }
    let probs = classifier.classify(&sentences)?;
    if probs.len() != sentences.len() {
        return Err(ScorerError::InvalidResponse(format!(
            "classifier returned {} vectors for {} sentences",
            probs.len(),
            sentences.len()
        )));
    }
    Ok(Labeled {
        labels: probs.iter().map(|p| p.argmax()).collect(),
        confidences: probs.iter().map(|p| p.max_prob()).collect(),
    })
}

/// Fills `predicted_labels` for every record without gold labels, one label
/// per reference-summary sentence. Records with gold labels pass through
/// untouched. At most `workers` classification calls are in flight; output
/// order follows input order.
pub fn silver_label(
    records: Vec<CorpusRecord>,
    classifier: &dyn Classifier,
    min_confidence: f64,
    workers: usize,
) -> Result<(Vec<CorpusRecord>, SilverLabelReport), ScorerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Option<Labeled>> = pool.install(|| {
        records
            .par_iter()
            .map(|r| match r.gold_labels {
                Some(_) => Ok(None),
                None => label_one(classifier, &r.reference_summary).map(Some),
            })
            .collect::<Result<_, _>>()
    })?;

    let mut report = SilverLabelReport {
        labeled: 0,
        skipped: 0,
        low_confidence: 0,
        label_histogram: StructureLabel::ALL.into_iter().map(|l| (l, 0)).collect(),
        mean_confidence: 0.0,
    };
    let mut confidence_sum = 0.0;
    let mut sentences = 0usize;
    let mut out = records;
    for (record, result) in out.iter_mut().zip(results) {
        let Some(labeled) = result else {
            report.skipped += 1;
            continue;
        };
        report.labeled += 1;
        for label in &labeled.labels {
            *report.label_histogram.entry(*label).or_default() += 1;
        }
        if labeled.confidences.iter().any(|c| *c < min_confidence) {
            report.low_confidence += 1;
        }
        confidence_sum += labeled.confidences.iter().sum::<f64>();
        sentences += labeled.confidences.len();
        record.predicted_labels = Some(labeled.labels);
    }
    if sentences > 0 {
        report.mean_confidence = confidence_sum / sentences as f64;
    }
    Ok((out, report))
}
