//! Corpus-level evaluation and end-to-end system runs.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::{Classifier, Scorer, ScorerError};
use crate::corpus::sentences_trimmed;
use crate::decoder::{decode_sentbs, decode_unconstrained, DecodeConfig, DecodeError};
use crate::labels::LabelSequence;
use crate::prompt::{build_prompt, PromptConfig, PromptError};
use crate::record::CorpusRecord;
use crate::report::{EvalReport, Overlap, RecordMetrics, TOOLKIT_VERSION};
use crate::structure::structure_similarity;
use crate::text_metrics::{ngram_overlap, rouge_l, rouge_n, tokenize};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("record ids do not line up; missing predictions for {missing:?}, unknown prediction ids {unexpected:?}")]
    IdMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
    #[error("record {0:?} has no {1} labels")]
    MissingLabels(String, &'static str),
    #[error("classifier failed: {0}")]
    Classifier(#[from] ScorerError),
    #[error("record {id:?}: {source}")]
    Prompt { id: String, source: PromptError },
    #[error("record {id:?}: {source}")]
    Decode {
        id: String,
        source: DecodeError,
        /// Everything finished before the failing record.
        partial: Box<RunReport>,
    },
}

/// Which label sequence acts as the oracle / requested structure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelField {
    #[default]
    Gold,
    Predicted,
}

impl LabelField {
    pub fn name(self) -> &'static str {
        match self {
            LabelField::Gold => "gold",
            LabelField::Predicted => "predicted",
        }
    }

    pub fn get(self, record: &CorpusRecord) -> Option<&LabelSequence> {
        match self {
            LabelField::Gold => record.gold_labels.as_ref(),
            LabelField::Predicted => record.predicted_labels.as_ref(),
        }
    }
}

/// A system output supplied separately from the reference corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub prediction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_labels: Option<LabelSequence>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluateOptions {
    pub oracle: LabelField,
    pub overlap: bool,
}

/// Scores one prediction against its reference. Structure similarity needs
/// both label sequences.
pub fn score_record(
    id: &str,
    prediction: &str,
    record: &CorpusRecord,
    system_labels: Option<&LabelSequence>,
    oracle_labels: Option<&LabelSequence>,
    with_overlap: bool,
) -> RecordMetrics {
    let cand = tokenize(prediction);
    let reference = tokenize(&record.reference_summary);
    let overlap = with_overlap.then(|| {
        let source = tokenize(&record.document);
        Overlap {
            n1: ngram_overlap(&cand, &source, 1),
            n2: ngram_overlap(&cand, &source, 2),
            n3: ngram_overlap(&cand, &source, 3),
        }
    });
    RecordMetrics {
        id: id.to_string(),
        rouge1: rouge_n(&cand, &reference, 1),
        rouge2: rouge_n(&cand, &reference, 2),
        rouge_l: rouge_l(&cand, &reference),
        structure_similarity: match (system_labels, oracle_labels) {
            (Some(sys), Some(oracle)) => Some(structure_similarity(sys, oracle)),
            _ => None,
        },
        prediction_length_words: cand.len(),
        overlap,
    }
}

pub fn classify_summary(classifier: &dyn Classifier, text: &str) -> Result<LabelSequence, ScorerError> {
    let sentences: Vec<String> = sentences_trimmed(text).into_iter().map(String::from).collect();
    if sentences.is_empty() {
        return Ok(LabelSequence::empty());
    }
    Ok(classifier.classify(&sentences)?.iter().map(|p| p.argmax()).collect())
}

fn thread_pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

/// Per-record metrics for every record, in corpus order. Predictions come
/// from `predictions` when given, otherwise from each record's `prediction`.
pub fn evaluate_records(
    records: &[CorpusRecord],
    predictions: Option<&[PredictionRow]>,
    classifier: Option<&dyn Classifier>,
    opts: &EvaluateOptions,
    workers: usize,
) -> Result<Vec<RecordMetrics>, PipelineError> {
    let by_id: Option<HashMap<&str, &PredictionRow>> =
        predictions.map(|rows| rows.iter().map(|r| (r.id.as_str(), r)).collect());
    let mut missing = Vec::new();
    let mut inputs = Vec::with_capacity(records.len());
    for record in records {
        let found = match &by_id {
            Some(map) => map
                .get(record.id.as_str())
                .map(|row| (row.prediction.as_str(), row.prediction_labels.as_ref())),
            None => record.prediction.as_deref().map(|p| (p, None)),
        };
        match found {
            Some((text, labels)) => inputs.push((record, text, labels)),
            None => missing.push(record.id.clone()),
        }
    }
    let unexpected: Vec<String> = match predictions {
        Some(rows) => {
            let known: HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
            rows.iter()
                .filter(|r| !known.contains(r.id.as_str()))
                .map(|r| r.id.clone())
                .collect()
        }
        None => Vec::new(),
    };
    if !missing.is_empty() || !unexpected.is_empty() {
        return Err(PipelineError::IdMismatch { missing, unexpected });
    }

    thread_pool(workers).install(|| {
        inputs
            .par_iter()
            .map(|(record, text, labels)| {
                let oracle = opts.oracle.get(record);
                let system = match (labels, classifier, oracle) {
                    (Some(l), _, _) => Some((*l).clone()),
                    (None, Some(c), Some(_)) => Some(classify_summary(c, text)?),
                    _ => None,
                };
                Ok(score_record(&record.id, text, record, system.as_ref(), oracle, opts.overlap))
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Sentence-level constrained decoding against the requested structure.
    Sentbs,
    /// Likelihood-only decoding of the bare document.
    Nostructure,
    /// Likelihood-only decoding of the structure-prompted document.
    Strong,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Sentbs => "sentbs",
            SystemKind::Nostructure => "nostructure",
            SystemKind::Strong => "strong",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEndOptions {
    pub systems: Vec<SystemKind>,
    pub structure_source: LabelField,
    pub decode: DecodeConfig,
    pub prompt: PromptConfig,
    pub overlap: bool,
    /// Measure wall-clock per system; zero otherwise.
    pub record_timing: bool,
}

impl Default for EndToEndOptions {
    fn default() -> Self {
        Self {
            systems: vec![SystemKind::Sentbs, SystemKind::Nostructure, SystemKind::Strong],
            structure_source: LabelField::Gold,
            decode: DecodeConfig::default(),
            prompt: PromptConfig::default(),
            overlap: false,
            record_timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system: SystemKind,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub toolkit_version: String,
    pub config: serde_json::Value,
    pub systems: Vec<SystemReport>,
}

impl RunReport {
    pub fn system(&self, kind: SystemKind) -> Option<&EvalReport> {
        self.systems.iter().find(|s| s.system == kind).map(|s| &s.report)
    }
}

fn run_record<S: Scorer + ?Sized>(
    kind: SystemKind,
    record: &CorpusRecord,
    structure: &LabelSequence,
    scorer: &S,
    opts: &EndToEndOptions,
) -> Result<RecordMetrics, PipelineError> {
    let decoded = match kind {
        SystemKind::Sentbs => decode_sentbs(&record.document, structure, scorer, &opts.decode),
        SystemKind::Nostructure => decode_unconstrained(&record.document, scorer, &opts.decode),
        SystemKind::Strong => {
            let prompt = build_prompt(structure, &record.document, &opts.prompt).map_err(|source| {
                PipelineError::Prompt {
                    id: record.id.clone(),
                    source,
                }
            })?;
            decode_unconstrained(&prompt, scorer, &opts.decode)
        }
    };
    let trace = decoded.map_err(|source| PipelineError::Decode {
        id: record.id.clone(),
        source,
        partial: Box::new(RunReport {
            toolkit_version: TOOLKIT_VERSION.into(),
            config: serde_json::Value::Null,
            systems: Vec::new(),
        }),
    })?;
    Ok(score_record(
        &record.id,
        &trace.final_summary,
        record,
        Some(&trace.realized_labels),
        Some(structure),
        opts.overlap,
    ))
}

/// Decodes every record with every requested system and evaluates the
/// outputs against the references. Records are processed in parallel on
/// `workers` threads; each decode is sequential.
pub fn end_to_end<S: Scorer + ?Sized>(
    records: &[CorpusRecord],
    scorer: &S,
    opts: &EndToEndOptions,
    workers: usize,
) -> Result<RunReport, PipelineError> {
    let field = opts.structure_source;
    let structures: Vec<&LabelSequence> = records
        .iter()
        .map(|r| field.get(r).ok_or_else(|| PipelineError::MissingLabels(r.id.clone(), field.name())))
        .collect::<Result<_, _>>()?;
    let config = serde_json::to_value(opts).expect("options serialize");
    let mut run = RunReport {
        toolkit_version: TOOLKIT_VERSION.into(),
        config: config.clone(),
        systems: Vec::new(),
    };
    let pool = thread_pool(workers);
    for &kind in &opts.systems {
        let started = Instant::now();
        let results: Vec<Result<RecordMetrics, PipelineError>> = pool.install(|| {
            records
                .par_iter()
                .zip(structures.par_iter())
                .map(|(record, structure)| run_record(kind, record, structure, scorer, opts))
                .collect()
        });
        let wall = if opts.record_timing {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let system_config = serde_json::json!({ "system": kind.name(), "run": config });
        let mut done = Vec::with_capacity(results.len());
        for result in results {
            match result {
                Ok(metrics) => done.push(metrics),
                Err(PipelineError::Decode { id, source, .. }) => {
                    run.systems.push(SystemReport {
                        system: kind,
                        report: EvalReport::new(done, system_config, wall),
                    });
                    return Err(PipelineError::Decode {
                        id,
                        source,
                        partial: Box::new(run),
                    });
                }
                Err(other) => return Err(other),
            }
        }
        run.systems.push(SystemReport {
            system: kind,
            report: EvalReport::new(done, system_config, wall),
        });
    }
    Ok(run)
}
