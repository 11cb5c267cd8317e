//! Structure-controlled summarization toolkit.
//!
//! * [`labels`], [`params`], [`record`], [`report`]: shared vocabulary.
//! * [`structure`]: pattern normalization, edit distance and structure
//!   similarity over label sequences.
//! * [`text_metrics`]: tokenization, ROUGE, n-gram overlap, length stats.
//! * [`prompt`]: building and parsing structure prompts.
//! * [`decoder`]: sentence-level constrained decoding against a [`bridge::Scorer`].
//! * [`corpus`]: JSONL corpora, sentence splitting, silver labeling.
//! * [`stats`]: paired bootstrap confidence intervals.
//! * [`bridge`]: scorer wire protocol, HTTP client and deterministic mock.
//! * [`pipeline`]: corpus evaluation and end-to-end system runs.

pub mod bridge;
pub mod corpus;
pub mod decoder;
pub mod labels;
pub mod params;
pub mod pipeline;
pub mod prompt;
pub mod record;
pub mod report;
pub mod rng;
pub mod stats;
pub mod structure;
pub mod synthetic;
pub mod text_metrics;

pub use labels::{parse_label, parse_label_sequence, LabelProbs, LabelSequence, StructureLabel};
pub use params::GenerationParams;
pub use record::CorpusRecord;
pub use report::EvalReport;
