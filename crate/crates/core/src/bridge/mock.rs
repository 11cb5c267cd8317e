//! Deterministic in-process scorer.
//!
//! `generate` is a pure function of the configuration and the request:
//!
//! 1. `step` is the number of non-blank sentences in `summary_prefix`; once
//!    `step >= eos_after` the candidate list is empty.
//! 2. The draw stream is `SplitMix64(stream_seed(seed, [fnv1a64(document),
//!    step, target]))` where `target` is the label index + 1, or 0 when no
//!    target is given (see [`crate::rng`]).
//! 3. With a target, the first `ceil(n / 2)` candidates come from the target
//!    bank; the rest cycle through the other three banks in canonical order
//!    starting at `index(3)`, drawn once up front. Without a target each
//!    candidate draws its bank with `index(4)`.
//! 4. Per candidate: `template = index(bank_len)`, `jitter = noise *
//!    unit_f64()`, `log_likelihood = -(0.1 * template) - jitter`, and inline
//!    label probabilities of 0.9 on the bank's label and 0.1/3 elsewhere.
//!
//! `classify` returns 0.97 on the label of the first bank (canonical order)
//! holding the trimmed sentence and 0.01 elsewhere, or a uniform vector for
//! unknown sentences.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Classifier, GenerateRequest, GeneratedCandidate, Handshake, Scorer, ScorerError};
use crate::corpus::split_sentences;
use crate::labels::{LabelProbs, StructureLabel};
use crate::rng::{fnv1a64, stream_seed, SplitMix64};

/// Shared sentence-bank fixture, also consumed by the reference stub service.
pub const DEFAULT_BANKS_JSON: &str = include_str!("../../fixtures/sentence_banks.json");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BankError {
    #[error("sentence bank for {0} is missing or empty")]
    EmptyBank(StructureLabel),
    #[error("template {0:?} is not a single sentence")]
    NotSingleSentence(String),
    #[error("malformed sentence banks: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<StructureLabel, Vec<String>>", into = "BTreeMap<StructureLabel, Vec<String>>")]
pub struct SentenceBanks(BTreeMap<StructureLabel, Vec<String>>);

impl SentenceBanks {
    pub fn new(banks: BTreeMap<StructureLabel, Vec<String>>) -> Result<Self, BankError> {
        for label in StructureLabel::ALL {
            let bank = banks.get(&label).filter(|b| !b.is_empty());
            let bank = bank.ok_or(BankError::EmptyBank(label))?;
            if let Some(bad) = bank
                .iter()
                .find(|t| t.trim().is_empty() || split_sentences(t.trim()).len() != 1)
            {
                return Err(BankError::NotSingleSentence(bad.clone()));
            }
        }
        Ok(Self(banks))
    }

    pub fn from_json(json: &str) -> Result<Self, BankError> {
        serde_json::from_str(json).map_err(|e| BankError::Malformed(e.to_string()))
    }

    pub fn bundled() -> Self {
        Self::from_json(DEFAULT_BANKS_JSON).expect("bundled sentence banks are valid")
    }

    pub fn bank(&self, label: StructureLabel) -> &[String] {
        &self.0[&label]
    }

    /// First label (canonical order) whose bank holds `sentence`.
    pub fn label_of(&self, sentence: &str) -> Option<StructureLabel> {
        let sentence = sentence.trim();
        StructureLabel::ALL
            .into_iter()
            .find(|l| self.bank(*l).iter().any(|t| t.trim() == sentence))
    }
}

impl TryFrom<BTreeMap<StructureLabel, Vec<String>>> for SentenceBanks {
    type Error = BankError;

    fn try_from(value: BTreeMap<StructureLabel, Vec<String>>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<SentenceBanks> for BTreeMap<StructureLabel, Vec<String>> {
    fn from(value: SentenceBanks) -> Self {
        value.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockScorerConfig {
    pub seed: u64,
    pub sentence_bank: SentenceBanks,
    pub noise: f64,
    pub eos_after: u32,
}

impl Default for MockScorerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sentence_bank: SentenceBanks::bundled(),
            noise: 0.0,
            eos_after: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MockScorer {
    cfg: MockScorerConfig,
}

const BANK_PROB: f64 = 0.9;
const KNOWN_PROB: f64 = 0.97;
const UNKNOWN_OTHER: f64 = 0.01;

fn smoothed(label: StructureLabel, peak: f64, rest: f64) -> LabelProbs {
    let mut probs = [rest; 4];
    probs[label.index()] = peak;
    LabelProbs::new(probs).expect("smoothed vector sums to one")
}

impl MockScorer {
    /// # Panics
    /// If `noise` is negative or `eos_after` is zero.
    pub fn new(cfg: MockScorerConfig) -> Self {
        assert!(cfg.noise >= 0.0, "noise must be non-negative");
        assert!(cfg.eos_after > 0, "eos_after must be positive");
        Self { cfg }
    }

    pub fn config(&self) -> &MockScorerConfig {
        &self.cfg
    }

    fn candidate(&self, rng: &mut SplitMix64, label: StructureLabel) -> GeneratedCandidate {
        let bank = self.cfg.sentence_bank.bank(label);
        let template = rng.index(bank.len());
        let jitter = self.cfg.noise * rng.unit_f64();
        GeneratedCandidate {
            text: bank[template].clone(),
            log_likelihood: -(0.1 * template as f64) - jitter,
            label_probs: Some(smoothed(label, BANK_PROB, (1.0 - BANK_PROB) / 3.0)),
        }
    }
}

impl Classifier for MockScorer {
    fn classify(&self, sentences: &[String]) -> Result<Vec<LabelProbs>, ScorerError> {
        Ok(sentences
            .iter()
            .map(|s| match self.cfg.sentence_bank.label_of(s) {
                Some(label) => smoothed(label, KNOWN_PROB, UNKNOWN_OTHER),
                None => LabelProbs::uniform(),
            })
            .collect())
    }
}

impl Scorer for MockScorer {
    fn handshake(&self) -> Result<Handshake, ScorerError> {
        Ok(Handshake {
            name: "mock".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            max_concurrency: 1024,
            supports_inline_label_probs: true,
        })
    }

    fn generate(&self, request: &GenerateRequest) -> Result<Vec<GeneratedCandidate>, ScorerError> {
        let step = split_sentences(&request.summary_prefix)
            .iter()
            .filter(|s| !s.trim().is_empty())
            .count() as u64;
        if step >= u64::from(self.cfg.eos_after) {
            return Ok(Vec::new());
        }
        let target_code = request.target_label.map_or(0, |l| l.index() as u64 + 1);
        let mut rng = SplitMix64::new(stream_seed(
            self.cfg.seed,
            &[fnv1a64(&request.document), step, target_code],
        ));
        let n = request.params.num_candidates as usize;
        let candidates = match request.target_label {
            Some(target) => {
                let on_target = n.div_ceil(2);
                let others: Vec<StructureLabel> = StructureLabel::ALL
                    .into_iter()
                    .filter(|l| *l != target)
                    .collect();
                let offset = rng.index(others.len());
                (0..n)
                    .map(|c| {
                        let label = if c < on_target {
                            target
                        } else {
                            others[(offset + c - on_target) % others.len()]
                        };
                        self.candidate(&mut rng, label)
                    })
                    .collect()
            }
            None => (0..n)
                .map(|_| {
                    let label = StructureLabel::ALL[rng.index(4)];
                    self.candidate(&mut rng, label)
                })
                .collect(),
        };
        Ok(candidates)
    }
}
