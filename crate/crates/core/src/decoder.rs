//! Sentence-by-sentence structure-controlled decoding.
//!
//! At every step the scorer proposes candidate sentences for the current
//! target label. Each candidate is scored as
//!
//! ```text
//! lambda * log_likelihood + (1 - lambda) * ln(max(P(target | sentence), 1e-12))
//! ```
//!
//! and the best one (lowest index on ties) is appended to the running
//! summary. `sentence_ctrl` spends one step per requested label;
//! `segment_ctrl` first collapses runs of equal labels and may spend up to
//! `max_sentences_per_segment` steps on each, moving on when the scorer
//! returns no candidates for the segment.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bridge::{GenerateRequest, GeneratedCandidate, Scorer, ScorerError};
use crate::labels::{LabelProbs, LabelSequence, StructureLabel};
use crate::params::{GenerationParams, ParamsError};
use crate::structure::dedupe_segments;
use crate::text_metrics::tokenize;

pub const LABEL_PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    #[default]
    SentenceCtrl,
    SegmentCtrl,
}

/// How the scorer's per-token mean log-likelihood enters the score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodMode {
    #[default]
    Mean,
    /// Mean times the candidate's token count.
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub mode: ControlMode,
    pub lambda: f64,
    pub gen: GenerationParams,
    pub max_sentences_per_segment: u32,
    pub stop_on_generator_eos: bool,
    pub likelihood: LikelihoodMode,
    /// Record per-step and total wall-clock time in the trace. Traces with
    /// timing are not byte-reproducible.
    pub record_timing: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            mode: ControlMode::SentenceCtrl,
            lambda: 0.5,
            gen: GenerationParams::default(),
            max_sentences_per_segment: 4,
            stop_on_generator_eos: true,
            likelihood: LikelihoodMode::Mean,
            record_timing: false,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<(), DecodeError> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(DecodeError::InvalidConfig(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.max_sentences_per_segment == 0 {
            return Err(DecodeError::InvalidConfig(
                "max_sentences_per_segment must be positive".into(),
            ));
        }
        self.gen.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    pub log_likelihood: f64,
    pub label_probs: LabelProbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeStep {
    pub target_label: Option<StructureLabel>,
    pub candidates: Vec<Candidate>,
    pub chosen_index: usize,
    pub combined_scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub steps: Vec<DecodeStep>,
    pub final_summary: String,
    pub realized_labels: LabelSequence,
    /// Set when forced-length decoding cut the last sentence short.
    #[serde(default)]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_elapsed_ms: Option<f64>,
}

impl DecodeTrace {
    pub fn chosen(&self, step: usize) -> &Candidate {
        let s = &self.steps[step];
        &s.candidates[s.chosen_index]
    }

    /// Checks that every step chose the first maximal score and that the
    /// realized labels are the chosen candidates' argmax labels.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.realized_labels.len() != self.steps.len() {
            return Err(format!(
                "{} realized labels for {} steps",
                self.realized_labels.len(),
                self.steps.len()
            ));
        }
        for (i, step) in self.steps.iter().enumerate() {
            if step.candidates.len() != step.combined_scores.len() {
                return Err(format!("step {i}: score count mismatch"));
            }
            if argmax_first(&step.combined_scores) != Some(step.chosen_index) {
                return Err(format!("step {i}: chosen index is not the first maximum"));
            }
            if self.realized_labels.labels()[i] != self.chosen(i).label_probs.argmax() {
                return Err(format!("step {i}: realized label disagrees with chosen candidate"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("structure is empty")]
    EmptyStructure,
    #[error("invalid decode config: {0}")]
    InvalidConfig(String),
    #[error("generator stopped after {emitted_words} of {target_words} words")]
    NonProgress { emitted_words: usize, target_words: usize },
    #[error("scorer failed after {} steps: {source}", partial.steps.len())]
    Scorer {
        source: ScorerError,
        partial: Box<DecodeTrace>,
    },
}

impl From<ParamsError> for DecodeError {
    fn from(e: ParamsError) -> Self {
        DecodeError::InvalidConfig(e.to_string())
    }
}

pub fn combined_score(candidate: &Candidate, target: StructureLabel, lambda: f64) -> f64 {
    lambda * candidate.log_likelihood
        + (1.0 - lambda) * candidate.label_probs.get(target).max(LABEL_PROB_FLOOR).ln()
}

/// Index of the first maximal element.
fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if best.is_none_or(|b| *s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

struct Session<'a, S: ?Sized> {
    document: &'a str,
    scorer: &'a S,
    cfg: &'a DecodeConfig,
    steps: Vec<DecodeStep>,
    realized: Vec<StructureLabel>,
    prefix: String,
    words: usize,
    started: Instant,
}

impl<'a, S: Scorer + ?Sized> Session<'a, S> {
    fn new(document: &'a str, scorer: &'a S, cfg: &'a DecodeConfig) -> Self {
        Self {
            document,
            scorer,
            cfg,
            steps: Vec::new(),
            realized: Vec::new(),
            prefix: String::new(),
            words: 0,
            started: Instant::now(),
        }
    }

    fn trace(&self) -> DecodeTrace {
        DecodeTrace {
            steps: self.steps.clone(),
            final_summary: self.prefix.trim_end().to_string(),
            realized_labels: LabelSequence::new(self.realized.clone()),
            truncated: false,
            total_elapsed_ms: self
                .cfg
                .record_timing
                .then(|| self.started.elapsed().as_secs_f64() * 1e3),
        }
    }

    fn fail(&self, source: ScorerError) -> DecodeError {
        DecodeError::Scorer {
            source,
            partial: Box::new(self.trace()),
        }
    }

    fn complete(&self, raw: Vec<GeneratedCandidate>, params: &GenerationParams) -> Result<Vec<Candidate>, ScorerError> {
        if raw.len() > params.num_candidates as usize {
            return Err(ScorerError::InvalidResponse(format!(
                "asked for {} candidates, got {}",
                params.num_candidates,
                raw.len()
            )));
        }
        if let Some(bad) = raw.iter().find(|c| !c.log_likelihood.is_finite()) {
            return Err(ScorerError::InvalidResponse(format!(
                "non-finite log-likelihood for {:?}",
                bad.text
            )));
        }
        let missing: Vec<String> = raw
            .iter()
            .filter(|c| c.label_probs.is_none())
            .map(|c| c.text.clone())
            .collect();
        let mut classified = if missing.is_empty() {
            Vec::new()
        } else {
            let probs = self.scorer.classify(&missing)?;
            if probs.len() != missing.len() {
                return Err(ScorerError::InvalidResponse(format!(
                    "classified {} of {} sentences",
                    probs.len(),
                    missing.len()
                )));
            }
            probs
        }
        .into_iter();
        Ok(raw
            .into_iter()
            .map(|c| Candidate {
                label_probs: c
                    .label_probs
                    .unwrap_or_else(|| classified.next().expect("one vector per missing candidate")),
                text: c.text,
                log_likelihood: c.log_likelihood,
            })
            .collect())
    }

    /// Requests one candidate pool. `None` signals end-of-sequence.
    fn propose(&self, target: Option<StructureLabel>, params: &GenerationParams) -> Result<Option<Vec<Candidate>>, DecodeError> {
        let request = GenerateRequest {
            document: self.document.to_string(),
            summary_prefix: self.prefix.clone(),
            target_label: target,
            params: params.clone(),
        };
        let raw = self.scorer.generate(&request).map_err(|e| self.fail(e))?;
        if raw.is_empty() {
            return Ok(None);
        }
        self.complete(raw, params).map(Some).map_err(|e| self.fail(e))
    }

    fn likelihood(&self, c: &Candidate) -> f64 {
        match self.cfg.likelihood {
            LikelihoodMode::Mean => c.log_likelihood,
            LikelihoodMode::Sum => c.log_likelihood * tokenize(&c.text).len().max(1) as f64,
        }
    }

    /// Scores, selects and appends. Returns the number of words emitted.
    fn commit(&mut self, target: Option<StructureLabel>, candidates: Vec<Candidate>, step_started: Instant) -> usize {
        let scores: Vec<f64> = candidates
            .iter()
            .map(|c| {
                let ll = self.likelihood(c);
                match target {
                    Some(t) => {
                        let scaled = Candidate {
                            log_likelihood: ll,
                            ..c.clone()
                        };
                        combined_score(&scaled, t, self.cfg.lambda)
                    }
                    None => ll,
                }
            })
            .collect();
        let chosen = argmax_first(&scores).expect("non-empty pool");
        let text = candidates[chosen].text.trim().to_string();
        let words = word_count(&text);
        self.realized.push(candidates[chosen].label_probs.argmax());
        if !text.is_empty() {
            self.prefix.push_str(&text);
            self.prefix.push(' ');
        }
        self.words += words;
        self.steps.push(DecodeStep {
            target_label: target,
            candidates,
            chosen_index: chosen,
            combined_scores: scores,
            elapsed_ms: self
                .cfg
                .record_timing
                .then(|| step_started.elapsed().as_secs_f64() * 1e3),
        });
        words
    }

    /// One step toward `target`; false when the scorer signalled
    /// end-of-sequence.
    fn step(&mut self, target: StructureLabel) -> Result<bool, DecodeError> {
        let started = Instant::now();
        // With lambda = 1 the label term vanishes, so the generator is not
        // conditioned on it either.
        let requested = (self.cfg.lambda < 1.0).then_some(target);
        match self.propose(requested, &self.cfg.gen)? {
            None => Ok(false),
            Some(pool) => {
                self.commit(Some(target), pool, started);
                Ok(true)
            }
        }
    }
}

/// Structure-controlled decoding against `structure`.
pub fn decode_sentbs<S: Scorer + ?Sized>(
    document: &str,
    structure: &LabelSequence,
    scorer: &S,
    cfg: &DecodeConfig,
) -> Result<DecodeTrace, DecodeError> {
    cfg.validate()?;
    if structure.is_empty() {
        return Err(DecodeError::EmptyStructure);
    }
    let mut session = Session::new(document, scorer, cfg);
    match cfg.mode {
        ControlMode::SentenceCtrl => {
            for &target in structure {
                if !session.step(target)? && cfg.stop_on_generator_eos {
                    break;
                }
            }
        }
        ControlMode::SegmentCtrl => {
            'segments: for &target in &dedupe_segments(structure) {
                for emitted in 0..cfg.max_sentences_per_segment {
                    if !session.step(target)? {
                        if emitted == 0 && cfg.stop_on_generator_eos {
                            break 'segments;
                        }
                        break;
                    }
                }
            }
        }
    }
    let trace = session.trace();
    debug_assert_eq!(trace.check_invariants(), Ok(()));
    Ok(trace)
}

/// Likelihood-only decoding with no target label, until end-of-sequence or
/// `gen.max_tokens` words.
pub fn decode_unconstrained<S: Scorer + ?Sized>(
    document: &str,
    scorer: &S,
    cfg: &DecodeConfig,
) -> Result<DecodeTrace, DecodeError> {
    cfg.validate()?;
    let mut session = Session::new(document, scorer, cfg);
    while session.words < cfg.gen.max_tokens as usize {
        let started = Instant::now();
        let Some(pool) = session.propose(None, &cfg.gen)? else {
            break;
        };
        if session.commit(None, pool, started) == 0 {
            break;
        }
    }
    Ok(session.trace())
}

/// Likelihood-only decoding that keeps going until exactly `exact_words`
/// words exist, cutting the last sentence if needed. The generator is asked
/// for at least `exact_words` tokens so it should not stop early; if it does,
/// the result is [`DecodeError::NonProgress`].
pub fn forced_length_decode<S: Scorer + ?Sized>(
    document: &str,
    scorer: &S,
    cfg: &DecodeConfig,
    exact_words: usize,
) -> Result<DecodeTrace, DecodeError> {
    cfg.validate()?;
    if exact_words == 0 {
        return Err(DecodeError::InvalidConfig("exact_words must be positive".into()));
    }
    let target = u32::try_from(exact_words).unwrap_or(u32::MAX);
    let params = GenerationParams {
        min_tokens: target,
        max_tokens: cfg.gen.max_tokens.max(target),
        ..cfg.gen.clone()
    };
    let mut session = Session::new(document, scorer, cfg);
    let non_progress = |words| DecodeError::NonProgress {
        emitted_words: words,
        target_words: exact_words,
    };
    while session.words < exact_words {
        let started = Instant::now();
        let Some(pool) = session.propose(None, &params)? else {
            return Err(non_progress(session.words));
        };
        if session.commit(None, pool, started) == 0 {
            return Err(non_progress(session.words));
        }
    }
    let mut trace = session.trace();
    if session.words > exact_words {
        trace.final_summary = trace
            .final_summary
            .split_whitespace()
            .take(exact_words)
            .collect::<Vec<_>>()
            .join(" ");
        trace.truncated = true;
    }
    Ok(trace)
}
