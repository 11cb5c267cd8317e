//! The seam between decoding/labeling and whatever model sits behind them.
//!
//! Wire protocol (JSON over HTTP, UTF-8 bodies):
//!
//! * `GET /v1/handshake` returns [`Handshake`].
//! * `POST /v1/generate` takes [`GenerateRequest`] and returns
//!   [`GenerateResponse`]. An empty candidate list means end-of-sequence.
//! * `POST /v1/classify` takes [`ClassifyRequest`] and returns
//!   [`ClassifyResponse`]; probability vectors use the canonical label order
//!   Issue, Conclusion, Reason, Non_IRC.
//! * Failures use a 4xx/5xx status with `{"error": "..."}`.

use serde::{Deserialize, Serialize};

use crate::labels::{LabelProbs, StructureLabel};
use crate::params::GenerationParams;

mod http;
mod mock;

pub use http::{HttpScorer, HttpScorerOptions};
pub use mock::{MockScorer, MockScorerConfig, SentenceBanks};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub name: String,
    pub version: String,
    pub max_concurrency: u32,
    pub supports_inline_label_probs: bool,
}

/// A generated sentence as it comes off the wire. `log_likelihood` is the
/// per-token mean log-probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedCandidate {
    pub text: String,
    pub log_likelihood: f64,
    pub label_probs: Option<LabelProbs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub document: String,
    pub summary_prefix: String,
    pub target_label: Option<StructureLabel>,
    pub params: GenerationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub candidates: Vec<GeneratedCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub probs: Vec<LabelProbs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScorerError {
    #[error("scorer unreachable: {0}")]
    Unreachable(String),
    #[error("scorer timed out")]
    Timeout,
    #[error("scorer protocol error (status {status}): {body}")]
    Protocol { status: u16, body: String },
    #[error("invalid scorer response: {0}")]
    InvalidResponse(String),
}

/// Sentence-level label classifier.
pub trait Classifier: Send + Sync {
    /// One distribution per input sentence, in input order.
    fn classify(&self, sentences: &[String]) -> Result<Vec<LabelProbs>, ScorerError>;
}

/// Candidate generator plus classifier.
pub trait Scorer: Classifier {
    fn handshake(&self) -> Result<Handshake, ScorerError>;

    /// At most `request.params.num_candidates` candidates; empty means
    /// end-of-sequence.
    fn generate(&self, request: &GenerateRequest) -> Result<Vec<GeneratedCandidate>, ScorerError>;
}

impl<T: Classifier + ?Sized> Classifier for &T {
    fn classify(&self, sentences: &[String]) -> Result<Vec<LabelProbs>, ScorerError> {
        (**self).classify(sentences)
    }
}

impl<T: Scorer + ?Sized> Scorer for &T {
    fn handshake(&self) -> Result<Handshake, ScorerError> {
        (**self).handshake()
    }

    fn generate(&self, request: &GenerateRequest) -> Result<Vec<GeneratedCandidate>, ScorerError> {
        (**self).generate(request)
    }
}

impl<T: Classifier + ?Sized> Classifier for Box<T> {
    fn classify(&self, sentences: &[String]) -> Result<Vec<LabelProbs>, ScorerError> {
        (**self).classify(sentences)
    }
}

impl<T: Scorer + ?Sized> Scorer for Box<T> {
    fn handshake(&self) -> Result<Handshake, ScorerError> {
        (**self).handshake()
    }

    fn generate(&self, request: &GenerateRequest) -> Result<Vec<GeneratedCandidate>, ScorerError> {
        (**self).generate(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_request_wire_shape() {
        let req = GenerateRequest {
            document: "doc".into(),
            summary_prefix: String::new(),
            target_label: Some(StructureLabel::NonIrc),
            params: GenerationParams::default(),
        };
        let json = serde_json::to_string(&req).unwrap();
        assert_eq!(
            json,
            concat!(
                r#"{"document":"doc","summary_prefix":"","target_label":"Non_IRC","#,
                r#""params":{"num_candidates":4,"beam_size":2,"top_p":0.9,"min_tokens":64,"#,
                r#""max_tokens":256,"length_penalty":1.0,"seed":0}}"#
            )
        );
        let untargeted = GenerateRequest {
            target_label: None,
            ..req
        };
        assert!(serde_json::to_string(&untargeted)
            .unwrap()
            .contains(r#""target_label":null"#));
    }

    #[test]
    fn candidate_wire_shape() {
        let body = r#"{"candidates":[{"text":"A.","log_likelihood":-0.5,"label_probs":null},
            {"text":"B.","log_likelihood":-1.0,"label_probs":[0.25,0.25,0.25,0.25]}]}"#;
        let resp: GenerateResponse = serde_json::from_str(body).unwrap();
        assert_eq!(resp.candidates[0].label_probs, None);
        assert_eq!(resp.candidates[1].label_probs, Some(LabelProbs::uniform()));
    }
}
