//! Structure prompts: the label sequence, a marker, then the source text.
//!
//! `Issue | Conclusion | Reason ==> <document>`

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::labels::{parse_label_sequence, LabelError, LabelSequence, StructureLabel, DEFAULT_SEPARATOR};
use crate::record::CorpusRecord;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("structure prompt needs at least one label")]
    EmptyLabels,
    #[error("document is empty")]
    EmptyDocument,
    #[error("no structure marker found")]
    NoMarker,
    #[error("record has no {0} labels")]
    MissingLabels(&'static str),
    #[error("invalid prompt config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptConfig {
    pub label_separator: String,
    pub marker: String,
    /// Surround the marker with single spaces.
    pub pad_marker: bool,
    pub label_surface_overrides: BTreeMap<StructureLabel, String>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        Self {
            label_separator: DEFAULT_SEPARATOR.to_string(),
            marker: "==>".to_string(),
            pad_marker: true,
            label_surface_overrides: BTreeMap::new(),
        }
    }
}

impl PromptConfig {
    pub fn validate(&self) -> Result<(), PromptError> {
        let (sep, marker) = (&self.label_separator, &self.marker);
        if sep.is_empty() || marker.is_empty() {
            return Err(PromptError::InvalidConfig("separator and marker must be non-empty".into()));
        }
        if sep.contains(marker.as_str()) || marker.contains(sep.as_str()) {
            return Err(PromptError::InvalidConfig(format!(
                "separator {sep:?} and marker {marker:?} overlap"
            )));
        }
        Ok(())
    }

    pub fn surface(&self, label: StructureLabel) -> &str {
        self.label_surface_overrides
            .get(&label)
            .map_or(label.as_str(), String::as_str)
    }

    fn delimiter(&self) -> String {
        if self.pad_marker {
            format!(" {} ", self.marker)
        } else {
            self.marker.clone()
        }
    }

    fn parse_labels(&self, text: &str) -> Result<LabelSequence, PromptError> {
        if self.label_surface_overrides.is_empty() {
            return Ok(parse_label_sequence(text, &self.label_separator)?);
        }
        text.split(self.label_separator.as_str())
            .enumerate()
            .map(|(i, token)| {
                let token = token.trim();
                StructureLabel::ALL
                    .into_iter()
                    .find(|l| self.surface(*l) == token)
                    .ok_or_else(|| {
                        LabelError::UnknownLabelAt {
                            token: token.to_string(),
                            position: i + 1,
                        }
                        .into()
                    })
            })
            .collect()
    }
}

pub fn build_prompt(labels: &LabelSequence, document: &str, cfg: &PromptConfig) -> Result<String, PromptError> {
    cfg.validate()?;
    if labels.is_empty() {
        return Err(PromptError::EmptyLabels);
    }
    if document.is_empty() {
        return Err(PromptError::EmptyDocument);
    }
    let head = labels
        .iter()
        .map(|l| cfg.surface(*l))
        .collect::<Vec<_>>()
        .join(&cfg.label_separator);
    Ok(format!("{head}{}{document}", cfg.delimiter()))
}

/// Splits at the first marker occurrence; the document half is returned
/// verbatim.
pub fn parse_prompt(prompted: &str, cfg: &PromptConfig) -> Result<(LabelSequence, String), PromptError> {
    cfg.validate()?;
    let (head, document) = prompted
        .split_once(cfg.delimiter().as_str())
        .ok_or(PromptError::NoMarker)?;
    Ok((cfg.parse_labels(head)?, document.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelSource {
    Gold,
    Predicted,
    Custom(LabelSequence),
}

pub fn prompt_for_record(record: &CorpusRecord, source: &LabelSource, cfg: &PromptConfig) -> Result<String, PromptError> {
    let labels = match source {
        LabelSource::Gold => record.gold_labels.as_ref().ok_or(PromptError::MissingLabels("gold"))?,
        LabelSource::Predicted => record
            .predicted_labels
            .as_ref()
            .ok_or(PromptError::MissingLabels("predicted"))?,
        LabelSource::Custom(labels) => labels,
    };
    build_prompt(labels, &record.document, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use StructureLabel::*;

    fn seq(labels: &[StructureLabel]) -> LabelSequence {
        LabelSequence::new(labels.to_vec())
    }

    #[test]
    fn builds_reference_prompt() {
        let cfg = PromptConfig::default();
        let p = build_prompt(&seq(&[Issue, Conclusion, Conclusion, Reason]), "The parties began…", &cfg).unwrap();
        assert_eq!(p, "Issue | Conclusion | Conclusion | Reason ==> The parties began…");
        assert_eq!(build_prompt(&seq(&[Issue]), "x", &cfg).unwrap(), "Issue ==> x");
        assert_eq!(build_prompt(&seq(&[]), "x", &cfg), Err(PromptError::EmptyLabels));
        assert_eq!(build_prompt(&seq(&[Issue]), "", &cfg), Err(PromptError::EmptyDocument));
    }

    #[test]
    fn parses_prompts() {
        let cfg = PromptConfig::default();
        assert_eq!(
            parse_prompt("Issue | Reason ==> body text", &cfg).unwrap(),
            (seq(&[Issue, Reason]), "body text".to_string())
        );
        assert_eq!(parse_prompt("no marker here", &cfg), Err(PromptError::NoMarker));
        assert_eq!(
            parse_prompt("Issue ==> a ==> b", &cfg).unwrap(),
            (seq(&[Issue]), "a ==> b".to_string())
        );
        assert!(matches!(
            parse_prompt("Issue | Nope ==> b", &cfg),
            Err(PromptError::Label(LabelError::UnknownLabelAt { position: 2, .. }))
        ));
    }

    #[test]
    fn unpadded_marker_and_overrides() {
        let mut cfg = PromptConfig {
            pad_marker: false,
            ..Default::default()
        };
        cfg.label_surface_overrides.insert(Reason, "Reasoning".into());
        let p = build_prompt(&seq(&[Issue, Reason]), "doc", &cfg).unwrap();
        assert_eq!(p, "Issue | Reasoning==>doc");
        assert_eq!(parse_prompt(&p, &cfg).unwrap(), (seq(&[Issue, Reason]), "doc".into()));
    }

    #[test]
    fn rejects_overlapping_config() {
        let cfg = PromptConfig {
            label_separator: "=".into(),
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(PromptError::InvalidConfig(_))));
    }

    #[test]
    fn record_label_sources() {
        let cfg = PromptConfig::default();
        let record = CorpusRecord::new("r", "The parties began…", "s").with_gold(seq(&[Issue, Conclusion, Conclusion, Reason]));
        assert_eq!(
            prompt_for_record(&record, &LabelSource::Gold, &cfg).unwrap(),
            "Issue | Conclusion | Conclusion | Reason ==> The parties began…"
        );
        let custom = LabelSource::Custom(seq(&[Conclusion, Issue, Issue, Reason, Reason]));
        assert!(prompt_for_record(&record, &custom, &cfg)
            .unwrap()
            .starts_with("Conclusion | Issue | Issue | Reason | Reason ==> "));
        assert_eq!(
            prompt_for_record(&record, &LabelSource::Predicted, &cfg),
            Err(PromptError::MissingLabels("predicted"))
        );
    }
}
