use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::labels::LabelSequence;

/// One case/summary pair. Fields this crate does not know about are kept in
/// `extra` so read-modify-write cycles do not lose them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub document: String,
    pub reference_summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_labels: Option<LabelSequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_labels: Option<LabelSequence>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl CorpusRecord {
    pub fn new(
        id: impl Into<String>,
        document: impl Into<String>,
        reference_summary: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            document: document.into(),
            reference_summary: reference_summary.into(),
            prediction: None,
            gold_labels: None,
            predicted_labels: None,
            extra: Map::new(),
        }
    }

    pub fn with_gold(mut self, labels: LabelSequence) -> Self {
        self.gold_labels = Some(labels);
        self
    }

    pub fn with_prediction(mut self, prediction: impl Into<String>) -> Self {
        self.prediction = Some(prediction.into());
        self
    }
}
