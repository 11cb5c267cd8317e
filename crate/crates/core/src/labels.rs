//! Argument-structure labels attached to summary sentences.
//!
//! The vocabulary is closed: `Issue`, `Conclusion`, `Reason` and `Non_IRC`.
//! Index order is fixed and shared with every probability vector that
//! crosses the wire.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabelError {
    #[error("unknown structure label {0:?}")]
    UnknownLabel(String),
    #[error("unknown structure label {token:?} at position {position}")]
    UnknownLabelAt { token: String, position: usize },
    #[error("label separator must be non-empty")]
    EmptySeparator,
    #[error("label probabilities {0:?} are not a distribution")]
    InvalidProbs([f64; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StructureLabel {
    Issue,
    Conclusion,
    Reason,
    #[serde(rename = "Non_IRC")]
    NonIrc,
}

impl StructureLabel {
    pub const ALL: [StructureLabel; 4] = [
        StructureLabel::Issue,
        StructureLabel::Conclusion,
        StructureLabel::Reason,
        StructureLabel::NonIrc,
    ];

    pub fn index(self) -> usize {
        match self {
            StructureLabel::Issue => 0,
            StructureLabel::Conclusion => 1,
            StructureLabel::Reason => 2,
            StructureLabel::NonIrc => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructureLabel::Issue => "Issue",
            StructureLabel::Conclusion => "Conclusion",
            StructureLabel::Reason => "Reason",
            StructureLabel::NonIrc => "Non_IRC",
        }
    }
}

impl fmt::Display for StructureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

/// Parses a canonical label string. Surrounding whitespace is ignored,
/// case is not.
pub fn parse_label(s: &str) -> Result<StructureLabel, LabelError> {
    let trimmed = s.trim();
    StructureLabel::ALL
        .into_iter()
        .find(|label| label.as_str() == trimmed)
        .ok_or_else(|| LabelError::UnknownLabel(s.to_string()))
}

pub const DEFAULT_SEPARATOR: &str = " | ";

/// An ordered run of labels, one per summary sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSequence(Vec<StructureLabel>);

impl LabelSequence {
    pub fn new(labels: Vec<StructureLabel>) -> Self {
        Self(labels)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn labels(&self) -> &[StructureLabel] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, label: StructureLabel) {
        self.0.push(label);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StructureLabel> {
        self.0.iter()
    }

    pub fn join(&self, sep: &str) -> String {
        self.0
            .iter()
            .map(|l| l.as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn into_inner(self) -> Vec<StructureLabel> {
        self.0
    }
}

impl From<Vec<StructureLabel>> for LabelSequence {
    fn from(labels: Vec<StructureLabel>) -> Self {
        Self(labels)
    }
}

impl FromIterator<StructureLabel> for LabelSequence {
    fn from_iter<I: IntoIterator<Item = StructureLabel>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a LabelSequence {
    type Item = &'a StructureLabel;
    type IntoIter = std::slice::Iter<'a, StructureLabel>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for LabelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join(DEFAULT_SEPARATOR))
    }
}

/// Splits `s` on `sep` and parses every token. Positions in errors are
/// 1-based.
pub fn parse_label_sequence(s: &str, sep: &str) -> Result<LabelSequence, LabelError> {
    if sep.is_empty() {
        return Err(LabelError::EmptySeparator);
    }
    if s.trim().is_empty() {
        return Ok(LabelSequence::empty());
    }
    s.split(sep)
        .enumerate()
        .map(|(i, token)| {
            parse_label(token).map_err(|_| LabelError::UnknownLabelAt {
                token: token.trim().to_string(),
                position: i + 1,
            })
        })
        .collect()
}

pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// A distribution over the four labels in canonical index order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct LabelProbs([f64; 4]);

impl LabelProbs {
    pub fn new(probs: [f64; 4]) -> Result<Self, LabelError> {
        let valid = probs.iter().all(|p| p.is_finite() && *p >= 0.0)
            && (probs.iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOLERANCE;
        if valid {
            Ok(Self(probs))
        } else {
            Err(LabelError::InvalidProbs(probs))
        }
    }

    /// All mass on `label`.
    pub fn one_hot(label: StructureLabel) -> Self {
        let mut probs = [0.0; 4];
        probs[label.index()] = 1.0;
        Self(probs)
    }

    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn get(&self, label: StructureLabel) -> f64 {
        self.0[label.index()]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    /// Most probable label; ties go to the lowest canonical index.
    pub fn argmax(&self) -> StructureLabel {
        let mut best = 0;
        for i in 1..4 {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        StructureLabel::ALL[best]
    }

    pub fn max_prob(&self) -> f64 {
        self.0[self.argmax().index()]
    }
}

impl TryFrom<[f64; 4]> for LabelProbs {
    type Error = LabelError;

    fn try_from(value: [f64; 4]) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<LabelProbs> for [f64; 4] {
    fn from(value: LabelProbs) -> Self {
        value.0
    }
}
