//! Canonical value types shared by every audit stage.
//!
//! A [`Dataset`] is an ordered, id-unique collection of [`CodeSample`]s.
//! Attribute scores follow the per-entry proportion rule: the fraction of
//! samples that satisfy an attribute's characteristic.

use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Vulnerable,
    NonVulnerable,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Vulnerable => "vulnerable",
            Label::NonVulnerable => "non_vulnerable",
        }
    }

    pub fn parse(text: &str) -> Option<Label> {
        match text {
            "vulnerable" => Some(Label::Vulnerable),
            "non_vulnerable" => Some(Label::NonVulnerable),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labelled function together with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSample {
    pub id: String,
    pub code: String,
    pub label: Label,
    pub project: Option<String>,
    pub commit_id: Option<String>,
    pub cve_id: Option<String>,
    /// Day on which the label was recorded.
    pub report_date: Option<NaiveDate>,
    /// Name of the source dataset.
    pub origin: String,
}

impl CodeSample {
    pub fn new(id: impl Into<String>, code: impl Into<String>, label: Label) -> Self {
        CodeSample {
            id: id.into(),
            code: code.into(),
            label,
            project: None,
            commit_id: None,
            cve_id: None,
            report_date: None,
            origin: String::new(),
        }
    }

    pub fn with_date(mut self, date: NaiveDate) -> Self {
        self.report_date = Some(date);
        self
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = origin.into();
        self
    }
}

/// Ordered collection of samples with unique, non-empty ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    name: String,
    samples: Vec<CodeSample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, samples: Vec<CodeSample>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(samples.len());
        for sample in &samples {
            if sample.id.is_empty() {
                return Err(Error::EmptyId { line: None });
            }
            if !seen.insert(sample.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: sample.id.clone(),
                    line: None,
                });
            }
        }
        Ok(Dataset {
            name: name.into(),
            samples,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            samples: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[CodeSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CodeSample> {
        self.samples.iter()
    }

    pub fn get(&self, id: &str) -> Option<&CodeSample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn into_samples(self) -> Vec<CodeSample> {
        self.samples
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Keeps the samples for which `keep` returns true, preserving order.
    pub(crate) fn filtered(&self, mut keep: impl FnMut(usize, &CodeSample) -> bool) -> Dataset {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .filter(|(i, s)| keep(*i, s))
            .map(|(_, s)| s.clone())
            .collect();
        Dataset {
            name: self.name.clone(),
            samples,
        }
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a CodeSample;
    type IntoIter = std::slice::Iter<'a, CodeSample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Accuracy,
    Uniqueness,
    Consistency,
    Completeness,
    Currentness,
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Attribute::Accuracy => "accuracy",
            Attribute::Uniqueness => "uniqueness",
            Attribute::Consistency => "consistency",
            Attribute::Completeness => "completeness",
            Attribute::Currentness => "currentness",
        })
    }
}

/// How a score was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreBasis {
    /// Every sample of the dataset was checked.
    FullDataset,
    /// A reviewed subset stands in for the dataset.
    Sample,
    /// Whole-dataset distribution comparison; counts are unused (0/0).
    Distributional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeScore {
    pub attribute: Attribute,
    pub value: f64,
    pub satisfied_count: usize,
    pub total_count: usize,
    pub basis: ScoreBasis,
}

impl AttributeScore {
    pub(crate) fn from_counts(
        attribute: Attribute,
        satisfied: usize,
        total: usize,
        basis: ScoreBasis,
    ) -> Result<Self> {
        if total == 0 {
            return Err(Error::ScoreUndefined { attribute });
        }
        debug_assert!(satisfied <= total);
        Ok(AttributeScore {
            attribute,
            value: satisfied as f64 / total as f64,
            satisfied_count: satisfied,
            total_count: total,
            basis,
        })
    }

    pub(crate) fn distributional(attribute: Attribute, value: f64) -> Self {
        AttributeScore {
            attribute,
            value: value.clamp(0.0, 1.0),
            satisfied_count: 0,
            total_count: 0,
            basis: ScoreBasis::Distributional,
        }
    }
}

/// Proportion of satisfied entries: `sum(dq(i)) / N` over the flags.
pub fn attribute_score<I>(attribute: Attribute, flags: I) -> Result<AttributeScore>
where
    I: IntoIterator<Item = bool>,
{
    let (satisfied, total) = flags.into_iter().fold((0usize, 0usize), |(s, t), flag| {
        (s + usize::from(flag), t + 1)
    });
    AttributeScore::from_counts(attribute, satisfied, total, ScoreBasis::FullDataset)
}
