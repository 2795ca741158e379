//! Line-delimited JSON interchange format.
//!
//! Each line holds one record:
//!
//! ```text
//! {"id":"f1","code":"int f(){return 1;}","label":"vulnerable","project":"zlib",
//!  "commit_id":"abc","cve_id":"CVE-2020-1","report_date":"2020-03-14","origin":"big-vul"}
//! ```
//!
//! `id`, `code` and `label` are required. Blank lines are skipped. Code text is
//! kept byte-exact; JSON string escaping keeps multi-line functions on one line.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CodeSample, Dataset, Label};

/// Serialized form of a [`CodeSample`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterchangeRecord {
    pub id: String,
    pub code: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commit_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cve_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_date: Option<String>,
    #[serde(default)]
    pub origin: String,
}

impl From<&CodeSample> for InterchangeRecord {
    fn from(s: &CodeSample) -> Self {
        InterchangeRecord {
            id: s.id.clone(),
            code: s.code.clone(),
            label: s.label.as_str().to_owned(),
            project: s.project.clone(),
            commit_id: s.commit_id.clone(),
            cve_id: s.cve_id.clone(),
            report_date: s.report_date.map(|d| d.format("%Y-%m-%d").to_string()),
            origin: s.origin.clone(),
        }
    }
}

impl InterchangeRecord {
    fn into_sample(self, line: usize) -> Result<CodeSample> {
        let label = Label::parse(&self.label).ok_or_else(|| Error::UnknownLabel {
            line,
            label: self.label.clone(),
        })?;
        let report_date = self
            .report_date
            .as_deref()
            .map(|text| {
                parse_date(text).ok_or_else(|| Error::Malformed {
                    line,
                    message: format!("report_date {text:?} is not an ISO-8601 date"),
                })
            })
            .transpose()?;
        Ok(CodeSample {
            id: self.id,
            code: self.code,
            label,
            project: self.project,
            commit_id: self.commit_id,
            cve_id: self.cve_id,
            report_date,
            origin: self.origin,
        })
    }
}

/// Accepts `YYYY-MM-DD`; full RFC 3339 timestamps are truncated to their date.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .ok()
        .or_else(|| {
            DateTime::parse_from_rfc3339(text)
                .ok()
                .map(|t| t.date_naive())
        })
}

/// Reads a dataset from any line-oriented reader.
pub fn read_dataset<R: BufRead>(reader: R, name: impl Into<String>) -> Result<Dataset> {
    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: InterchangeRecord =
            serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        let sample = record.into_sample(line_no)?;
        if sample.id.is_empty() {
            return Err(Error::EmptyId {
                line: Some(line_no),
            });
        }
        if !seen.insert(sample.id.clone()) {
            return Err(Error::DuplicateId {
                id: sample.id,
                line: Some(line_no),
            });
        }
        samples.push(sample);
    }
    Dataset::new(name, samples)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_dataset(BufReader::new(file), name)
}

pub fn write_dataset<W: Write>(dataset: &Dataset, mut writer: W) -> Result<()> {
    for sample in dataset {
        serde_json::to_writer(&mut writer, &InterchangeRecord::from(sample))?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_dataset(dataset, &mut writer)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub total: usize,
    pub vulnerable: usize,
    pub non_vulnerable: usize,
    pub missing_date: usize,
    /// Samples whose code is empty or whitespace only.
    pub empty_code: usize,
}

pub fn validate(dataset: &Dataset) -> ValidationSummary {
    let mut summary = ValidationSummary {
        total: dataset.len(),
        ..Default::default()
    };
    for sample in dataset {
        match sample.label {
            Label::Vulnerable => summary.vulnerable += 1,
            Label::NonVulnerable => summary.non_vulnerable += 1,
        }
        if sample.report_date.is_none() {
            summary.missing_date += 1;
        }
        if sample.code.trim().is_empty() {
            summary.empty_code += 1;
        }
    }
    summary
}
