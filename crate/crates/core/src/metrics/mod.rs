//! Attribute scoring and report assembly.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clones::{cluster_indices, CloneConfig, ClusterTier};
use crate::error::{Error, Result};
use crate::lexer::{classify_completeness, tokenize, CompletenessClass, TokenStream};
use crate::model::{Attribute, AttributeScore, Dataset, ScoreBasis};
use crate::review::{accuracy_score, ReviewSheet};

mod divergence;

pub use divergence::{jensen_shannon_divergence, TokenDistribution};

/// Whether members of a duplicate cluster all count as non-unique, or one
/// representative per cluster counts as unique.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessConvention {
    #[default]
    Member,
    Representative,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub clones: CloneConfig,
    pub uniqueness_convention: UniquenessConvention,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessBreakdown {
    pub complete: usize,
    pub truncated_start: usize,
    pub truncated_end: usize,
    pub truncated_both: usize,
    pub empty: usize,
    pub declaration_only: usize,
}

impl CompletenessBreakdown {
    pub fn add(&mut self, class: CompletenessClass) {
        *self.slot(class) += 1;
    }

    pub fn count(&self, class: CompletenessClass) -> usize {
        match class {
            CompletenessClass::Complete => self.complete,
            CompletenessClass::TruncatedStart => self.truncated_start,
            CompletenessClass::TruncatedEnd => self.truncated_end,
            CompletenessClass::TruncatedBoth => self.truncated_both,
            CompletenessClass::Empty => self.empty,
            CompletenessClass::DeclarationOnly => self.declaration_only,
        }
    }

    fn slot(&mut self, class: CompletenessClass) -> &mut usize {
        match class {
            CompletenessClass::Complete => &mut self.complete,
            CompletenessClass::TruncatedStart => &mut self.truncated_start,
            CompletenessClass::TruncatedEnd => &mut self.truncated_end,
            CompletenessClass::TruncatedBoth => &mut self.truncated_both,
            CompletenessClass::Empty => &mut self.empty,
            CompletenessClass::DeclarationOnly => &mut self.declaration_only,
        }
    }

    pub fn total(&self) -> usize {
        CompletenessClass::ALL.iter().map(|&c| self.count(c)).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessDetail {
    pub cluster_count: usize,
    /// Samples belonging to some same-label Type-3 cluster.
    pub duplicate_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconsistencyDetail {
    pub cluster_count: usize,
    pub affected_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurrentnessDetail {
    /// Absent when fewer than two dated samples (or no tokens in a half).
    pub divergence: Option<f64>,
    pub older_half_size: usize,
    pub newer_half_size: usize,
    pub undated_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: Option<AttributeScore>,
    pub uniqueness: AttributeScore,
    pub consistency: AttributeScore,
    pub completeness: AttributeScore,
    pub currentness: Option<AttributeScore>,
}

impl Scores {
    pub fn iter(&self) -> impl Iterator<Item = &AttributeScore> {
        [
            self.accuracy.as_ref(),
            Some(&self.uniqueness),
            Some(&self.consistency),
            Some(&self.completeness),
            self.currentness.as_ref(),
        ]
        .into_iter()
        .flatten()
    }
}

/// Per-attribute scores for one dataset plus the evidence behind them.
/// Serialized as pretty-printed JSON with fields in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub dataset_name: String,
    pub sample_count: usize,
    pub config: AuditConfig,
    pub scores: Scores,
    pub completeness_breakdown: CompletenessBreakdown,
    pub uniqueness_clusters: UniquenessDetail,
    pub inconsistent_clusters: InconsistencyDetail,
    pub currentness_detail: CurrentnessDetail,
}

impl QualityReport {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

pub(crate) fn lex_all(dataset: &Dataset) -> Vec<TokenStream> {
    dataset
        .samples()
        .par_iter()
        .map(|s| tokenize(&s.code))
        .collect()
}

fn uniqueness_from(
    dataset: &Dataset,
    streams: &[TokenStream],
    config: &AuditConfig,
) -> Result<(AttributeScore, UniquenessDetail)> {
    let clusters = cluster_indices(dataset, streams, ClusterTier::Type3, true, &config.clones)?;
    let duplicate_count: usize = clusters.iter().map(Vec::len).sum();
    let n = dataset.len();
    let satisfied = match config.uniqueness_convention {
        UniquenessConvention::Member => n - duplicate_count,
        UniquenessConvention::Representative => n - (duplicate_count - clusters.len()),
    };
    let score =
        AttributeScore::from_counts(Attribute::Uniqueness, satisfied, n, ScoreBasis::FullDataset)?;
    Ok((
        score,
        UniquenessDetail {
            cluster_count: clusters.len(),
            duplicate_count,
        },
    ))
}

/// Type-1 clusters (label-agnostic) whose members carry both labels, as
/// sample indices.
pub(crate) fn inconsistent_groups(
    dataset: &Dataset,
    streams: &[TokenStream],
) -> Result<Vec<Vec<usize>>> {
    let samples = dataset.samples();
    let groups = cluster_indices(
        dataset,
        streams,
        ClusterTier::Type1,
        false,
        &CloneConfig::default(),
    )?;
    Ok(groups
        .into_iter()
        .filter(|g| {
            let first = samples[g[0]].label;
            g.iter().any(|&i| samples[i].label != first)
        })
        .collect())
}

fn consistency_from(
    dataset: &Dataset,
    streams: &[TokenStream],
) -> Result<(AttributeScore, InconsistencyDetail)> {
    let groups = inconsistent_groups(dataset, streams)?;
    let affected: HashSet<usize> = groups.iter().flatten().copied().collect();
    let n = dataset.len();
    let score = AttributeScore::from_counts(
        Attribute::Consistency,
        n - affected.len(),
        n,
        ScoreBasis::FullDataset,
    )?;
    let mut affected_ids: Vec<String> = affected
        .into_iter()
        .map(|i| dataset.samples()[i].id.clone())
        .collect();
    affected_ids.sort();
    Ok((
        score,
        InconsistencyDetail {
            cluster_count: groups.len(),
            affected_ids,
        },
    ))
}

fn completeness_from(
    dataset: &Dataset,
    streams: &[TokenStream],
) -> Result<(AttributeScore, CompletenessBreakdown)> {
    let mut breakdown = CompletenessBreakdown::default();
    for stream in streams {
        breakdown.add(classify_completeness(stream));
    }
    let score = AttributeScore::from_counts(
        Attribute::Completeness,
        breakdown.complete,
        dataset.len(),
        ScoreBasis::FullDataset,
    )?;
    Ok((score, breakdown))
}

/// Indices of dated samples ordered by (report date, id).
pub(crate) fn date_order(dataset: &Dataset) -> Vec<usize> {
    let samples = dataset.samples();
    let mut dated: Vec<usize> = (0..samples.len())
        .filter(|&i| samples[i].report_date.is_some())
        .collect();
    dated.sort_by(|&a, &b| {
        (samples[a].report_date, &samples[a].id).cmp(&(samples[b].report_date, &samples[b].id))
    });
    dated
}

/// `1 - JSD` between the token distributions of two halves of a dataset.
pub fn currentness_of_halves(older: &TokenDistribution, newer: &TokenDistribution) -> f64 {
    1.0 - jensen_shannon_divergence(older, newer)
}

fn currentness_from(
    dataset: &Dataset,
    streams: &[TokenStream],
) -> Result<(AttributeScore, CurrentnessDetail)> {
    let order = date_order(dataset);
    let undated_count = dataset.len() - order.len();
    if order.len() < 2 {
        return Err(Error::InsufficientData {
            what: "currentness (dated samples)",
            needed: 2,
            got: order.len(),
        });
    }
    let split = order.len().div_ceil(2);
    let (older_idx, newer_idx) = order.split_at(split);
    let older = TokenDistribution::from_streams(older_idx.iter().map(|&i| &streams[i]));
    let newer = TokenDistribution::from_streams(newer_idx.iter().map(|&i| &streams[i]));
    let (Some(older), Some(newer)) = (older, newer) else {
        return Err(Error::DegenerateInput("a dataset half contains no tokens"));
    };
    let divergence = jensen_shannon_divergence(&older, &newer);
    Ok((
        AttributeScore::distributional(Attribute::Currentness, 1.0 - divergence),
        CurrentnessDetail {
            divergence: Some(divergence),
            older_half_size: older_idx.len(),
            newer_half_size: newer_idx.len(),
            undated_count,
        },
    ))
}

/// Share of samples with no same-label Type-3 clone.
pub fn uniqueness(dataset: &Dataset, config: &AuditConfig) -> Result<AttributeScore> {
    empty_check(dataset, Attribute::Uniqueness)?;
    uniqueness_from(dataset, &lex_all(dataset), config).map(|(s, _)| s)
}

/// Share of samples with no exact (Type-1) duplicate carrying the other label.
pub fn consistency(dataset: &Dataset) -> Result<AttributeScore> {
    empty_check(dataset, Attribute::Consistency)?;
    consistency_from(dataset, &lex_all(dataset)).map(|(s, _)| s)
}

/// Share of samples classified [`CompletenessClass::Complete`].
pub fn completeness(dataset: &Dataset) -> Result<(AttributeScore, CompletenessBreakdown)> {
    empty_check(dataset, Attribute::Completeness)?;
    completeness_from(dataset, &lex_all(dataset))
}

/// One minus the Jensen-Shannon divergence between the token distributions
/// of the older and newer halves of the dated samples. The older half takes
/// the extra sample when the count is odd; date ties are broken by id.
pub fn currentness(dataset: &Dataset) -> Result<(AttributeScore, CurrentnessDetail)> {
    currentness_from(dataset, &lex_all(dataset))
}

fn empty_check(dataset: &Dataset, attribute: Attribute) -> Result<()> {
    if dataset.is_empty() {
        Err(Error::ScoreUndefined { attribute })
    } else {
        Ok(())
    }
}

/// Computes every score the inputs allow. Accuracy needs an adjudicated
/// review sheet; currentness needs at least two dated samples and is left
/// out otherwise.
pub fn audit(
    dataset: &Dataset,
    config: &AuditConfig,
    review: Option<&ReviewSheet>,
) -> Result<QualityReport> {
    config.clones.validate()?;
    if dataset.is_empty() {
        return Err(Error::ScoreUndefined {
            attribute: Attribute::Uniqueness,
        });
    }
    let accuracy = review
        .map(|sheet| {
            let known: HashSet<&str> = dataset.iter().map(|s| s.id.as_str()).collect();
            for entry in &sheet.entries {
                if !known.contains(entry.id.as_str()) {
                    return Err(Error::UnknownId(entry.id.clone()));
                }
            }
            accuracy_score(sheet)
        })
        .transpose()?;

    let streams = lex_all(dataset);
    let (uniq, uniq_detail) = uniqueness_from(dataset, &streams, config)?;
    let (cons, cons_detail) = consistency_from(dataset, &streams)?;
    let (comp, breakdown) = completeness_from(dataset, &streams)?;
    let (curr, curr_detail) = match currentness_from(dataset, &streams) {
        Ok((score, detail)) => (Some(score), detail),
        Err(Error::InsufficientData { .. }) | Err(Error::DegenerateInput(_)) => {
            let dated = date_order(dataset).len();
            (
                None,
                CurrentnessDetail {
                    divergence: None,
                    older_half_size: 0,
                    newer_half_size: 0,
                    undated_count: dataset.len() - dated,
                },
            )
        }
        Err(e) => return Err(e),
    };

    Ok(QualityReport {
        dataset_name: dataset.name().to_owned(),
        sample_count: dataset.len(),
        config: config.clone(),
        scores: Scores {
            accuracy,
            uniqueness: uniq,
            consistency: cons,
            completeness: comp,
            currentness: curr,
        },
        completeness_breakdown: breakdown,
        uniqueness_clusters: uniq_detail,
        inconsistent_clusters: cons_detail,
        currentness_detail: curr_detail,
    })
}
