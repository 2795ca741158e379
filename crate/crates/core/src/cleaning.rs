//! Remediation filters and train/validation/test split protocols.
//!
//! Every operation only changes membership; sample contents are never
//! touched. Removals are reported as [`Removal`] records.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clones::{cluster_indices, CloneCluster, CloneConfig, ClusterTier};
use crate::error::{Error, Result};
use crate::lexer::{classify_completeness, CompletenessClass};
use crate::metrics::{date_order, inconsistent_groups, lex_all};
use crate::model::{Dataset, Label};

pub const TEMPORAL_PARTITIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionRole {
    Train,
    Tune,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub role: PartitionRole,
    pub ids: Vec<String>,
}

/// Split of a dataset's ids. Random splits list ids in dataset order;
/// temporal partitions are in (date, id) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum SplitAssignment {
    Random {
        seed: u64,
        train: Vec<String>,
        validation: Vec<String>,
        test: Vec<String>,
    },
    Temporal {
        partitions: Vec<Partition>,
    },
}

impl SplitAssignment {
    /// Ids in test positions.
    pub fn test_ids(&self) -> Vec<&str> {
        match self {
            SplitAssignment::Random { test, .. } => test.iter().map(String::as_str).collect(),
            SplitAssignment::Temporal { partitions } => partitions
                .iter()
                .filter(|p| p.role == PartitionRole::Test)
                .flat_map(|p| p.ids.iter().map(String::as_str))
                .collect(),
        }
    }

    /// Ids used for fitting: train plus validation (or tune).
    pub fn fitting_ids(&self) -> Vec<&str> {
        match self {
            SplitAssignment::Random {
                train, validation, ..
            } => train.iter().chain(validation).map(String::as_str).collect(),
            SplitAssignment::Temporal { partitions } => partitions
                .iter()
                .filter(|p| p.role != PartitionRole::Test)
                .flat_map(|p| p.ids.iter().map(String::as_str))
                .collect(),
        }
    }

    pub fn all_ids(&self) -> Vec<&str> {
        let mut ids = self.fitting_ids();
        ids.extend(self.test_ids());
        ids
    }

    /// Checks that the sets are pairwise disjoint and only name samples of
    /// `dataset`.
    pub fn check(&self, dataset: &Dataset) -> Result<()> {
        let known: HashSet<&str> = dataset.iter().map(|s| s.id.as_str()).collect();
        let mut seen = HashSet::new();
        for id in self.all_ids() {
            if !known.contains(id) {
                return Err(Error::UnknownId(id.to_owned()));
            }
            if !seen.insert(id) {
                return Err(Error::DuplicateId {
                    id: id.to_owned(),
                    line: None,
                });
            }
        }
        Ok(())
    }

    /// Drops the given ids from every set.
    pub fn without(&self, removed: &HashSet<String>) -> SplitAssignment {
        let keep = |ids: &Vec<String>| -> Vec<String> {
            ids.iter()
                .filter(|id| !removed.contains(*id))
                .cloned()
                .collect()
        };
        match self {
            SplitAssignment::Random {
                seed,
                train,
                validation,
                test,
            } => SplitAssignment::Random {
                seed: *seed,
                train: keep(train),
                validation: keep(validation),
                test: keep(test),
            },
            SplitAssignment::Temporal { partitions } => SplitAssignment::Temporal {
                partitions: partitions
                    .iter()
                    .map(|p| Partition {
                        role: p.role,
                        ids: keep(&p.ids),
                    })
                    .collect(),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Duplicate,
    Inconsistent,
    Incomplete,
    CrossSetDuplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub id: String,
    pub reason: RemovalReason,
    /// Kept cluster member, or completeness class.
    pub detail: String,
}

pub fn write_removals<W: Write>(removals: &[Removal], mut writer: W) -> Result<()> {
    for r in removals {
        serde_json::to_writer(&mut writer, r)?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

fn ratio_sizes(n: usize, ratios: &SplitRatios) -> Result<(usize, usize)> {
    let parts = [ratios.train, ratios.validation, ratios.test];
    if parts.iter().any(|r| !r.is_finite() || *r < 0.0)
        || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidArgument(format!(
            "split ratios must be non-negative and sum to 1, got {}/{}/{}",
            ratios.train, ratios.validation, ratios.test
        )));
    }
    let floor = |r: f64| (r * n as f64 + 1e-9).floor() as usize;
    let train = floor(ratios.train);
    let validation = floor(ratios.validation).min(n - train);
    Ok((train, validation))
}

/// Seeded shuffle into train/validation/test. Train and validation get
/// `floor(ratio * n)` samples; the remainder goes to test.
pub fn random_split(dataset: &Dataset, ratios: SplitRatios, seed: u64) -> Result<SplitAssignment> {
    let n = dataset.len();
    if n < TEMPORAL_PARTITIONS {
        return Err(Error::InsufficientData {
            what: "samples for a random split",
            needed: TEMPORAL_PARTITIONS,
            got: n,
        });
    }
    let (n_train, n_val) = ratio_sizes(n, &ratios)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let ids = |slice: &[usize]| -> Vec<String> {
        let mut idx = slice.to_vec();
        idx.sort_unstable();
        idx.into_iter()
            .map(|i| dataset.samples()[i].id.clone())
            .collect()
    };
    Ok(SplitAssignment::Random {
        seed,
        train: ids(&order[..n_train]),
        validation: ids(&order[n_train..n_train + n_val]),
        test: ids(&order[n_train + n_val..]),
    })
}

/// Sorts dated samples by (date, id) and cuts them into ten contiguous
/// partitions: four train, one tune, five test. Sizes differ by at most one,
/// with the earlier partitions taking the extras. Undated samples are left
/// out.
pub fn temporal_split(dataset: &Dataset) -> Result<SplitAssignment> {
    let order = date_order(dataset);
    let n = order.len();
    if n < TEMPORAL_PARTITIONS {
        return Err(Error::InsufficientData {
            what: "dated samples for a temporal split",
            needed: TEMPORAL_PARTITIONS,
            got: n,
        });
    }
    let (base, extra) = (n / TEMPORAL_PARTITIONS, n % TEMPORAL_PARTITIONS);
    let mut partitions = Vec::with_capacity(TEMPORAL_PARTITIONS);
    let mut start = 0;
    for k in 0..TEMPORAL_PARTITIONS {
        let size = base + usize::from(k < extra);
        let role = match k {
            0..=3 => PartitionRole::Train,
            4 => PartitionRole::Tune,
            _ => PartitionRole::Test,
        };
        partitions.push(Partition {
            role,
            ids: order[start..start + size]
                .iter()
                .map(|&i| dataset.samples()[i].id.clone())
                .collect(),
        });
        start += size;
    }
    Ok(SplitAssignment::Temporal { partitions })
}

/// Type-3 clusters to use for cross-set removal: same-label by default,
/// label-agnostic when `label_agnostic` is set.
pub fn cross_set_clusters(
    dataset: &Dataset,
    label_agnostic: bool,
    config: &CloneConfig,
) -> Result<Vec<CloneCluster>> {
    crate::clones::cluster(dataset, ClusterTier::Type3, !label_agnostic, config)
}

/// Removes every test id that shares a cluster with a train or validation
/// (tune) id. Fitting sets are untouched; clusters entirely inside the test
/// set are left alone.
pub fn remove_cross_set_duplicates(
    split: &SplitAssignment,
    clusters: &[CloneCluster],
) -> (SplitAssignment, Vec<Removal>) {
    let fitting: HashSet<&str> = split.fitting_ids().into_iter().collect();
    let test: HashSet<&str> = split.test_ids().into_iter().collect();
    let mut removals = Vec::new();
    for cluster in clusters {
        let Some(anchor) = cluster
            .member_ids
            .iter()
            .find(|id| fitting.contains(id.as_str()))
        else {
            continue;
        };
        for id in &cluster.member_ids {
            if test.contains(id.as_str()) {
                removals.push(Removal {
                    id: id.clone(),
                    reason: RemovalReason::CrossSetDuplicate,
                    detail: anchor.clone(),
                });
            }
        }
    }
    removals.sort_by(|a, b| a.id.cmp(&b.id));
    let removed: HashSet<String> = removals.iter().map(|r| r.id.clone()).collect();
    (split.without(&removed), removals)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyScope {
    #[default]
    All,
    TestOnly,
}

/// Removes the non-vulnerable members of exact-duplicate clusters that carry
/// both labels. With [`ConsistencyScope::TestOnly`] only members sitting in
/// the test set of `split` are removed (for clusters inside the test set as
/// well as clusters reaching into train); the training set is left as is.
pub fn enforce_consistency(
    dataset: &Dataset,
    scope: ConsistencyScope,
    split: Option<&SplitAssignment>,
) -> Result<(Dataset, Vec<Removal>)> {
    let test: Option<HashSet<&str>> = match (scope, split) {
        (ConsistencyScope::All, _) => None,
        (ConsistencyScope::TestOnly, Some(split)) => {
            split.check(dataset)?;
            Some(split.test_ids().into_iter().collect())
        }
        (ConsistencyScope::TestOnly, None) => {
            return Err(Error::InvalidArgument(
                "test-only consistency needs a split".into(),
            ))
        }
    };
    let samples = dataset.samples();
    let groups = inconsistent_groups(dataset, &lex_all(dataset))?;
    let mut removed = vec![false; samples.len()];
    let mut removals = Vec::new();
    for group in &groups {
        let keeper = group
            .iter()
            .find(|&&i| samples[i].label == Label::Vulnerable)
            .map(|&i| samples[i].id.clone())
            .unwrap_or_default();
        for &i in group {
            let s = &samples[i];
            if s.label != Label::NonVulnerable {
                continue;
            }
            if test.as_ref().is_some_and(|t| !t.contains(s.id.as_str())) {
                continue;
            }
            removed[i] = true;
            removals.push(Removal {
                id: s.id.clone(),
                reason: RemovalReason::Inconsistent,
                detail: keeper.clone(),
            });
        }
    }
    removals.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((dataset.filtered(|i, _| !removed[i]), removals))
}

/// Keeps one member per clone cluster: earliest report date, then smallest
/// id; undated samples lose to dated ones.
pub fn deduplicate(
    dataset: &Dataset,
    tier: ClusterTier,
    same_label_only: bool,
    config: &CloneConfig,
) -> Result<(Dataset, Vec<Removal>)> {
    let samples = dataset.samples();
    let groups = cluster_indices(dataset, &lex_all(dataset), tier, same_label_only, config)?;
    let mut removed = vec![false; samples.len()];
    let mut removals = Vec::new();
    for group in &groups {
        let keep = *group
            .iter()
            .min_by(|&&a, &&b| {
                let key = |i: usize| {
                    let s = &samples[i];
                    (s.report_date.is_none(), s.report_date, &s.id)
                };
                key(a).cmp(&key(b))
            })
            .expect("clusters are non-empty");
        for &i in group {
            if i != keep {
                removed[i] = true;
                removals.push(Removal {
                    id: samples[i].id.clone(),
                    reason: RemovalReason::Duplicate,
                    detail: samples[keep].id.clone(),
                });
            }
        }
    }
    removals.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((dataset.filtered(|i, _| !removed[i]), removals))
}

/// Keeps only samples classified as complete functions.
pub fn drop_incomplete(dataset: &Dataset) -> (Dataset, Vec<Removal>) {
    let classes: Vec<CompletenessClass> =
        lex_all(dataset).iter().map(classify_completeness).collect();
    let removals = dataset
        .iter()
        .zip(&classes)
        .filter(|(_, c)| **c != CompletenessClass::Complete)
        .map(|(s, c)| Removal {
            id: s.id.clone(),
            reason: RemovalReason::Incomplete,
            detail: c.as_str().to_owned(),
        })
        .collect();
    let kept = dataset.filtered(|i, _| classes[i] == CompletenessClass::Complete);
    (kept, removals)
}
