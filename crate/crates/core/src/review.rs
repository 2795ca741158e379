//! Manual label review: sample sizing, sampling, rater verdicts, agreement and
//! the sampled accuracy score.
//!
//! Sheets are stored as pretty-printed JSON so reviewers can fill in verdicts
//! by hand:
//!
//! ```text
//! {
//!   "dataset_name": "devign",
//!   "entries": [
//!     { "id": "f17", "rater_a": "correct", "rater_b": "incorrect",
//!       "adjudicated": "correct", "reason": "cleanup" }
//!   ]
//! }
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Attribute, AttributeScore, Dataset, Label, ScoreBasis};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Incorrect,
    #[default]
    Unset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonTag {
    Irrelevant,
    Cleanup,
    InaccurateFixId,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rater {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewEntry {
    pub id: String,
    #[serde(default)]
    pub rater_a: Verdict,
    #[serde(default)]
    pub rater_b: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjudicated: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<ReasonTag>,
}

impl ReviewEntry {
    fn new(id: String) -> Self {
        ReviewEntry {
            id,
            rater_a: Verdict::Unset,
            rater_b: Verdict::Unset,
            adjudicated: None,
            reason: None,
        }
    }

    fn both_set(&self) -> bool {
        self.rater_a != Verdict::Unset && self.rater_b != Verdict::Unset
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewSheet {
    pub dataset_name: String,
    pub entries: Vec<ReviewEntry>,
}

impl ReviewSheet {
    pub fn new(dataset_name: impl Into<String>, ids: Vec<String>) -> Result<Self> {
        let sheet = ReviewSheet {
            dataset_name: dataset_name.into(),
            entries: ids.into_iter().map(ReviewEntry::new).collect(),
        };
        sheet.validate()?;
        Ok(sheet)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn entry_mut(&mut self, id: &str) -> Result<&mut ReviewEntry> {
        self.entries
            .iter_mut()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownId(id.to_owned()))
    }

    pub fn set_verdict(&mut self, id: &str, rater: Rater, verdict: Verdict) -> Result<()> {
        let entry = self.entry_mut(id)?;
        match rater {
            Rater::A => entry.rater_a = verdict,
            Rater::B => entry.rater_b = verdict,
        }
        if !entry.both_set() {
            entry.adjudicated = None;
        }
        Ok(())
    }

    /// Records the consensus verdict. Both raters must have answered first.
    pub fn adjudicate(
        &mut self,
        id: &str,
        verdict: Verdict,
        reason: Option<ReasonTag>,
    ) -> Result<()> {
        if verdict == Verdict::Unset {
            return Err(Error::InvalidArgument(
                "adjudicated verdict must be correct or incorrect".into(),
            ));
        }
        let entry = self.entry_mut(id)?;
        if !entry.both_set() {
            return Err(Error::UnsetVerdict { id: id.to_owned() });
        }
        entry.adjudicated = Some(verdict);
        entry.reason = reason;
        Ok(())
    }

    /// Adjudicates every entry where both raters agree. Returns how many
    /// entries still need a consensus decision.
    pub fn resolve_agreements(&mut self) -> usize {
        let mut open = 0;
        for entry in &mut self.entries {
            if entry.adjudicated.is_some() {
                continue;
            }
            if entry.both_set() && entry.rater_a == entry.rater_b {
                entry.adjudicated = Some(entry.rater_a);
            } else {
                open += 1;
            }
        }
        open
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.entries.len());
        for entry in &self.entries {
            if entry.id.is_empty() {
                return Err(Error::EmptyId { line: None });
            }
            if !seen.insert(entry.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: entry.id.clone(),
                    line: None,
                });
            }
            match entry.adjudicated {
                Some(Verdict::Unset) => {
                    return Err(Error::InvalidArgument(format!(
                        "entry {:?}: adjudicated verdict cannot be unset",
                        entry.id
                    )))
                }
                Some(_) if !entry.both_set() => {
                    return Err(Error::UnsetVerdict {
                        id: entry.id.clone(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sheet: ReviewSheet = serde_json::from_str(text)?;
        sheet.validate()?;
        Ok(sheet)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.15e-9).
#[allow(clippy::excessive_precision)] // published coefficients, kept verbatim
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    assert!(p > 0.0 && p < 1.0, "quantile argument out of range: {p}");
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - P_LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Cochran's sample size with finite-population correction.
///
/// The infinite-population size `n0` is rounded up to a whole sample before
/// the correction is applied, then the corrected size is rounded up and
/// capped at the population.
pub fn cochran_sample_size(
    confidence: f64,
    margin: f64,
    proportion: f64,
    population: u64,
) -> Result<u64> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if !open_unit(confidence) {
        return Err(Error::InvalidArgument(format!(
            "confidence must be in (0, 1), got {confidence}"
        )));
    }
    if !open_unit(margin) {
        return Err(Error::InvalidArgument(format!(
            "margin must be in (0, 1), got {margin}"
        )));
    }
    if !(0.0..=1.0).contains(&proportion) {
        return Err(Error::InvalidArgument(format!(
            "proportion must be in [0, 1], got {proportion}"
        )));
    }
    if population == 0 {
        return Err(Error::InvalidArgument(
            "population must be at least 1".into(),
        ));
    }
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    let n0 = (z * z * proportion * (1.0 - proportion) / (margin * margin) - 1e-9)
        .ceil()
        .max(1.0);
    let n = n0 / (1.0 + (n0 - 1.0) / population as f64);
    Ok(((n - 1e-9).ceil() as u64).clamp(1, population))
}

/// Draws `n` ids uniformly without replacement from the samples matching
/// `label` (all samples when `None`). Ids appear in dataset order.
pub fn sample_for_review(
    dataset: &Dataset,
    label: Option<Label>,
    n: usize,
    seed: u64,
) -> Result<ReviewSheet> {
    let pool: Vec<&str> = dataset
        .iter()
        .filter(|s| label.is_none_or(|l| s.label == l))
        .map(|s| s.id.as_str())
        .collect();
    if n > pool.len() {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, pool.len(), n).into_vec();
    picked.sort_unstable();
    ReviewSheet::new(
        dataset.name(),
        picked.into_iter().map(|i| pool[i].to_owned()).collect(),
    )
}

/// Cohen's kappa for the two raters over a binary verdict.
pub fn cohen_kappa(sheet: &ReviewSheet) -> Result<f64> {
    if sheet.is_empty() {
        return Err(Error::InsufficientData {
            what: "review entries",
            needed: 1,
            got: 0,
        });
    }
    // table[a][b], index 0 = Correct
    let mut table = [[0u64; 2]; 2];
    for entry in &sheet.entries {
        let idx = |v: Verdict| match v {
            Verdict::Correct => Some(0),
            Verdict::Incorrect => Some(1),
            Verdict::Unset => None,
        };
        match (idx(entry.rater_a), idx(entry.rater_b)) {
            (Some(a), Some(b)) => table[a][b] += 1,
            _ => {
                return Err(Error::UnsetVerdict {
                    id: entry.id.clone(),
                })
            }
        }
    }
    Ok(kappa_from_table(table))
}

pub(crate) fn kappa_from_table(table: [[u64; 2]; 2]) -> f64 {
    let n = (table[0][0] + table[0][1] + table[1][0] + table[1][1]) as f64;
    let po = (table[0][0] + table[1][1]) as f64 / n;
    let a_correct = (table[0][0] + table[0][1]) as f64;
    let b_correct = (table[0][0] + table[1][0]) as f64;
    let pe = (a_correct * b_correct + (n - a_correct) * (n - b_correct)) / (n * n);
    if pe >= 1.0 {
        return 1.0;
    }
    ((po - pe) / (1.0 - pe)).clamp(-1.0, 1.0)
}

/// Sampled accuracy: share of adjudicated `Correct` verdicts.
pub fn accuracy_score(sheet: &ReviewSheet) -> Result<AttributeScore> {
    let mut correct = 0;
    for entry in &sheet.entries {
        match entry.adjudicated {
            Some(Verdict::Correct) => correct += 1,
            Some(Verdict::Incorrect) => {}
            _ => {
                return Err(Error::Unadjudicated {
                    id: entry.id.clone(),
                })
            }
        }
    }
    AttributeScore::from_counts(
        Attribute::Accuracy,
        correct,
        sheet.len(),
        ScoreBasis::Sample,
    )
}
