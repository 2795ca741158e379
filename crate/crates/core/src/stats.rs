//! Nonparametric tests for comparing metric runs, plus MCC.
//!
//! All p-values are two-sided.

use std::cmp::Ordering;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total size up to which the Mann-Whitney p-value is enumerated exactly
/// (when there are no ties).
pub const MWU_EXACT_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub p_value: f64,
    pub method: PMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallTau {
    pub tau_b: f64,
    pub p_value: f64,
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "inputs must be finite numbers".into(),
        ));
    }
    Ok(())
}

fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Midranks (1-based) of `values`, plus the tie-group sizes larger than one.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Number of arrangements of `m` and `n` items with each U value
/// (index = U), by the usual recurrence over the largest element.
fn u_distribution(m: usize, n: usize) -> Vec<f64> {
    // f[i][j] = distribution for sizes (i, j)
    let max_u = m * n;
    let mut prev: Vec<Vec<f64>> = (0..=n).map(|_| vec![1.0]).collect();
    for i in 1..=m {
        let mut cur: Vec<Vec<f64>> = vec![vec![1.0]];
        for j in 1..=n {
            let mut dist = vec![0.0; i * j + 1];
            // largest element from the first sample: contributes j to U
            for (u, &c) in prev[j].iter().enumerate() {
                dist[u + j] += c;
            }
            // largest element from the second sample
            for (u, &c) in cur[j - 1].iter().enumerate() {
                dist[u] += c;
            }
            cur.push(dist);
        }
        prev = cur;
    }
    let mut dist = prev.swap_remove(n);
    dist.resize(max_u + 1, 0.0);
    dist
}

/// Mann-Whitney U test. `u` counts pairs with `a` above `b` (ties count
/// one half). Exact when the samples are small and untied, otherwise a normal
/// approximation with tie and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData {
            what: "mann-whitney sample",
            needed: 1,
            got: 0,
        });
    }
    check_finite(a)?;
    check_finite(b)?;
    let (m, n) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum: f64 = ranks[..m].iter().sum();
    let u = rank_sum - (m * (m + 1)) as f64 / 2.0;
    let mn = (m * n) as f64;

    if m + n <= MWU_EXACT_MAX && ties.is_empty() {
        let dist = u_distribution(m, n);
        let total: f64 = dist.iter().sum();
        let k = u.round() as usize;
        let lower: f64 = dist[..=k].iter().sum::<f64>() / total;
        let upper: f64 = dist[k..].iter().sum::<f64>() / total;
        return Ok(MannWhitney {
            u,
            p_value: (2.0 * lower.min(upper)).min(1.0),
            method: PMethod::Exact,
        });
    }

    let total = (m + n) as f64;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = mn / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let big = u.max(mn - u);
        let z = (big - mn / 2.0 - 0.5) / var.sqrt();
        (2.0 * normal_sf(z)).min(1.0)
    };
    Ok(MannWhitney {
        u,
        p_value,
        method: PMethod::Asymptotic,
    })
}

fn tie_sums(values: &[f64]) -> (f64, f64, f64) {
    let (_, ties) = midranks(values);
    ties.iter().fold((0.0, 0.0, 0.0), |(t1, t2, t3), &t| {
        let t = t as f64;
        (
            t1 + t * (t - 1.0),
            t2 + t * (t - 1.0) * (t - 2.0),
            t3 + t * (t - 1.0) * (2.0 * t + 5.0),
        )
    })
}

/// Kendall's tau-b with a normal-approximation p-value (variance of the
/// concordant-minus-discordant count with tie corrections).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<KendallTau> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "kendall observations",
            needed: 2,
            got: n,
        });
    }
    check_finite(x)?;
    check_finite(y)?;

    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tied_x, mut tied_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).expect("finite");
            let dy = y[i].partial_cmp(&y[j]).expect("finite");
            match (dx, dy) {
                (Ordering::Equal, Ordering::Equal) => {
                    tied_x += 1;
                    tied_y += 1;
                }
                (Ordering::Equal, _) => tied_x += 1,
                (_, Ordering::Equal) => tied_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = (((pairs - tied_x) * (pairs - tied_y)) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateInput("all values tied in one variable"));
    }
    let s = (concordant - discordant) as f64;
    let tau_b = (s / denom).clamp(-1.0, 1.0);

    let nf = n as f64;
    let (x0, x1, x2) = tie_sums(x);
    let (y0, y1, y2) = tie_sums(y);
    let m = nf * (nf - 1.0);
    let mut var = (m * (2.0 * nf + 5.0) - x2 - y2) / 18.0 + 2.0 * (x0 / 2.0) * (y0 / 2.0) / m;
    if n > 2 {
        var += x1 * y1 / (9.0 * m * (nf - 2.0));
    }
    let p_value = if var <= 0.0 {
        1.0
    } else {
        libm::erfc(s.abs() / var.sqrt() / SQRT_2).min(1.0)
    };
    Ok(KendallTau { tau_b, p_value })
}

/// Matthews correlation coefficient. Returns 0 when any marginal total is
/// zero.
pub fn mcc(tp: u64, fp: u64, tn: u64, fn_: u64) -> Result<f64> {
    if tp + fp + tn + fn_ == 0 {
        return Err(Error::InvalidArgument("confusion matrix is empty".into()));
    }
    let (tp, fp, tn, fn_) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(((tp * tn - fp * fn_) / denom.sqrt()).clamp(-1.0, 1.0))
}
