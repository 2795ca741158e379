//! Bag-of-tokens distributions and Jensen-Shannon divergence (base 2).

use std::collections::BTreeMap;
use std::iter::Peekable;

use crate::lexer::TokenStream;

/// Token text -> probability. Keys are kept sorted so every sum over the
/// vocabulary runs in the same order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenDistribution {
    probs: BTreeMap<String, f64>,
}

impl TokenDistribution {
    /// Normalizes non-negative weights by their total. Zero weights are
    /// dropped. Returns `None` when the total is zero.
    pub fn from_weights<K, I>(weights: I) -> Option<Self>
    where
        K: Into<String>,
        I: IntoIterator<Item = (K, f64)>,
    {
        let mut acc: BTreeMap<String, f64> = BTreeMap::new();
        for (k, w) in weights {
            assert!(
                w >= 0.0 && w.is_finite(),
                "weights must be finite and non-negative"
            );
            if w > 0.0 {
                *acc.entry(k.into()).or_insert(0.0) += w;
            }
        }
        let total: f64 = acc.values().sum();
        if total <= 0.0 {
            return None;
        }
        for v in acc.values_mut() {
            *v /= total;
        }
        Some(TokenDistribution { probs: acc })
    }

    /// Relative frequency of every token text across `streams`.
    pub fn from_streams<'a>(streams: impl IntoIterator<Item = &'a TokenStream>) -> Option<Self> {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for stream in streams {
            for t in &stream.tokens {
                *counts.entry(t.text.as_str()).or_insert(0) += 1;
            }
        }
        let total: u64 = counts.values().sum();
        if total == 0 {
            return None;
        }
        let probs = counts
            .into_iter()
            .map(|(k, c)| (k.to_owned(), c as f64 / total as f64))
            .collect();
        Some(TokenDistribution { probs })
    }

    pub fn probability(&self, token: &str) -> f64 {
        self.probs.get(token).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Walks the sorted union of two distributions' supports.
struct Union<
    'a,
    A: Iterator<Item = (&'a String, &'a f64)>,
    B: Iterator<Item = (&'a String, &'a f64)>,
> {
    a: Peekable<A>,
    b: Peekable<B>,
}

impl<'a, A, B> Iterator for Union<'a, A, B>
where
    A: Iterator<Item = (&'a String, &'a f64)>,
    B: Iterator<Item = (&'a String, &'a f64)>,
{
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        match (self.a.peek(), self.b.peek()) {
            (Some((ka, _)), Some((kb, _))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => self.a.next().map(|(_, &p)| (p, 0.0)),
                std::cmp::Ordering::Greater => self.b.next().map(|(_, &q)| (0.0, q)),
                std::cmp::Ordering::Equal => {
                    let p = *self.a.next()?.1;
                    let q = *self.b.next()?.1;
                    Some((p, q))
                }
            },
            (Some(_), None) => self.a.next().map(|(_, &p)| (p, 0.0)),
            (None, Some(_)) => self.b.next().map(|(_, &q)| (0.0, q)),
            (None, None) => None,
        }
    }
}

fn kl_term(p: f64, m: f64) -> f64 {
    if p > 0.0 {
        p * (p / m).log2()
    } else {
        0.0
    }
}

/// `JSD(P, Q) = ½ KL(P‖M) + ½ KL(Q‖M)` with `M = ½(P + Q)`, in bits, so the
/// result lies in [0, 1]. Terms with zero probability contribute 0.
///
/// Each vocabulary entry's two terms are added before the running sum, so
/// swapping the arguments gives a bit-identical result.
pub fn jensen_shannon_divergence(p: &TokenDistribution, q: &TokenDistribution) -> f64 {
    let union = Union {
        a: p.probs.iter().peekable(),
        b: q.probs.iter().peekable(),
    };
    let total: f64 = union
        .map(|(pi, qi)| {
            let m = 0.5 * (pi + qi);
            0.5 * (kl_term(pi, m) + kl_term(qi, m))
        })
        .sum();
    total.clamp(0.0, 1.0)
}
