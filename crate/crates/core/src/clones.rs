//! Token-based clone detection and clustering.
//!
//! * Type-1: identical token sequences (layout and comments already gone).
//! * Type-2: identical after abstracting identifiers and literals.
//! * Type-3: token-multiset Jaccard and identifier/literal set Jaccard both
//!   reach their thresholds. Type-2 pairs also count, so the three tiers
//!   nest: Type-1 implies Type-2 implies Type-3.
//!
//! Clusters are connected components of the pairwise relation. Candidate
//! Type-3 pairs come from a prefix-filtered inverted index over the
//! identifier/literal sets (rarest tokens first), which is exact: two sets
//! with Jaccard >= t always share a token among their first
//! `|x| - ceil(t * |x|) + 1` rarest tokens. On very large corpora, posting
//! lists of tokens present in more than `ubiquity_fraction` of the samples
//! (and longer than `ubiquity_floor`) are dropped; pairs that share only
//! such tokens are then missed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lexer::{tokenize, Token, TokenKind, TokenStream};
use crate::model::{Dataset, Label};

mod union_find;

use union_find::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerprintTier {
    Type1,
    Type2,
}

/// 128-bit digest of a normalized token sequence. Truncated SHA-256 over
/// length-prefixed token texts; seedless, so digests are stable across runs
/// and platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub tier: FingerprintTier,
    pub digest: [u8; 16],
}

impl Fingerprint {
    pub fn hex(&self) -> String {
        self.digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn digest_texts<'a>(texts: impl Iterator<Item = &'a str>) -> [u8; 16] {
    let mut hasher = Sha256::new();
    for text in texts {
        hasher.update((text.len() as u64).to_le_bytes());
        hasher.update(text.as_bytes());
    }
    let full = hasher.finalize();
    let mut out = [0u8; 16];
    out.copy_from_slice(&full[..16]);
    out
}

/// Token text with identifiers and literals replaced by placeholders.
pub fn abstract_text(token: &Token) -> &str {
    match token.kind {
        TokenKind::Identifier => "ID",
        TokenKind::NumberLiteral => "LITN",
        TokenKind::StringLiteral => "LITS",
        TokenKind::CharLiteral => "LITC",
        _ => &token.text,
    }
}

pub fn type1_fingerprint(stream: &TokenStream) -> Fingerprint {
    Fingerprint {
        tier: FingerprintTier::Type1,
        digest: digest_texts(stream.texts()),
    }
}

pub fn type2_fingerprint(stream: &TokenStream) -> Fingerprint {
    Fingerprint {
        tier: FingerprintTier::Type2,
        digest: digest_texts(stream.tokens.iter().map(abstract_text)),
    }
}

fn is_idlit(kind: TokenKind) -> bool {
    kind == TokenKind::Identifier || kind.is_literal()
}

/// Bag-of-tokens summary used for near-miss (Type-3) comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneSketch {
    pub token_multiset: BTreeMap<String, u32>,
    pub idlit_set: BTreeSet<String>,
    pub token_count: usize,
    /// Type-2 fingerprint of the source sequence.
    pub structure: Fingerprint,
}

impl CloneSketch {
    pub fn from_stream(stream: &TokenStream) -> Self {
        let mut token_multiset = BTreeMap::new();
        let mut idlit_set = BTreeSet::new();
        for token in &stream.tokens {
            *token_multiset.entry(token.text.clone()).or_insert(0) += 1;
            if is_idlit(token.kind) {
                idlit_set.insert(token.text.clone());
            }
        }
        CloneSketch {
            token_multiset,
            idlit_set,
            token_count: stream.len(),
            structure: type2_fingerprint(stream),
        }
    }

    pub fn from_code(code: &str) -> Self {
        Self::from_stream(&tokenize(code))
    }
}

/// `sum(min) / sum(max)` over two sorted (key, count) sequences; 1 when both
/// are empty.
fn merge_multiset<K: Ord>(
    a: impl IntoIterator<Item = (K, u32)>,
    b: impl IntoIterator<Item = (K, u32)>,
) -> f64 {
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    let (mut min_sum, mut max_sum) = (0u64, 0u64);
    loop {
        match (a.peek(), b.peek()) {
            (Some((ka, ca)), Some((kb, cb))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => {
                    max_sum += u64::from(*ca);
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    max_sum += u64::from(*cb);
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    min_sum += u64::from((*ca).min(*cb));
                    max_sum += u64::from((*ca).max(*cb));
                    a.next();
                    b.next();
                }
            },
            (Some((_, ca)), None) => {
                max_sum += u64::from(*ca);
                a.next();
            }
            (None, Some((_, cb))) => {
                max_sum += u64::from(*cb);
                b.next();
            }
            (None, None) => break,
        }
    }
    if max_sum == 0 {
        1.0
    } else {
        min_sum as f64 / max_sum as f64
    }
}

/// `|a ∩ b| / |a ∪ b|` over two sorted, deduplicated sequences; 1 when both
/// are empty.
fn merge_set<K: Ord>(a: impl IntoIterator<Item = K>, b: impl IntoIterator<Item = K>) -> f64 {
    let (mut a, mut b) = (a.into_iter().peekable(), b.into_iter().peekable());
    let (mut inter, mut union) = (0usize, 0usize);
    loop {
        match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => {
                match x.cmp(y) {
                    std::cmp::Ordering::Less => {
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        inter += 1;
                        a.next();
                        b.next();
                    }
                }
                union += 1;
            }
            (Some(_), None) => {
                union += 1;
                a.next();
            }
            (None, Some(_)) => {
                union += 1;
                b.next();
            }
            (None, None) => break,
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn multiset_jaccard(a: &BTreeMap<String, u32>, b: &BTreeMap<String, u32>) -> f64 {
    merge_multiset(
        a.iter().map(|(k, &c)| (k, c)),
        b.iter().map(|(k, &c)| (k, c)),
    )
}

pub fn set_jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    merge_set(a.iter(), b.iter())
}

/// Near-miss test on bag-of-tokens similarity alone.
pub fn is_type3_pair(
    a: &CloneSketch,
    b: &CloneSketch,
    multiset_threshold: f64,
    set_threshold: f64,
) -> bool {
    multiset_jaccard(&a.token_multiset, &b.token_multiset) >= multiset_threshold
        && set_jaccard(&a.idlit_set, &b.idlit_set) >= set_threshold
}

/// The full Type-3 clone relation used for clustering: both sketches meet
/// the minimum size, and they are Type-2 clones or pass [`is_type3_pair`].
pub fn are_type3_clones(a: &CloneSketch, b: &CloneSketch, config: &CloneConfig) -> bool {
    let min = config.min_tokens.max(1);
    if a.token_count < min || b.token_count < min {
        return false;
    }
    a.structure == b.structure
        || is_type3_pair(a, b, config.multiset_threshold, config.set_threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneConfig {
    pub multiset_threshold: f64,
    pub set_threshold: f64,
    /// Samples with fewer tokens take part in no Type-3 pair.
    pub min_tokens: usize,
    pub ubiquity_fraction: f64,
    pub ubiquity_floor: usize,
}

impl Default for CloneConfig {
    fn default() -> Self {
        CloneConfig {
            multiset_threshold: 0.8,
            set_threshold: 0.7,
            min_tokens: 5,
            ubiquity_fraction: 0.05,
            ubiquity_floor: 10_000,
        }
    }
}

impl CloneConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("multiset threshold", self.multiset_threshold),
            ("set threshold", self.set_threshold),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (0, 1], got {t}"
                )));
            }
        }
        if !(self.ubiquity_fraction > 0.0 && self.ubiquity_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ubiquity fraction must lie in (0, 1], got {}",
                self.ubiquity_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterTier {
    Type1,
    Type3,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelProfile {
    pub vulnerable: usize,
    pub non_vulnerable: usize,
}

impl LabelProfile {
    pub fn add(&mut self, label: Label) {
        match label {
            Label::Vulnerable => self.vulnerable += 1,
            Label::NonVulnerable => self.non_vulnerable += 1,
        }
    }

    pub fn is_mixed(&self) -> bool {
        self.vulnerable > 0 && self.non_vulnerable > 0
    }
}

/// A set of mutually duplicate samples. Serialized one per line as
/// `{"tier":"type3","members":[...],"label_profile":{...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneCluster {
    pub tier: ClusterTier,
    #[serde(rename = "members")]
    pub member_ids: Vec<String>,
    pub label_profile: LabelProfile,
}

/// Per-sample data needed for clustering, with token texts interned.
struct Features {
    exact: [u8; 16],
    structure: [u8; 16],
    token_count: usize,
    /// sorted by token id
    multiset: Vec<(u32, u32)>,
    /// sorted by token id
    idlit: Vec<u32>,
}

struct LocalFeatures<'s> {
    exact: [u8; 16],
    structure: [u8; 16],
    token_count: usize,
    counts: Vec<(&'s str, u32, bool)>,
}

fn local_features(stream: &TokenStream) -> LocalFeatures<'_> {
    let mut counts: HashMap<&str, (u32, bool)> = HashMap::new();
    for t in &stream.tokens {
        let entry = counts.entry(t.text.as_str()).or_insert((0, false));
        entry.0 += 1;
        entry.1 |= is_idlit(t.kind);
    }
    LocalFeatures {
        exact: type1_fingerprint(stream).digest,
        structure: type2_fingerprint(stream).digest,
        token_count: stream.len(),
        counts: counts.into_iter().map(|(k, (c, i))| (k, c, i)).collect(),
    }
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, text: &str) -> u32 {
        if let Some(&id) = self.ids.get(text) {
            return id;
        }
        let id = self.ids.len() as u32;
        self.ids.insert(text.to_owned(), id);
        id
    }

    fn finish(&mut self, local: LocalFeatures<'_>) -> Features {
        let mut multiset = Vec::with_capacity(local.counts.len());
        let mut idlit = Vec::new();
        for (text, count, is_idlit) in local.counts {
            let id = self.intern(text);
            multiset.push((id, count));
            if is_idlit {
                idlit.push(id);
            }
        }
        multiset.sort_unstable();
        idlit.sort_unstable();
        Features {
            exact: local.exact,
            structure: local.structure,
            token_count: local.token_count,
            multiset,
            idlit,
        }
    }
}

const CHUNK: usize = 4096;

fn features_from_streams(streams: &[TokenStream]) -> (Vec<Features>, usize) {
    let mut interner = Interner::default();
    let mut out = Vec::with_capacity(streams.len());
    for chunk in streams.chunks(CHUNK) {
        let locals: Vec<_> = chunk.par_iter().map(local_features).collect();
        out.extend(locals.into_iter().map(|l| interner.finish(l)));
    }
    (out, interner.ids.len())
}

fn features_from_dataset(dataset: &Dataset) -> (Vec<Features>, usize) {
    let mut interner = Interner::default();
    let mut out = Vec::with_capacity(dataset.len());
    for chunk in dataset.samples().chunks(CHUNK) {
        let streams: Vec<TokenStream> = chunk.par_iter().map(|s| tokenize(&s.code)).collect();
        let locals: Vec<_> = streams.par_iter().map(local_features).collect();
        out.extend(locals.into_iter().map(|l| interner.finish(l)));
    }
    (out, interner.ids.len())
}

/// Clusters every sample of `dataset`; lexes internally without keeping the
/// token streams around.
pub fn cluster(
    dataset: &Dataset,
    tier: ClusterTier,
    same_label_only: bool,
    config: &CloneConfig,
) -> Result<Vec<CloneCluster>> {
    config.validate()?;
    let (features, vocab) = features_from_dataset(dataset);
    let labels: Vec<Label> = dataset.iter().map(|s| s.label).collect();
    let groups = cluster_features(&features, vocab, &labels, tier, same_label_only, config);
    Ok(to_clusters(dataset, groups, tier))
}

/// Index-level clustering over already-lexed samples (`streams[i]` belongs
/// to `dataset.samples()[i]`). Each group is sorted by sample id and groups
/// are ordered by their smallest id.
pub fn cluster_indices(
    dataset: &Dataset,
    streams: &[TokenStream],
    tier: ClusterTier,
    same_label_only: bool,
    config: &CloneConfig,
) -> Result<Vec<Vec<usize>>> {
    config.validate()?;
    assert_eq!(dataset.len(), streams.len(), "one token stream per sample");
    let (features, vocab) = features_from_streams(streams);
    let labels: Vec<Label> = dataset.iter().map(|s| s.label).collect();
    let mut groups = cluster_features(&features, vocab, &labels, tier, same_label_only, config);
    sort_groups(dataset, &mut groups);
    Ok(groups)
}

pub(crate) fn sort_groups(dataset: &Dataset, groups: &mut [Vec<usize>]) {
    let samples = dataset.samples();
    for g in groups.iter_mut() {
        g.sort_by(|&a, &b| samples[a].id.cmp(&samples[b].id));
    }
    groups.sort_by(|a, b| samples[a[0]].id.cmp(&samples[b[0]].id));
}

pub(crate) fn to_clusters(
    dataset: &Dataset,
    mut groups: Vec<Vec<usize>>,
    tier: ClusterTier,
) -> Vec<CloneCluster> {
    sort_groups(dataset, &mut groups);
    let samples = dataset.samples();
    groups
        .into_iter()
        .map(|g| {
            let mut label_profile = LabelProfile::default();
            for &i in &g {
                label_profile.add(samples[i].label);
            }
            CloneCluster {
                tier,
                member_ids: g.iter().map(|&i| samples[i].id.clone()).collect(),
                label_profile,
            }
        })
        .collect()
}

fn partition_key(label: Label, same_label_only: bool) -> u8 {
    match (same_label_only, label) {
        (false, _) => 0,
        (true, Label::Vulnerable) => 1,
        (true, Label::NonVulnerable) => 2,
    }
}

fn cluster_features(
    features: &[Features],
    vocab: usize,
    labels: &[Label],
    tier: ClusterTier,
    same_label_only: bool,
    config: &CloneConfig,
) -> Vec<Vec<usize>> {
    let min_tokens = match tier {
        ClusterTier::Type1 => 1,
        ClusterTier::Type3 => config.min_tokens.max(1),
    };
    let mut dsu = DisjointSet::new(features.len());

    // Exact duplicates: one representative per (partition, type-1 digest).
    let mut exact_groups: HashMap<(u8, [u8; 16]), usize> = HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    for (i, f) in features.iter().enumerate() {
        if f.token_count < min_tokens {
            continue;
        }
        let key = (partition_key(labels[i], same_label_only), f.exact);
        match exact_groups.get(&key) {
            Some(&rep) => {
                dsu.union(rep, i);
            }
            None => {
                exact_groups.insert(key, i);
                reps.push(i);
            }
        }
    }

    if tier == ClusterTier::Type3 {
        // Type-2 matches.
        let mut by_structure: HashMap<(u8, [u8; 16]), usize> = HashMap::new();
        for &i in &reps {
            let key = (
                partition_key(labels[i], same_label_only),
                features[i].structure,
            );
            let first = *by_structure.entry(key).or_insert(i);
            dsu.union(first, i);
        }

        // Bag-of-tokens matches, blocked per label partition.
        let mut partitions: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for &i in &reps {
            partitions
                .entry(partition_key(labels[i], same_label_only))
                .or_default()
                .push(i);
        }
        for members in partitions.values() {
            for (a, b) in near_miss_edges(features, vocab, members, config) {
                dsu.union(a, b);
            }
        }
    }

    dsu.groups().into_iter().filter(|g| g.len() >= 2).collect()
}

/// All verified bag-of-tokens pairs among `members` (sample indices).
fn near_miss_edges(
    features: &[Features],
    vocab: usize,
    members: &[usize],
    config: &CloneConfig,
) -> Vec<(usize, usize)> {
    let n = members.len();
    if n < 2 {
        return Vec::new();
    }

    // Global order: rarest identifier/literal first.
    let mut df = vec![0u32; vocab];
    for &i in members {
        for &t in &features[i].idlit {
            df[t as usize] += 1;
        }
    }
    let mut order: Vec<u32> = (0..vocab as u32).collect();
    order.sort_unstable_by_key(|&t| (df[t as usize], t));
    let mut rank = vec![0u32; vocab];
    for (r, &t) in order.iter().enumerate() {
        rank[t as usize] = r as u32;
    }

    let ubiquity_limit =
        ((config.ubiquity_fraction * n as f64) as usize).max(config.ubiquity_floor);
    let t_set = config.set_threshold;

    // Ranked idlit sets and prefixes, indexed by position in `members`.
    let ranked: Vec<Vec<u32>> = members
        .par_iter()
        .map(|&i| {
            let mut v: Vec<u32> = features[i]
                .idlit
                .iter()
                .map(|&t| rank[t as usize])
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    let prefix_len = |len: usize| -> usize {
        if len == 0 {
            return 0;
        }
        let needed = (t_set * len as f64 - 1e-9).ceil().max(0.0) as usize;
        (len - needed.min(len) + 1).min(len)
    };

    let mut postings: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut empties: Vec<u32> = Vec::new();
    for (pos, set) in ranked.iter().enumerate() {
        if set.is_empty() {
            empties.push(pos as u32);
            continue;
        }
        for &tok in &set[..prefix_len(set.len())] {
            postings.entry(tok).or_default().push(pos as u32);
        }
    }
    postings.retain(|_, list| list.len() <= ubiquity_limit);

    let verify = |p: usize, q: usize| -> bool {
        let (a, b) = (&features[members[p]], &features[members[q]]);
        let (sa, sb) = (ranked[p].len() as f64, ranked[q].len() as f64);
        if sa.min(sb) < t_set * sa.max(sb) - 1e-9 {
            return false;
        }
        let (ca, cb) = (a.token_count as f64, b.token_count as f64);
        if ca.min(cb) < config.multiset_threshold * ca.max(cb) - 1e-9 {
            return false;
        }
        merge_set(ranked[p].iter(), ranked[q].iter()) >= t_set
            && merge_multiset(a.multiset.iter().copied(), b.multiset.iter().copied())
                >= config.multiset_threshold
    };

    let mut edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|p| {
            let set = &ranked[p];
            let mut candidates: Vec<u32> = Vec::new();
            for tok in &set[..prefix_len(set.len())] {
                if let Some(list) = postings.get(tok) {
                    candidates.extend(list.iter().copied().take_while(|&q| (q as usize) < p));
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
            candidates
                .into_iter()
                .filter(|&q| verify(q as usize, p))
                .map(|q| (members[q as usize], members[p]))
                .collect::<Vec<_>>()
        })
        .collect();

    // Samples without identifiers or literals only match each other.
    for (k, &p) in empties.iter().enumerate() {
        for &q in &empties[..k] {
            if verify(q as usize, p as usize) {
                edges.push((members[q as usize], members[p as usize]));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CodeSample;

    fn fp1(code: &str) -> Fingerprint {
        type1_fingerprint(&tokenize(code))
    }

    fn fp2(code: &str) -> Fingerprint {
        type2_fingerprint(&tokenize(code))
    }

    #[test]
    fn type1_ignores_layout_and_comments() {
        assert_eq!(
            fp1("int f(){return 1;}"),
            fp1("int f() { /*x*/\n return 1; }")
        );
        assert_ne!(fp1("int f(){return 1;}"), fp1("int g(){return 1;}"));
        assert_ne!(fp1("int f(){return 1;}"), fp1("int f(){return 2;}"));
    }

    #[test]
    fn type2_abstracts_names_and_literals() {
        assert_eq!(fp2("int f(){return 1;}"), fp2("int g(){return 2;}"));
        assert_ne!(fp2("int f(){return 1;}"), fp2("int f(){return 1+1;}"));
        assert_ne!(fp2("for (;;) {}"), fp2("forx (;;) {}"));
        assert_ne!(fp2("s = \"a\";"), fp2("s = 'a';"));
        assert_ne!(fp1("x"), fp2("x"));
    }

    #[test]
    fn digest_is_injective_on_token_boundaries() {
        let a = TokenStream {
            tokens: vec![tok("ab"), tok("c")],
            ended_inside: crate::lexer::EndedInside::No,
        };
        let b = TokenStream {
            tokens: vec![tok("a"), tok("bc")],
            ended_inside: crate::lexer::EndedInside::No,
        };
        assert_ne!(type1_fingerprint(&a), type1_fingerprint(&b));
    }

    fn tok(text: &str) -> Token {
        Token {
            kind: TokenKind::Identifier,
            text: text.to_owned(),
            line: 1,
        }
    }

    fn sketch(multiset: &[(&str, u32)], idlit: &[&str]) -> CloneSketch {
        CloneSketch {
            token_multiset: multiset.iter().map(|(k, c)| (k.to_string(), *c)).collect(),
            idlit_set: idlit.iter().map(|s| s.to_string()).collect(),
            token_count: multiset.iter().map(|(_, c)| *c as usize).sum(),
            structure: fp2(&multiset.len().to_string()),
        }
    }

    #[test]
    fn jaccard_examples() {
        let a = sketch(&[("a", 2), ("b", 1)], &["a", "b"]);
        let b = sketch(&[("a", 1), ("b", 1), ("c", 1)], &["a", "b", "c"]);
        assert_eq!(multiset_jaccard(&a.token_multiset, &b.token_multiset), 0.5);
        assert!(!is_type3_pair(&a, &b, 0.8, 0.7));
        assert!(is_type3_pair(&a, &a, 1.0, 1.0));
        let c = sketch(&[("x", 3)], &["x"]);
        assert_eq!(multiset_jaccard(&a.token_multiset, &c.token_multiset), 0.0);
        assert_eq!(set_jaccard(&a.idlit_set, &c.idlit_set), 0.0);
        assert!(!is_type3_pair(&a, &c, 0.1, 0.1));
        assert!(is_type3_pair(&a, &b, 0.5, 2.0 / 3.0));
    }

    #[test]
    fn small_samples_form_no_type3_pairs() {
        let config = CloneConfig::default();
        let a = CloneSketch::from_code("f(x);");
        assert_eq!(a.token_count, 5);
        assert!(are_type3_clones(&a, &a, &config));
        let b = CloneSketch::from_code("f(x)");
        assert!(!are_type3_clones(&b, &b, &config));
    }

    fn ds(items: &[(&str, &str, Label)]) -> Dataset {
        Dataset::new(
            "t",
            items
                .iter()
                .map(|(id, code, l)| CodeSample::new(*id, *code, *l))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_functions_form_one_type1_cluster() {
        let d = ds(&[
            ("c", "int f(){return 1;}", Label::Vulnerable),
            ("a", "int f() {\n  return 1;\n}", Label::Vulnerable),
            ("b", "int f(){ return 1; } // same", Label::Vulnerable),
            ("d", "int g(){return 1;}", Label::Vulnerable),
        ]);
        let got = cluster(&d, ClusterTier::Type1, true, &CloneConfig::default()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].member_ids, ["a", "b", "c"]);
        assert_eq!(got[0].label_profile.vulnerable, 3);
    }

    #[test]
    fn same_label_filter() {
        let d = ds(&[
            ("a", "int f(){return 1;}", Label::Vulnerable),
            ("b", "int f(){return 1;}", Label::NonVulnerable),
        ]);
        let config = CloneConfig::default();
        for tier in [ClusterTier::Type1, ClusterTier::Type3] {
            assert!(cluster(&d, tier, true, &config).unwrap().is_empty());
            let got = cluster(&d, tier, false, &config).unwrap();
            assert_eq!(got.len(), 1);
            assert_eq!(
                got[0].label_profile,
                LabelProfile {
                    vulnerable: 1,
                    non_vulnerable: 1
                }
            );
        }
    }

    #[test]
    fn empty_code_is_never_clustered() {
        let d = ds(&[
            ("a", "", Label::Vulnerable),
            ("b", "  ", Label::NonVulnerable),
            ("c", "/* */", Label::NonVulnerable),
        ]);
        assert!(
            cluster(&d, ClusterTier::Type1, false, &CloneConfig::default())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn type3_chain_is_transitive() {
        // Identifier sets: a={p..t,u}, b={p..t,u,v}, c={p..t,v,w}.
        // Set Jaccard a~b 6/7, b~c 6/8, a~c 5/8.
        let base = "int p = q + r ; s ( t ) ; ";
        let a = format!("{base} u ;");
        let b = format!("{base} u ; v ;");
        let c = format!("{base} v ; w ;");
        let sk: Vec<_> = [&a, &b, &c]
            .iter()
            .map(|s| CloneSketch::from_code(s))
            .collect();
        let config = CloneConfig::default();
        assert!(are_type3_clones(&sk[0], &sk[1], &config));
        assert!(are_type3_clones(&sk[1], &sk[2], &config));
        assert!(!are_type3_clones(&sk[0], &sk[2], &config));
        let d = ds(&[
            ("a", &a, Label::Vulnerable),
            ("b", &b, Label::Vulnerable),
            ("c", &c, Label::Vulnerable),
            (
                "z",
                "void other(void) { launch(rockets); }",
                Label::Vulnerable,
            ),
        ]);
        let got = cluster(&d, ClusterTier::Type3, true, &config).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].member_ids, ["a", "b", "c"]);
        assert_eq!(got[0].tier, ClusterTier::Type3);
    }

    #[test]
    fn invalid_thresholds_are_rejected() {
        let config = CloneConfig {
            set_threshold: 0.0,
            ..CloneConfig::default()
        };
        let d = ds(&[("a", "x", Label::Vulnerable)]);
        assert!(matches!(
            cluster(&d, ClusterTier::Type3, true, &config),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cluster_dump_shape() {
        let c = CloneCluster {
            tier: ClusterTier::Type3,
            member_ids: vec!["a".into(), "b".into()],
            label_profile: LabelProfile {
                vulnerable: 2,
                non_vulnerable: 0,
            },
        };
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"tier":"type3","members":["a","b"],"label_profile":{"vulnerable":2,"non_vulnerable":0}}"#
        );
    }
}
