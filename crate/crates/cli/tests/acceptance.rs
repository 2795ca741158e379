//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any blocking criterion fails.
//!
//! Run with `cargo test -p vulnaudit-cli --test acceptance`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulnaudit::cleaning::{self, ConsistencyScope};
use vulnaudit::clones::{are_type3_clones, type1_fingerprint, type2_fingerprint, CloneSketch};
use vulnaudit::lexer::TokenKind;
use vulnaudit::metrics::{
    completeness, consistency, jensen_shannon_divergence, uniqueness, TokenDistribution,
};
use vulnaudit::review::{self, Rater, ReviewSheet, Verdict};
use vulnaudit::synth::{self, FixtureSpec};
use vulnaudit::{
    audit, clones, stats, tokenize, AuditConfig, CloneConfig, ClusterTier, CompletenessClass,
    Dataset, Label,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("fixture-oracle-audit", fixture_oracle_audit),
        ("clone-oracle-equivalence", clone_oracle_equivalence),
        ("clone-hierarchy", clone_hierarchy),
        ("jsd-properties", jsd_properties),
        ("statistics-oracles", statistics_oracles),
        ("determinism", determinism),
        ("fixed-points", fixed_points),
        ("scale-200k", scale),
        ("big-vul-parity (informative)", big_vul_parity),
    ];
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(detail) => {
                passed += 1;
                println!("PASS  {name}  [{secs:.2}s]  {detail}");
            }
            Outcome::Fail(detail) => {
                failed += 1;
                println!("FAIL  {name}  [{secs:.2}s]  {detail}");
            }
            Outcome::Skip(detail) => {
                skipped += 1;
                println!("SKIP  {name}  {detail}");
            }
        }
    }
    println!("acceptance: {passed} passed, {failed} failed, {skipped} skipped");
    if failed > 0 {
        std::process::exit(1);
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// ---------------------------------------------------------------------------
// Fixture oracle

/// JSD in bits via entropies: H(M) - (H(P) + H(Q)) / 2.
fn entropy_jsd(p: &HashMap<&str, f64>, q: &HashMap<&str, f64>) -> f64 {
    let h = |d: &mut dyn Iterator<Item = f64>| -> f64 {
        d.filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
    };
    let keys: BTreeSet<&str> = p.keys().chain(q.keys()).copied().collect();
    let m: Vec<f64> = keys
        .iter()
        .map(|k| 0.5 * (p.get(k).unwrap_or(&0.0) + q.get(k).unwrap_or(&0.0)))
        .collect();
    h(&mut m.into_iter()) - 0.5 * (h(&mut p.values().copied()) + h(&mut q.values().copied()))
}

fn normalized<'a>(counts: &HashMap<&'a str, u64>) -> HashMap<&'a str, f64> {
    let total: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(k, &c)| (*k, c as f64 / total as f64))
        .collect()
}

fn fixture_oracle_audit() -> Outcome {
    let start = Instant::now();
    let fx = synth::fixture(&FixtureSpec::planted());
    let d = &fx.dataset;
    let n = d.len();
    let label_of: HashMap<&str, Label> = d.iter().map(|s| (s.id.as_str(), s.label)).collect();

    // Uniqueness: members of planted near-miss clusters, plus copies inside
    // a mixed cluster that share a label with another copy.
    let mut not_unique = 0;
    for c in &fx.plants.type3_clusters {
        not_unique += c.len();
    }
    for c in &fx.plants.mixed_clusters {
        for label in [Label::Vulnerable, Label::NonVulnerable] {
            let k = c.iter().filter(|id| label_of[id.as_str()] == label).count();
            if k >= 2 {
                not_unique += k;
            }
        }
    }
    let inconsistent: usize = fx.plants.mixed_clusters.iter().map(Vec::len).sum();
    let incomplete = fx.plants.incomplete.len();

    // Currentness from the generator's own token lists.
    let mut dated: Vec<usize> = (0..n)
        .filter(|&i| d.samples()[i].report_date.is_some())
        .collect();
    dated.sort_by_key(|&i| (d.samples()[i].report_date, d.samples()[i].id.clone()));
    let older_len = dated.len().div_ceil(2);
    let mut halves = [HashMap::new(), HashMap::new()];
    for (rank, &i) in dated.iter().enumerate() {
        let half = &mut halves[usize::from(rank >= older_len)];
        for t in &fx.tokens[i] {
            *half.entry(t.as_str()).or_insert(0u64) += 1;
        }
    }
    let expected_currentness = 1.0 - entropy_jsd(&normalized(&halves[0]), &normalized(&halves[1]));

    let report = match audit(d, &AuditConfig::default(), None) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(format!("audit failed: {e}")),
    };
    let elapsed = start.elapsed();
    let s = &report.scores;
    let mut problems = Vec::new();
    let mut exact = |name: &str, got: (usize, usize), want: usize| {
        if got != (want, n) {
            problems.push(format!("{name}: got {}/{}, want {want}/{n}", got.0, got.1));
        }
    };
    exact(
        "uniqueness",
        (s.uniqueness.satisfied_count, s.uniqueness.total_count),
        n - not_unique,
    );
    exact(
        "consistency",
        (s.consistency.satisfied_count, s.consistency.total_count),
        n - inconsistent,
    );
    exact(
        "completeness",
        (s.completeness.satisfied_count, s.completeness.total_count),
        n - incomplete,
    );
    if s.uniqueness.value != (n - not_unique) as f64 / n as f64 {
        problems.push("uniqueness value is not the exact ratio".into());
    }
    for class in CompletenessClass::ALL {
        let planted = fx
            .plants
            .incomplete
            .iter()
            .filter(|(_, c)| *c == class)
            .count();
        let want = if class == CompletenessClass::Complete {
            n - incomplete
        } else {
            planted
        };
        if report.completeness_breakdown.count(class) != want {
            problems.push(format!(
                "breakdown {class}: got {}",
                report.completeness_breakdown.count(class)
            ));
        }
    }
    let mut want_ids: Vec<&str> = fx
        .plants
        .mixed_clusters
        .iter()
        .flatten()
        .map(String::as_str)
        .collect();
    want_ids.sort_unstable();
    if report.inconsistent_clusters.affected_ids != want_ids {
        problems.push("inconsistent ids differ from plants".into());
    }
    let currentness = s.currentness.as_ref().map(|c| c.value);
    match currentness {
        Some(v) if (v - expected_currentness).abs() <= 1e-9 => {}
        other => problems.push(format!(
            "currentness {other:?} vs oracle {expected_currentness}"
        )),
    }
    if report.currentness_detail.undated_count != fx.plants.undated.len() {
        problems.push("undated count differs".into());
    }
    if elapsed >= Duration::from_secs(5) {
        problems.push(format!("took {elapsed:?}"));
    }
    verdict(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "n={n} uniqueness={:.4} consistency={:.4} completeness={:.4} currentness={:.10} (oracle {:.10}) in {:.2}s",
                s.uniqueness.value,
                s.consistency.value,
                s.completeness.value,
                currentness.unwrap_or(f64::NAN),
                expected_currentness,
                elapsed.as_secs_f64()
            )
        } else {
            problems.join("; ")
        },
    )
}

// ---------------------------------------------------------------------------
// Brute-force clone oracle

struct OracleSketch {
    count: usize,
    structure: Vec<String>,
    multiset: HashMap<String, u64>,
    idlit: BTreeSet<String>,
}

fn oracle_sketch(code: &str) -> OracleSketch {
    let stream = tokenize(code);
    let mut multiset = HashMap::new();
    let mut idlit = BTreeSet::new();
    let mut structure = Vec::new();
    for t in &stream.tokens {
        *multiset.entry(t.text.clone()).or_insert(0) += 1;
        let abstracted = match t.kind {
            TokenKind::Identifier => "<id>".to_string(),
            TokenKind::NumberLiteral => "<num>".to_string(),
            TokenKind::StringLiteral => "<str>".to_string(),
            TokenKind::CharLiteral => "<chr>".to_string(),
            _ => format!("={}", t.text),
        };
        structure.push(abstracted);
        if matches!(
            t.kind,
            TokenKind::Identifier
                | TokenKind::NumberLiteral
                | TokenKind::StringLiteral
                | TokenKind::CharLiteral
        ) {
            idlit.insert(t.text.clone());
        }
    }
    OracleSketch {
        count: stream.tokens.len(),
        structure,
        multiset,
        idlit,
    }
}

fn oracle_related(a: &OracleSketch, b: &OracleSketch, config: &CloneConfig) -> bool {
    if a.count < config.min_tokens || b.count < config.min_tokens {
        return false;
    }
    if a.structure == b.structure {
        return true;
    }
    let keys: BTreeSet<&String> = a.multiset.keys().chain(b.multiset.keys()).collect();
    let (mut lo, mut hi) = (0u64, 0u64);
    for k in keys {
        let (x, y) = (
            *a.multiset.get(k).unwrap_or(&0),
            *b.multiset.get(k).unwrap_or(&0),
        );
        lo += x.min(y);
        hi += x.max(y);
    }
    let inter = a.idlit.intersection(&b.idlit).count();
    let union = a.idlit.union(&b.idlit).count();
    let set_j = if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    };
    lo as f64 / hi as f64 >= config.multiset_threshold && set_j >= config.set_threshold
}

fn oracle_partition(d: &Dataset, same_label: bool, config: &CloneConfig) -> BTreeSet<Vec<String>> {
    let sketches: Vec<OracleSketch> = d.iter().map(|s| oracle_sketch(&s.code)).collect();
    let n = d.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if same_label && d.samples()[i].label != d.samples()[j].label {
                continue;
            }
            if oracle_related(&sketches[i], &sketches[j], config) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(d.samples()[i].id.clone());
    }
    groups
        .into_values()
        .filter(|g| g.len() >= 2)
        .map(|mut g| {
            g.sort();
            g
        })
        .collect()
}

fn clone_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let config = CloneConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut clustered = 0;
    for k in 0..30u64 {
        let n = rng.random_range(100..=500);
        let d = synth::random_clone_corpus(1000 + k, n);
        let same_label = k % 3 != 2;
        let want = oracle_partition(&d, same_label, &config);
        let got: BTreeSet<Vec<String>> =
            match clones::cluster(&d, ClusterTier::Type3, same_label, &config) {
                Ok(c) => c.into_iter().map(|c| c.member_ids).collect(),
                Err(e) => return Outcome::Fail(format!("corpus {k}: {e}")),
            };
        if got != want {
            return Outcome::Fail(format!(
                "corpus {k} (n={n}, same_label={same_label}): {} clusters vs oracle {}",
                got.len(),
                want.len()
            ));
        }
        clustered += want.iter().map(Vec::len).sum::<usize>();
    }
    let elapsed = start.elapsed();
    verdict(
        elapsed < Duration::from_secs(60),
        format!(
            "30 corpora identical to brute force ({clustered} clustered samples) in {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// Hierarchy

fn layout(tokens: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::from("/* variant */\n");
    for t in tokens {
        out.push_str(t);
        out.push_str(if rng.random_bool(0.2) { "\n\t" } else { "  " });
    }
    out
}

fn clone_hierarchy() -> Outcome {
    let config = CloneConfig::default();
    let bases = synth::random_clone_corpus(77, 2500);
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let (mut t1, mut t2, mut t3, mut checked) = (0, 0, 0, 0);
    for (i, base) in bases.iter().enumerate() {
        let stream = tokenize(&base.code);
        let texts: Vec<String> = stream.tokens.iter().map(|t| t.text.clone()).collect();
        for mode in 0..4 {
            let variant = match mode {
                0 => layout(&texts, &mut rng),
                1 => {
                    let renamed: Vec<String> = stream
                        .tokens
                        .iter()
                        .map(|t| match t.kind {
                            TokenKind::Identifier => format!("{}_r", t.text),
                            TokenKind::NumberLiteral => format!("{}", rng.random_range(0..99)),
                            _ => t.text.clone(),
                        })
                        .collect();
                    layout(&renamed, &mut rng)
                }
                2 => {
                    let mut edited = texts.clone();
                    let at = rng.random_range(0..=edited.len());
                    edited.splice(
                        at..at,
                        ["x".to_string(), "=".into(), "0".into(), ";".into()],
                    );
                    layout(&edited, &mut rng)
                }
                _ => bases.samples()[(i * 7 + 13) % bases.len()].code.clone(),
            };
            let (a, b) = (stream.clone(), tokenize(&variant));
            if a.len() < config.min_tokens || b.len() < config.min_tokens {
                continue;
            }
            checked += 1;
            let is1 = type1_fingerprint(&a) == type1_fingerprint(&b);
            let is2 = type2_fingerprint(&a) == type2_fingerprint(&b);
            let is3 = are_type3_clones(
                &CloneSketch::from_stream(&a),
                &CloneSketch::from_stream(&b),
                &config,
            );
            if (is1 && !is2) || (is2 && !is3) {
                return Outcome::Fail(format!("pair {i}/{mode}: t1={is1} t2={is2} t3={is3}"));
            }
            t1 += usize::from(is1);
            t2 += usize::from(is2);
            t3 += usize::from(is3);
        }
    }
    verdict(
        checked >= 9000 && t1 > 0 && t2 > t1,
        format!(
            "{checked} pairs (of 10000 generated), type1={t1} type2={t2} type3={t3}, no violation"
        ),
    )
}

// ---------------------------------------------------------------------------
// Divergence

fn jsd_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let keys: Vec<String> = (0..20).map(|i| format!("t{i}")).collect();
    let mut worst_sym: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..1000 {
        let draw = |rng: &mut ChaCha8Rng| {
            let support = rng.random_range(1..=keys.len());
            let mut weights: Vec<(String, f64)> = Vec::new();
            for k in &keys[..support] {
                if rng.random_bool(0.7) {
                    weights.push((k.clone(), rng.random_range(0.001..10.0)));
                }
            }
            if weights.is_empty() {
                vec![(keys[0].clone(), 1.0)]
            } else {
                weights
            }
        };
        let (wp, wq) = (draw(&mut rng), draw(&mut rng));
        let p = TokenDistribution::from_weights(wp.clone()).expect("non-empty");
        let q = TokenDistribution::from_weights(wq.clone()).expect("non-empty");
        let (pq, qp) = (
            jensen_shannon_divergence(&p, &q),
            jensen_shannon_divergence(&q, &p),
        );
        if !(0.0..=1.0).contains(&pq) {
            return Outcome::Fail(format!("out of range: {pq}"));
        }
        if jensen_shannon_divergence(&p, &p) != 0.0 {
            return Outcome::Fail("JSD(P, P) != 0".into());
        }
        worst_sym = worst_sym.max((pq - qp).abs());
        let to_map = |w: &[(String, f64)]| -> HashMap<String, f64> {
            let total: f64 = w.iter().map(|x| x.1).sum();
            w.iter().map(|(k, v)| (k.clone(), v / total)).collect()
        };
        let (mp, mq) = (to_map(&wp), to_map(&wq));
        let mp: HashMap<&str, f64> = mp.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mq: HashMap<&str, f64> = mq.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        worst_oracle = worst_oracle.max((pq - entropy_jsd(&mp, &mq)).abs());
    }
    let p = TokenDistribution::from_weights([("a", 1.0)]).expect("p");
    let q = TokenDistribution::from_weights([("a", 0.5), ("b", 0.5)]).expect("q");
    let example = jensen_shannon_divergence(&p, &q);
    let oracle = entropy_jsd(
        &HashMap::from([("a", 1.0)]),
        &HashMap::from([("a", 0.5), ("b", 0.5)]),
    );
    verdict(
        worst_sym <= 1e-12 && worst_oracle <= 1e-9 && (example - oracle).abs() <= 1e-6,
        format!(
            "1000 pairs: max asymmetry {worst_sym:e}, max oracle gap {worst_oracle:e}; worked example {example:.9} vs oracle {oracle:.9}"
        ),
    )
}

// ---------------------------------------------------------------------------
// Statistics

fn statistics_oracles() -> Outcome {
    let mut problems = Vec::new();
    match stats::mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]) {
        Ok(r) if r.u == 0.0 && (r.p_value - 0.1).abs() < 1e-12 => {}
        other => problems.push(format!("mwu: {other:?}")),
    }
    let tau = stats::kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).map(|r| r.tau_b);
    match tau {
        Ok(t) if (t - 2.0 / 3.0).abs() < 1e-12 => {}
        other => problems.push(format!("kendall: {other:?}")),
    }

    // 40 both-correct, 15 both-incorrect, 10 A-only-correct, 5 B-only-correct.
    let mut rows = Vec::new();
    rows.extend(std::iter::repeat_n((true, true), 40));
    rows.extend(std::iter::repeat_n((false, false), 15));
    rows.extend(std::iter::repeat_n((true, false), 10));
    rows.extend(std::iter::repeat_n((false, true), 5));
    let mut sheet = ReviewSheet::new("k", (0..rows.len()).map(|i| format!("r{i}")).collect())
        .expect("distinct ids");
    let v = |b: bool| {
        if b {
            Verdict::Correct
        } else {
            Verdict::Incorrect
        }
    };
    for (i, &(a, b)) in rows.iter().enumerate() {
        sheet
            .set_verdict(&format!("r{i}"), Rater::A, v(a))
            .expect("id");
        sheet
            .set_verdict(&format!("r{i}"), Rater::B, v(b))
            .expect("id");
    }
    let n = rows.len() as f64;
    let observed = rows.iter().filter(|(a, b)| a == b).count() as f64 / n;
    let a_yes = rows.iter().filter(|r| r.0).count() as f64 / n;
    let b_yes = rows.iter().filter(|r| r.1).count() as f64 / n;
    let chance = a_yes * b_yes + (1.0 - a_yes) * (1.0 - b_yes);
    let oracle_kappa = (observed - chance) / (1.0 - chance);
    match review::cohen_kappa(&sheet) {
        Ok(k) if (k - oracle_kappa).abs() <= 1e-6 => {}
        other => problems.push(format!("kappa {other:?} vs {oracle_kappa}")),
    }
    match stats::mcc(10, 0, 10, 0) {
        Ok(1.0) => {}
        other => problems.push(format!("mcc: {other:?}")),
    }
    let detail = if problems.is_empty() {
        format!("mwu p=0.1 exact, tau=2/3, kappa={oracle_kappa:.6}, mcc=1")
    } else {
        problems.join("; ")
    };
    verdict(problems.is_empty(), detail)
}

// ---------------------------------------------------------------------------
// Determinism through the binary

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_vulnaudit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let input = p("fixture.jsonl");
    vulnaudit::save_dataset(&synth::fixture(&FixtureSpec::planted()).dataset, &input)
        .expect("write fixture");

    let runs: [(&str, Vec<String>); 4] = [
        (
            "audit",
            vec![
                "audit".into(),
                "--input".into(),
                input.clone(),
                "--report".into(),
            ],
        ),
        (
            "split-random",
            vec![
                "split",
                "--input",
                &input,
                "--protocol",
                "random",
                "--seed",
                "7",
                "--dedup-cross-set",
                "--out",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
        (
            "split-temporal",
            vec![
                "split",
                "--input",
                &input,
                "--protocol",
                "temporal",
                "--out",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
        (
            "review-sample",
            vec![
                "review-sample",
                "--input",
                &input,
                "--n",
                "70",
                "--seed",
                "1",
                "--out",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
    ];
    let mut compared = Vec::new();
    for (name, args) in runs {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = p(&format!("{name}-{round}.json"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            full.push(&out);
            if let Err(e) = run_cli(&full) {
                return Outcome::Fail(e);
            }
            outputs.push(std::fs::read(&out).expect("output written"));
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Outcome::Fail(format!("{name}: outputs differ between runs"));
        }
        compared.push(format!("{name} ({} bytes)", outputs[0].len()));
    }
    Outcome::Pass(format!("byte-identical: {}", compared.join(", ")))
}

// ---------------------------------------------------------------------------
// Fixed points

fn fixed_points() -> Outcome {
    let config = CloneConfig::default();
    let audit_config = AuditConfig::default();
    for seed in 0..20u64 {
        let d = synth::fixture(&FixtureSpec::random(seed)).dataset;
        let fail = |what: &str| Outcome::Fail(format!("fixture {seed}: {what}"));

        let (once, _) =
            cleaning::deduplicate(&d, ClusterTier::Type3, true, &config).expect("dedup");
        let (twice, again) =
            cleaning::deduplicate(&once, ClusterTier::Type3, true, &config).expect("dedup");
        if twice != once || !again.is_empty() {
            return fail("deduplicate is not idempotent");
        }
        if uniqueness(&once, &audit_config).map(|s| s.value).ok() != Some(1.0) {
            return fail("uniqueness after dedup is not 1.0");
        }

        let (once, _) =
            cleaning::enforce_consistency(&d, ConsistencyScope::All, None).expect("consistency");
        let (twice, again) =
            cleaning::enforce_consistency(&once, ConsistencyScope::All, None).expect("consistency");
        if twice != once || !again.is_empty() {
            return fail("enforce_consistency is not idempotent");
        }
        if consistency(&once).map(|s| s.value).ok() != Some(1.0) {
            return fail("consistency after cleaning is not 1.0");
        }

        let (once, _) = cleaning::drop_incomplete(&d);
        let (twice, again) = cleaning::drop_incomplete(&once);
        if twice != once || !again.is_empty() {
            return fail("drop_incomplete is not idempotent");
        }
        if !once.is_empty() && completeness(&once).map(|s| s.0.value).ok() != Some(1.0) {
            return fail("completeness after cleaning is not 1.0");
        }
    }
    Outcome::Pass(
        "20 fixtures: dedup, consistency(all), drop-incomplete idempotent; targeted scores 1.0"
            .into(),
    )
}

// ---------------------------------------------------------------------------
// Scale

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn scale() -> Outcome {
    let d = synth::duplicated_corpus(2024, 200_000, 50);
    let start = Instant::now();
    let clusters = match clones::cluster(&d, ClusterTier::Type3, true, &CloneConfig::default()) {
        Ok(c) => c,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let elapsed = start.elapsed();
    let members: usize = clusters.iter().map(|c| c.member_ids.len()).sum();
    let peak = peak_rss_kib();
    let within_memory = peak.is_none_or(|kib| kib <= 8 * 1024 * 1024);
    verdict(
        elapsed <= Duration::from_secs(600) && within_memory,
        format!(
            "{} functions, {} clusters covering {members}, {:.1}s on {} threads, peak RSS {}",
            d.len(),
            clusters.len(),
            elapsed.as_secs_f64(),
            rayon::current_num_threads(),
            peak.map_or("unknown".into(), |k| format!("{} MiB", k / 1024))
        ),
    )
}

// ---------------------------------------------------------------------------
// Informative parity with a converted real-world dataset

fn big_vul_parity() -> Outcome {
    let Ok(path) = std::env::var("VULNAUDIT_BIGVUL") else {
        return Outcome::Skip("set VULNAUDIT_BIGVUL to a converted Big-Vul JSON-lines file".into());
    };
    let d = match vulnaudit::load_dataset(Path::new(&path)) {
        Ok(d) => d,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let report = match audit(&d, &AuditConfig::default(), None) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let s = &report.scores;
    let currentness = s.currentness.as_ref().map_or(f64::NAN, |c| c.value);
    let ok = (s.uniqueness.value - 0.830).abs() <= 0.03
        && (s.consistency.value - 0.999).abs() <= 0.03
        && (s.completeness.value - 0.824).abs() <= 0.03
        && (currentness - 0.761).abs() <= 0.05;
    let detail = format!(
        "uniqueness {:.3} consistency {:.3} completeness {:.3} currentness {currentness:.3}",
        s.uniqueness.value, s.consistency.value, s.completeness.value
    );
    if ok {
        Outcome::Pass(detail)
    } else {
        // not blocking
        Outcome::Skip(format!("outside tolerance: {detail}"))
    }
}
