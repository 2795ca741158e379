//! Deterministic synthetic corpora for tests and benchmarks.
//!
//! Every generated function is built from an explicit token list, which is
//! kept alongside the dataset so callers can check token-level results
//! without going through the lexer.

use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lexer::CompletenessClass;
use crate::model::{CodeSample, Dataset, Label};

const TYPES: [&str; 4] = ["int", "char", "long", "unsigned"];

fn base4_digits(mut idx: usize, count: usize) -> Vec<usize> {
    (0..count)
        .map(|_| {
            let d = idx % 4;
            idx /= 4;
            d
        })
        .collect()
}

/// Token layout of a generated function, split so truncations can cut at
/// known places.
#[derive(Debug, Clone)]
struct FunctionParts {
    /// Return type, name, parameter list.
    header: Vec<String>,
    body: Vec<String>,
}

impl FunctionParts {
    fn full(&self) -> Vec<String> {
        let mut t = self.header.clone();
        t.push("{".into());
        t.extend(self.body.iter().cloned());
        t.push("}".into());
        t
    }
}

/// A function whose identifiers and literal are private to `idx` and whose
/// Type-2 structure is unique for `idx < 4^8`.
fn distinct_function(idx: usize) -> FunctionParts {
    let p = format!("s{idx}");
    let (name, a, b, v) = (
        format!("{p}_fn"),
        format!("{p}_a"),
        format!("{p}_b"),
        format!("{p}_v"),
    );
    let digits = base4_digits(idx, 8);
    let ty = |d: usize| TYPES[d].to_string();
    let header = vec![
        ty(digits[3]),
        name,
        "(".into(),
        ty(digits[0]),
        a.clone(),
        ",".into(),
        ty(digits[1]),
        b.clone(),
        ",".into(),
        ty(digits[2]),
        "len".into(),
        ")".into(),
    ];
    let mut body: Vec<String> = Vec::new();
    let mut push = |toks: &[&str]| body.extend(toks.iter().map(|s| s.to_string()));
    push(&["int", &v, "=", &a, ";"]);
    for &d in &digits {
        match d {
            0 => push(&[&v, "=", &v, "+", &a, ";"]),
            1 => push(&[&v, "=", &v, "-", &b, ";"]),
            2 => push(&["if", "(", &v, ">", &a, ")", "{", &v, "=", &b, ";", "}"]),
            _ => push(&["while", "(", &v, "<", &b, ")", &v, "++", ";"]),
        }
    }
    push(&[
        "for", "(", "i", "=", "0", ";", "i", "<", "len", ";", "i", "++", ")", &v, "+=", "i", ";",
    ]);
    let lit = (1000 + idx).to_string();
    push(&["return", &v, "*", &lit, ";"]);
    FunctionParts { header, body }
}

/// Statement reusing the function's own names, so the variant keeps the
/// identifier set and differs from the original only by a few tokens.
fn near_miss_statement(idx: usize, variant: usize) -> Vec<String> {
    let p = format!("s{idx}");
    let (a, b, v) = (format!("{p}_a"), format!("{p}_b"), format!("{p}_v"));
    let toks: Vec<&str> = match variant % 5 {
        0 => vec![&v, "=", &a, ";"],
        1 => vec![&v, "=", &b, ";"],
        2 => vec![&a, "=", &b, ";"],
        3 => vec![&b, "=", &a, ";"],
        _ => vec![&v, "-=", "i", ";"],
    };
    toks.into_iter().map(String::from).collect()
}

/// Lays tokens out as source text with line breaks after `;`, `{` and `}`.
pub fn render(tokens: &[String]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && !out.ends_with('\n') {
            out.push(' ');
        }
        out.push_str(t);
        if matches!(t.as_str(), ";" | "{" | "}") {
            out.push('\n');
        }
    }
    out
}

/// Truncated or degenerate variant of a distinct function.
fn incomplete_tokens(idx: usize, class: CompletenessClass, variant: usize) -> Vec<String> {
    let f = distinct_function(idx);
    let full = f.full();
    match class {
        CompletenessClass::Complete => full,
        CompletenessClass::TruncatedStart => {
            if variant.is_multiple_of(2) {
                // return type on a line the extractor missed
                full[1..].to_vec()
            } else {
                let mut t = f.body.clone();
                t.push("}".into());
                t
            }
        }
        CompletenessClass::TruncatedEnd => {
            if variant.is_multiple_of(2) {
                full[..full.len() - 3].to_vec()
            } else {
                full[..f.header.len() + 1 + 5 + 2].to_vec()
            }
        }
        CompletenessClass::TruncatedBoth => f.body[..f.body.len() - 2].to_vec(),
        CompletenessClass::Empty => Vec::new(),
        CompletenessClass::DeclarationOnly => {
            let mut t = f.header.clone();
            t.push(";".into());
            t
        }
    }
}

/// Planted defects of a [`Fixture`], by sample id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plants {
    /// Same-label near-miss clusters.
    pub type3_clusters: Vec<Vec<String>>,
    /// Exact copies carrying both labels.
    pub mixed_clusters: Vec<Vec<String>>,
    pub incomplete: Vec<(String, CompletenessClass)>,
    pub undated: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub dataset: Dataset,
    /// Tokens each sample was generated from, parallel to the samples.
    pub tokens: Vec<Vec<String>>,
    pub plants: Plants,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureSpec {
    /// Clean singleton functions.
    pub singletons: usize,
    pub type3_cluster_sizes: Vec<usize>,
    /// (vulnerable, non-vulnerable) copies per cluster.
    pub mixed_clusters: Vec<(usize, usize)>,
    pub incomplete_per_class: usize,
    /// Singletons left without a report date.
    pub undated: usize,
    pub seed: u64,
}

impl FixtureSpec {
    /// About 200 functions with every kind of defect planted.
    pub fn planted() -> Self {
        FixtureSpec {
            singletons: 150,
            type3_cluster_sizes: vec![3, 4, 5],
            mixed_clusters: vec![(1, 1), (2, 1)],
            incomplete_per_class: 5,
            undated: 4,
            seed: 2024,
        }
    }

    /// Spec of the same shape with random counts.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FixtureSpec {
            singletons: rng.random_range(20..80),
            type3_cluster_sizes: (0..rng.random_range(0..5))
                .map(|_| rng.random_range(2..7))
                .collect(),
            mixed_clusters: (0..rng.random_range(0..4))
                .map(|_| (rng.random_range(1..3), rng.random_range(1..3)))
                .collect(),
            incomplete_per_class: rng.random_range(0..4),
            undated: rng.random_range(0..5),
            seed,
        }
    }
}

const COMPLETENESS_PLANTS: [CompletenessClass; 5] = [
    CompletenessClass::TruncatedStart,
    CompletenessClass::TruncatedEnd,
    CompletenessClass::TruncatedBoth,
    CompletenessClass::Empty,
    CompletenessClass::DeclarationOnly,
];

/// Builds a fixture from `spec`. Sample order and labels are shuffled under
/// the spec's seed; ids are `fx0000`, `fx0001`, ... in generation order.
pub fn fixture(spec: &FixtureSpec) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entries: Vec<(Vec<String>, String, Label)> = Vec::new();
    let mut plants = Plants::default();
    let mut next_fn = 0usize;
    let mut fresh = || {
        next_fn += 1;
        next_fn - 1
    };
    let random_label = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.5) {
            Label::Vulnerable
        } else {
            Label::NonVulnerable
        }
    };

    let mut singleton_ids = Vec::new();
    for _ in 0..spec.singletons {
        let f = distinct_function(fresh()).full();
        let id = format!("fx{:04}", entries.len());
        singleton_ids.push(id.clone());
        let label = random_label(&mut rng);
        let code = render(&f);
        entries.push((f, code, label));
    }

    for &size in &spec.type3_cluster_sizes {
        let idx = fresh();
        let label = random_label(&mut rng);
        let base = distinct_function(idx);
        let mut ids = Vec::new();
        for member in 0..size {
            let mut body = base.body.clone();
            if member > 0 {
                let at = 5;
                let stmt = near_miss_statement(idx, member - 1);
                body.splice(at..at, stmt);
            }
            let f = FunctionParts {
                header: base.header.clone(),
                body,
            }
            .full();
            ids.push(format!("fx{:04}", entries.len()));
            let code = render(&f);
            entries.push((f, code, label));
        }
        plants.type3_clusters.push(ids);
    }

    for &(vulnerable, non_vulnerable) in &spec.mixed_clusters {
        let f = distinct_function(fresh()).full();
        let mut ids = Vec::new();
        for copy in 0..vulnerable + non_vulnerable {
            let label = if copy < vulnerable {
                Label::Vulnerable
            } else {
                Label::NonVulnerable
            };
            let code = if copy == 0 {
                render(&f)
            } else {
                format!("/* copy {copy} */\n{}", f.join("  "))
            };
            ids.push(format!("fx{:04}", entries.len()));
            entries.push((f.clone(), code, label));
        }
        plants.mixed_clusters.push(ids);
    }

    for class in COMPLETENESS_PLANTS {
        for variant in 0..spec.incomplete_per_class {
            let f = incomplete_tokens(fresh(), class, variant);
            let code = if class == CompletenessClass::Empty && variant % 2 == 1 {
                "  \n\t".to_string()
            } else {
                render(&f)
            };
            let id = format!("fx{:04}", entries.len());
            plants.incomplete.push((id, class));
            let label = random_label(&mut rng);
            entries.push((f, code, label));
        }
    }

    // Dates: one per sample, spread over ten years with repeats, except the
    // undated singletons.
    let undated: Vec<String> = singleton_ids
        .iter()
        .rev()
        .take(spec.undated)
        .cloned()
        .collect();
    let start = NaiveDate::from_ymd_opt(2010, 1, 1).expect("valid date");
    let samples: Vec<CodeSample> = entries
        .iter()
        .enumerate()
        .map(|(i, (_, code, label))| {
            let id = format!("fx{i:04}");
            let mut s = CodeSample::new(id.clone(), code.clone(), *label).with_origin("synthetic");
            if !undated.contains(&id) {
                s.report_date = Some(start + Days::new(rng.random_range(0..3650)));
            }
            s
        })
        .collect();
    plants.undated = undated;

    // Shuffle presentation order; ids stay attached to their samples.
    let mut order: Vec<usize> = (0..samples.len()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let tokens = order.iter().map(|&i| entries[i].0.clone()).collect();
    let samples = order.iter().map(|&i| samples[i].clone()).collect();
    Fixture {
        dataset: Dataset::new("fixture", samples).expect("generated ids are unique"),
        tokens,
        plants,
    }
}

const POOL: [&str; 16] = [
    "buf", "len", "i", "j", "n", "p", "q", "ctx", "ret", "err", "size", "data", "ptr", "off",
    "tmp", "flags",
];

fn random_statement(rng: &mut ChaCha8Rng) -> Vec<String> {
    let id = |rng: &mut ChaCha8Rng| POOL.choose(rng).expect("non-empty").to_string();
    let lit = |rng: &mut ChaCha8Rng| rng.random_range(0..12).to_string();
    let (x, y) = (id(rng), id(rng));
    let toks: Vec<String> = match rng.random_range(0..6) {
        0 => vec![x, "=".into(), y, ";".into()],
        1 => vec![x, "=".into(), y, "+".into(), lit(rng), ";".into()],
        2 => vec![
            "if".into(),
            "(".into(),
            x.clone(),
            "<".into(),
            lit(rng),
            ")".into(),
            "return".into(),
            y,
            ";".into(),
        ],
        3 => vec![x, "(".into(), y, ")".into(), ";".into()],
        4 => vec![
            x,
            "[".into(),
            lit(rng),
            "]".into(),
            "=".into(),
            y,
            ";".into(),
        ],
        _ => vec![
            "while".into(),
            "(".into(),
            x.clone(),
            ")".into(),
            x,
            "--".into(),
            ";".into(),
        ],
    };
    toks
}

/// Functions over a small shared vocabulary: near-duplicates of a few
/// templates with random edits, so many pairs sit close to the clone
/// thresholds. Labels are random.
pub fn random_clone_corpus(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template_count = (n / 6).max(1);
    let templates: Vec<Vec<Vec<String>>> = (0..template_count)
        .map(|_| {
            let len = rng.random_range(1..9);
            (0..len).map(|_| random_statement(&mut rng)).collect()
        })
        .collect();
    let samples = (0..n)
        .map(|i| {
            let mut stmts = templates.choose(&mut rng).expect("templates").clone();
            for _ in 0..rng.random_range(0..4) {
                match rng.random_range(0..4) {
                    0 => {
                        let at = rng.random_range(0..=stmts.len());
                        stmts.insert(at, random_statement(&mut rng));
                    }
                    1 if stmts.len() > 1 => {
                        let at = rng.random_range(0..stmts.len());
                        stmts.remove(at);
                    }
                    2 => {
                        let s = rng.random_range(0..stmts.len());
                        let t = rng.random_range(0..stmts[s].len());
                        if POOL.contains(&stmts[s][t].as_str()) {
                            stmts[s][t] = POOL.choose(&mut rng).expect("pool").to_string();
                        }
                    }
                    _ => {}
                }
            }
            let name = POOL.choose(&mut rng).expect("pool");
            let mut toks: Vec<String> = ["int", name, "(", "int", "n", ")", "{"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            toks.extend(stmts.into_iter().flatten());
            toks.push("}".into());
            let label = if rng.random_bool(0.5) {
                Label::Vulnerable
            } else {
                Label::NonVulnerable
            };
            CodeSample::new(format!("r{i:04}"), render(&toks), label)
        })
        .collect();
    Dataset::new(format!("random-{seed}"), samples).expect("unique ids")
}

/// Large corpus where each base function appears about `copies` times:
/// exact copies, renamed copies and small edits, mostly under the base's
/// label. Ids are `d000000`, `d000001`, ...
pub fn duplicated_corpus(seed: u64, total: usize, copies: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let copies = copies.max(1);
    let bases = total.div_ceil(copies);
    let start = NaiveDate::from_ymd_opt(2012, 1, 1).expect("valid date");
    let mut samples = Vec::with_capacity(total);
    'outer: for b in 0..bases {
        let base = distinct_function(b);
        let label = if rng.random_bool(0.4) {
            Label::Vulnerable
        } else {
            Label::NonVulnerable
        };
        for c in 0..copies {
            if samples.len() == total {
                break 'outer;
            }
            let toks = match rng.random_range(0..10) {
                0..=3 => base.full(),
                4..=6 => {
                    let rename = format!("s{b}_v");
                    let to = format!("s{b}_r{c}");
                    base.full()
                        .into_iter()
                        .map(|t| if t == rename { to.clone() } else { t })
                        .collect()
                }
                _ => {
                    let mut body = base.body.clone();
                    body.splice(5..5, near_miss_statement(b, c));
                    FunctionParts {
                        header: base.header.clone(),
                        body,
                    }
                    .full()
                }
            };
            let flipped = rng.random_bool(0.01);
            let label = match (label, flipped) {
                (l, false) => l,
                (Label::Vulnerable, true) => Label::NonVulnerable,
                (Label::NonVulnerable, true) => Label::Vulnerable,
            };
            let id = format!("d{:06}", samples.len());
            samples.push(
                CodeSample::new(id, render(&toks), label)
                    .with_date(start + Days::new(rng.random_range(0..3000))),
            );
        }
    }
    Dataset::new("duplicated", samples).expect("unique ids")
}
