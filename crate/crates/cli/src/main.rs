use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use vulnaudit::cleaning::{self, ConsistencyScope, Removal, SplitAssignment, SplitRatios};
use vulnaudit::ingestion::{self, write_dataset};
use vulnaudit::review::{self, ReviewSheet};
use vulnaudit::{
    clones, load_dataset, stats, AuditConfig, CloneConfig, ClusterTier, Dataset, Label,
    UniquenessConvention,
};

mod args;

use args::*;

enum Failure {
    /// Bad flags or flag combinations.
    Usage(String),
    /// Invalid input data or arguments rejected by the library.
    Input(vulnaudit::Error),
    /// Anything else, e.g. failing to write an output file.
    Internal(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Input(_) => 2,
            Failure::Internal(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Input(e) => write!(f, "{e}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<vulnaudit::Error> for Failure {
    fn from(e: vulnaudit::Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("vulnaudit: {e}");
        return ExitCode::from(e.exit_code());
    }
    let result = match cli.command {
        Command::Audit(a) => audit(a),
        Command::Clean(a) => clean(a),
        Command::Split(a) => split(a),
        Command::ReviewSample(a) => review_sample(a),
        Command::ReviewKappa(a) => review_kappa(a),
        Command::ReviewScore(a) => review_score(a),
        Command::Stats(a) => run_stats(a),
        Command::Mcc(a) => mcc(a),
        Command::Clusters(a) => clusters(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vulnaudit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> CmdResult {
    let Ok(value) = std::env::var("VULNAUDIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        Failure::Usage(format!(
            "VULNAUDIT_THREADS must be a non-negative integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn write_dataset_file(dataset: &Dataset, path: &Path) -> CmdResult {
    let file = fs::File::create(path)
        .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    write_dataset(dataset, &mut w)?;
    w.flush()
        .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn write_log(path: Option<&Path>, removals: &[Removal]) -> CmdResult {
    let Some(path) = path else { return Ok(()) };
    let mut buf = Vec::new();
    cleaning::write_removals(removals, &mut buf)?;
    fs::write(path, buf).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn clone_config(a: &CloneArgs) -> Result<CloneConfig, Failure> {
    let config = CloneConfig {
        multiset_threshold: a.multiset,
        set_threshold: a.set,
        min_tokens: a.min_tokens,
        ..CloneConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn audit(a: AuditArgs) -> CmdResult {
    let dataset = load_dataset(&a.input)?;
    let config = AuditConfig {
        clones: clone_config(&a.clones)?,
        uniqueness_convention: match a.uniqueness_convention {
            ConventionArg::Member => UniquenessConvention::Member,
            ConventionArg::Representative => UniquenessConvention::Representative,
        },
    };
    let sheet = a.review.as_deref().map(ReviewSheet::load).transpose()?;
    let report = vulnaudit::audit(&dataset, &config, sheet.as_ref())?;
    write_file(&a.report, &report.to_json()?)?;

    println!("{}: {} samples", report.dataset_name, report.sample_count);
    for score in report.scores.iter() {
        if score.total_count > 0 {
            println!(
                "{:<13} {:.3}  ({}/{})",
                score.attribute, score.value, score.satisfied_count, score.total_count
            );
        } else {
            println!("{:<13} {:.3}", score.attribute, score.value);
        }
    }
    if report.scores.currentness.is_none() {
        println!("{:<13} -  (fewer than two dated samples)", "currentness");
    }
    Ok(())
}

fn clean(a: CleanArgs) -> CmdResult {
    if a.scope == ScopeArg::TestOnly && a.split.is_none() {
        return Err(Failure::Usage("--scope test-only requires --split".into()));
    }
    let mut dataset = load_dataset(&a.input)?;
    let split = a.split.as_deref().map(SplitAssignment::load).transpose()?;
    let config = clone_config(&a.clones)?;
    let mut log = Vec::new();
    for op in &a.ops {
        let before = dataset.len();
        let (next, removals) = match op {
            CleanOp::Dedup => {
                cleaning::deduplicate(&dataset, ClusterTier::Type3, !a.label_agnostic, &config)?
            }
            CleanOp::Consistency => {
                let scope = match a.scope {
                    ScopeArg::All => ConsistencyScope::All,
                    ScopeArg::TestOnly => ConsistencyScope::TestOnly,
                };
                let split = split.as_ref().map(|s| restrict(s, &dataset));
                cleaning::enforce_consistency(&dataset, scope, split.as_ref())?
            }
            CleanOp::Completeness => cleaning::drop_incomplete(&dataset),
        };
        println!("{:<13} removed {}", op_name(*op), before - next.len());
        dataset = next;
        log.extend(removals);
    }
    write_dataset_file(&dataset, &a.output)?;
    write_log(a.log.as_deref(), &log)?;
    println!("kept {} samples", dataset.len());
    Ok(())
}

fn op_name(op: CleanOp) -> &'static str {
    match op {
        CleanOp::Dedup => "dedup",
        CleanOp::Consistency => "consistency",
        CleanOp::Completeness => "completeness",
    }
}

/// Drops split ids that earlier cleaning steps removed from the dataset.
fn restrict(split: &SplitAssignment, dataset: &Dataset) -> SplitAssignment {
    let present: std::collections::HashSet<&str> = dataset.iter().map(|s| s.id.as_str()).collect();
    let gone = split
        .all_ids()
        .into_iter()
        .filter(|id| !present.contains(id))
        .map(str::to_owned)
        .collect();
    split.without(&gone)
}

fn split(a: SplitArgs) -> CmdResult {
    let dataset = load_dataset(&a.input)?;
    let mut assignment = match a.protocol {
        ProtocolArg::Random => {
            let ratios = SplitRatios {
                train: a.ratios[0],
                validation: a.ratios[1],
                test: a.ratios[2],
            };
            cleaning::random_split(&dataset, ratios, a.seed)?
        }
        ProtocolArg::Temporal => cleaning::temporal_split(&dataset)?,
    };
    let mut removals = Vec::new();
    if a.dedup_cross_set {
        let config = clone_config(&a.clones)?;
        let clusters = cleaning::cross_set_clusters(&dataset, a.label_agnostic, &config)?;
        (assignment, removals) = cleaning::remove_cross_set_duplicates(&assignment, &clusters);
    }
    write_file(&a.out, &assignment.to_json()?)?;
    write_log(a.log.as_deref(), &removals)?;
    println!(
        "fitting {} / test {} samples",
        assignment.fitting_ids().len(),
        assignment.test_ids().len()
    );
    if a.dedup_cross_set {
        println!("cross-set duplicates removed from test: {}", removals.len());
    }
    Ok(())
}

fn review_sample(a: ReviewSampleArgs) -> CmdResult {
    let dataset = load_dataset(&a.input)?;
    let label = match a.label {
        LabelArg::Vulnerable => Some(Label::Vulnerable),
        LabelArg::NonVulnerable => Some(Label::NonVulnerable),
        LabelArg::Any => None,
    };
    let n = match a.n {
        Some(n) => n,
        None => {
            let population = dataset
                .iter()
                .filter(|s| label.is_none_or(|l| s.label == l))
                .count();
            if population == 0 {
                return Err(Failure::Input(vulnaudit::Error::SampleTooLarge {
                    requested: 1,
                    available: 0,
                }));
            }
            review::cochran_sample_size(a.confidence, a.margin, 0.5, population as u64)? as usize
        }
    };
    let sheet = review::sample_for_review(&dataset, label, n, a.seed)?;
    write_file(&a.out, &sheet.to_json()?)?;
    println!("sampled {} ids", sheet.len());
    Ok(())
}

fn review_kappa(a: SheetArgs) -> CmdResult {
    let sheet = ReviewSheet::load(&a.sheet)?;
    println!("{:?}", review::cohen_kappa(&sheet)?);
    Ok(())
}

fn review_score(a: SheetArgs) -> CmdResult {
    let sheet = ReviewSheet::load(&a.sheet)?;
    let score = review::accuracy_score(&sheet)?;
    println!("{:?}", score.value);
    Ok(())
}

fn read_column(path: &Path, column: &str, delimiter: char) -> Result<Vec<f64>, Failure> {
    if !delimiter.is_ascii() {
        return Err(Failure::Usage(
            "--delimiter must be an ASCII character".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter as u8)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let has_header = first.iter().any(|cell| cell.parse::<f64>().is_err());
    let index = match column.parse::<usize>() {
        Ok(i) => i,
        Err(_) if has_header => first.iter().position(|c| c == column).ok_or_else(|| {
            Failure::Usage(format!("{}: no column named {column:?}", path.display()))
        })?,
        Err(_) => {
            return Err(Failure::Usage(format!(
                "{}: has no header row to look up {column:?}",
                path.display()
            )))
        }
    };
    records
        .iter()
        .enumerate()
        .skip(usize::from(has_header))
        .filter(|(_, r)| !(r.len() == 1 && r[0].is_empty()))
        .map(|(line, r)| {
            let cell = r.get(index).ok_or_else(|| {
                Failure::Usage(format!(
                    "{}: line {} has no column {index}",
                    path.display(),
                    line + 1
                ))
            })?;
            cell.parse::<f64>().map_err(|_| {
                Failure::Usage(format!(
                    "{}: line {}: {cell:?} is not a number",
                    path.display(),
                    line + 1
                ))
            })
        })
        .collect()
}

fn run_stats(a: StatsArgs) -> CmdResult {
    let x = read_column(&a.a, &a.column, a.delimiter)?;
    let y = read_column(&a.b, &a.column, a.delimiter)?;
    match a.test {
        TestArg::Mwu => {
            let r = stats::mann_whitney_u(&x, &y)?;
            let method = match r.method {
                stats::PMethod::Exact => "exact",
                stats::PMethod::Asymptotic => "normal approximation",
            };
            println!("U = {:?}", r.u);
            println!("p = {:?} ({method}, two-sided)", r.p_value);
        }
        TestArg::Kendall => {
            let r = stats::kendall_tau(&x, &y)?;
            println!("tau_b = {:?}", r.tau_b);
            println!("p = {:?} (normal approximation, two-sided)", r.p_value);
        }
    }
    Ok(())
}

fn mcc(a: MccArgs) -> CmdResult {
    println!("{:?}", stats::mcc(a.tp, a.fp, a.tn, a.fn_)?);
    Ok(())
}

fn clusters(a: ClustersArgs) -> CmdResult {
    let dataset = load_dataset(&a.input)?;
    let tier = match a.tier {
        TierArg::Type1 => ClusterTier::Type1,
        TierArg::Type3 => ClusterTier::Type3,
    };
    let found = clones::cluster(&dataset, tier, a.same_label, &clone_config(&a.clones)?)?;
    let mut text =
        serde_json::to_string_pretty(&found).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    write_file(&a.out, &text)?;
    let members: usize = found.iter().map(|c| c.member_ids.len()).sum();
    println!("{} clusters, {} samples", found.len(), members);
    Ok(())
}

fn validate(a: InputArgs) -> CmdResult {
    let dataset = load_dataset(&a.input)?;
    let s = ingestion::validate(&dataset);
    println!("samples         {}", s.total);
    println!("vulnerable      {}", s.vulnerable);
    println!("non_vulnerable  {}", s.non_vulnerable);
    println!("missing date    {}", s.missing_date);
    println!("empty code      {}", s.empty_code);
    Ok(())
}
