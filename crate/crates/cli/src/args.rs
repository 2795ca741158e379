use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "vulnaudit",
    version,
    about = "Audit, clean and split function-level vulnerability datasets",
    after_help = "Set VULNAUDIT_THREADS to cap worker threads (0 = one per core)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a dataset on every quality attribute and write a JSON report
    Audit(AuditArgs),
    /// Apply cleaning filters in the order given
    Clean(CleanArgs),
    /// Produce a random or temporal train/validation/test split
    Split(SplitArgs),
    /// Draw a seeded sample of ids for manual label review
    ReviewSample(ReviewSampleArgs),
    /// Cohen's kappa between the two raters of a review sheet
    ReviewKappa(SheetArgs),
    /// Accuracy from an adjudicated review sheet
    ReviewScore(SheetArgs),
    /// Compare two metric columns with a Mann-Whitney U or Kendall test
    Stats(StatsArgs),
    /// Matthews correlation coefficient from confusion counts
    Mcc(MccArgs),
    /// Write clone clusters as JSON
    Clusters(ClustersArgs),
    /// Check an input file and print label and metadata counts
    Validate(InputArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset in JSON-lines interchange format
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConventionArg {
    Member,
    Representative,
}

#[derive(Debug, Args)]
pub struct CloneArgs {
    /// Token-multiset Jaccard threshold for near-miss clones
    #[arg(long = "type3-multiset", default_value_t = 0.8)]
    pub multiset: f64,
    /// Identifier/literal set Jaccard threshold for near-miss clones
    #[arg(long = "type3-set", default_value_t = 0.7)]
    pub set: f64,
    /// Functions with fewer tokens are never near-miss clones
    #[arg(long, default_value_t = 5)]
    pub min_tokens: usize,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the JSON report
    #[arg(long)]
    pub report: PathBuf,
    /// Adjudicated review sheet; enables the accuracy score
    #[arg(long)]
    pub review: Option<PathBuf>,
    #[command(flatten)]
    pub clones: CloneArgs,
    #[arg(long, value_enum, default_value = "member")]
    pub uniqueness_convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CleanOp {
    Dedup,
    Consistency,
    Completeness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    All,
    TestOnly,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub ops: Vec<CleanOp>,
    /// Where the consistency filter removes samples
    #[arg(long, value_enum, default_value = "all")]
    pub scope: ScopeArg,
    /// Split file; required with --scope test-only
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Write removal records (JSON lines) here
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Deduplicate across labels instead of within each label
    #[arg(long)]
    pub label_agnostic: bool,
    #[command(flatten)]
    pub clones: CloneArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Random,
    Temporal,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    pub protocol: ProtocolArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train/validation/test ratios for the random protocol
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.8, 0.1, 0.1])]
    pub ratios: Vec<f64>,
    /// Drop test samples that have a clone in train or validation
    #[arg(long)]
    pub dedup_cross_set: bool,
    /// Use clusters spanning both labels for --dedup-cross-set
    #[arg(long)]
    pub label_agnostic: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Write removal records (JSON lines) here
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub clones: CloneArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelArg {
    Vulnerable,
    NonVulnerable,
    Any,
}

#[derive(Debug, Args)]
pub struct ReviewSampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Sample size; computed from --confidence and --margin when omitted
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.90)]
    pub confidence: f64,
    #[arg(long, default_value_t = 0.10)]
    pub margin: f64,
    #[arg(long, value_enum, default_value = "vulnerable")]
    pub label: LabelArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SheetArgs {
    #[arg(long)]
    pub sheet: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    Mwu,
    Kendall,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, value_enum)]
    pub test: TestArg,
    /// First sample (Mann-Whitney) or x values (Kendall)
    #[arg(long)]
    pub a: PathBuf,
    /// Second sample (Mann-Whitney) or y values (Kendall)
    #[arg(long)]
    pub b: PathBuf,
    /// Column to read, by zero-based index or header name
    #[arg(long, default_value = "0")]
    pub column: String,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

#[derive(Debug, Args)]
pub struct MccArgs {
    #[arg(long)]
    pub tp: u64,
    #[arg(long)]
    pub fp: u64,
    #[arg(long)]
    pub tn: u64,
    #[arg(long = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Type1,
    Type3,
}

#[derive(Debug, Args)]
pub struct ClustersArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "type3")]
    pub tier: TierArg,
    /// Only cluster samples that share a label
    #[arg(long)]
    pub same_label: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub clones: CloneArgs,
}
