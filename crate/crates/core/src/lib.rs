//! Data quality auditing for function-level vulnerability datasets.
//!
//! The crate scores a labelled corpus of C/C++ functions on five quality
//! attributes (accuracy, uniqueness, consistency, completeness, currentness),
//! detects clone clusters, and provides the cleaning filters and split
//! protocols used to measure their effect on downstream models.
//!
//! ```
//! use vulnaudit::{audit, AuditConfig, CodeSample, Dataset, Label};
//!
//! let dataset = Dataset::new("demo", vec![
//!     CodeSample::new("a", "int f(int x) { return x + 1; }", Label::Vulnerable),
//!     CodeSample::new("b", "int f(int x) { return x + 1; }", Label::NonVulnerable),
//! ]).unwrap();
//! let report = audit(&dataset, &AuditConfig::default(), None).unwrap();
//! assert_eq!(report.scores.consistency.value, 0.0);
//! ```

pub mod cleaning;
pub mod clones;
mod error;
pub mod ingestion;
pub mod lexer;
pub mod metrics;
mod model;
pub mod review;
pub mod stats;
pub mod synth;

pub use cleaning::SplitAssignment;
pub use clones::{CloneCluster, CloneConfig, ClusterTier};
pub use error::{Error, Result};
pub use ingestion::{load_dataset, save_dataset};
pub use lexer::{classify_completeness, tokenize, CompletenessClass, TokenStream};
pub use metrics::{audit, AuditConfig, QualityReport, UniquenessConvention};
pub use model::{
    attribute_score, Attribute, AttributeScore, CodeSample, Dataset, Label, ScoreBasis,
};
pub use review::ReviewSheet;
