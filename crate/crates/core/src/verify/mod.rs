//! Batch verification: spec files, named suites and reports.
//!
//! ```
//! use metallic_warp::verify::{resolve_spec, run, RunOptions};
//!
//! let spec = resolve_spec("builtin:polar").unwrap();
//! let report = run(&spec, &["lemma-curvature".to_string()], &RunOptions::default()).unwrap();
//! assert_eq!(report.records().len(), 5);
//! assert!(!report.has_failures());
//! ```

mod builtin;
mod report;
mod spec_file;
mod suites;

use thiserror::Error;

pub use builtin::{builtin_text, resolve_spec, BUILTINS};
pub use report::{Record, Report, Verdict};
pub use spec_file::{load_spec, parse_spec, Location, MapDef, SpecError, SpecErrorKind, SpecFile, StructureDef, WARPED_CHART};
pub use suites::{run, run_suite, RunOptions, Tolerances, SUITES, TOLERANCE_KEYS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}`, parameter `{key}`: {message}")]
    Param { suite: String, key: String, message: String },
    #[error("{0}")]
    Tolerance(String),
    #[error("builtin spec: {0}")]
    Builtin(String),
    #[error("{0}")]
    Check(String),
}

#[cfg(test)]
mod tests;
