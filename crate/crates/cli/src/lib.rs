//! Batch verification harness: configuration, seeded corpus, concurrent
//! suite execution with streamed reports, and the constants table.

pub mod config;
pub mod corpus;
pub mod suite;
pub mod table;

pub use config::{CheckGroup, Format, SuiteConfig, WORKERS_ENV};
pub use corpus::{Corpus, Kind};
pub use suite::{run_suite, run_suite_with, Outcome, ReportWriter, Summary};
pub use table::{constants_table, emit_constants_table, ConstantRow};

/// A malformed configuration or command line; reported with exit status 2.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Parses `a..b` (inclusive) into the list of integers it spans.
pub fn parse_range(text: &str) -> Result<Vec<usize>, UsageError> {
    let bad = || UsageError(format!("expected a range like 3..8, got `{text}`"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (usize, usize) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    Ok((a..=b).collect())
}
