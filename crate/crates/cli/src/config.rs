//! Suite configuration and its validation.

use std::path::PathBuf;
use std::str::FromStr;

use afftrace::constants::Dimensions;
use afftrace::quadrature::Orders;
use afftrace::trace::Tolerances;
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "AFFTRACE_WORKERS";

/// Groups of checks the suite can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    Constants,
    Quadrature,
    Convex,
    Lemmas,
    Theorems,
    Chain,
    Appendix,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 7] = [
        CheckGroup::Constants,
        CheckGroup::Quadrature,
        CheckGroup::Convex,
        CheckGroup::Lemmas,
        CheckGroup::Theorems,
        CheckGroup::Chain,
        CheckGroup::Appendix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Constants => "constants",
            CheckGroup::Quadrature => "quadrature",
            CheckGroup::Convex => "convex",
            CheckGroup::Lemmas => "lemmas",
            CheckGroup::Theorems => "theorems",
            CheckGroup::Chain => "chain",
            CheckGroup::Appendix => "appendix",
        }
    }

    /// Groups selected by a suite name: `default` (or `all`) or a single group.
    pub fn suite(name: &str) -> Result<Vec<CheckGroup>, UsageError> {
        match name {
            "default" | "all" => Ok(Self::ALL.to_vec()),
            other => Ok(vec![other.parse()?]),
        }
    }
}

impl FromStr for CheckGroup {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| UsageError(format!("unknown check group `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" | "jsonl" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(UsageError(format!("unknown format `{s}` (json | csv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub checks: Vec<CheckGroup>,
    /// `(n, p)` pairs; validated against `3 ≤ n`, `1 < p < n`.
    pub dims: Vec<(usize, f64)>,
    /// Half-space quadrature orders; `None` uses the per-dimension defaults.
    pub orders: Option<Orders>,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Randomized extremals in the corpus.
    pub extremals: usize,
    /// Random frames per function in the affine-invariance check.
    pub frames: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Worker threads; `None` reads the environment, then the machine.
    pub workers: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            checks: CheckGroup::ALL.to_vec(),
            dims: vec![(3, 2.0)],
            orders: None,
            tolerances: Tolerances::default(),
            seed: 20240521,
            extremals: 10,
            frames: 20,
            output: None,
            format: Format::Json,
            workers: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        let cfg: SuiteConfig =
            serde_json::from_str(text).map_err(|e| UsageError(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        self.dimensions()?;
        if self.checks.is_empty() {
            return Err(UsageError("no checks selected".into()));
        }
        let t = &self.tolerances;
        if [t.equality, t.identity, t.invariance]
            .iter()
            .any(|x| !(*x > 0.0) || !x.is_finite())
        {
            return Err(UsageError("tolerances must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(UsageError("at least one worker is needed".into()));
        }
        Ok(())
    }

    pub fn dimensions(&self) -> Result<Vec<Dimensions>, UsageError> {
        self.dims
            .iter()
            .map(|&(n, p)| Dimensions::new(n, p).map_err(|e| UsageError(e.to_string())))
            .collect()
    }

    pub fn worker_count(&self) -> usize {
        self.workers
            .or_else(|| {
                std::env::var(WORKERS_ENV)
                    .ok()?
                    .parse()
                    .ok()
                    .filter(|&w| w > 0)
            })
            .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
            .unwrap_or(1)
    }
}
