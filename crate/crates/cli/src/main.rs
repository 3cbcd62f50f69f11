use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use afftrace::constants::Dimensions;
use afftrace::convex::{centroid_body, BodyRecord};
use afftrace_cli::{
    emit_constants_table, parse_range, run_suite_with, CheckGroup, Format, ReportWriter,
    SuiteConfig, UsageError,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "afftrace",
    version,
    about = "Numerical verification of sharp affine trace inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and stream its reports.
    Verify {
        /// `default`, or one of constants, quadrature, convex, lemmas, theorems, chain, appendix.
        #[arg(long, default_value = "default")]
        suite: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Tolerance for equality-case ratios.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
        /// JSON suite configuration; command-line flags are ignored when given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads (default from the environment, then the machine).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the constants for a range of dimensions.
    Constants {
        #[arg(long = "n-range", default_value = "3..8")]
        n_range: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Apply a convex-body operation to a body record.
    Body {
        #[arg(long, value_enum)]
        op: BodyOp,
        #[arg(long = "in")]
        input: PathBuf,
        /// Exponent of the centroid body.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BodyOp {
    Centroid,
    Polar,
    Volume,
}

enum Failure {
    Usage(UsageError),
    Io(io::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(UsageError(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Verify {
            suite,
            n,
            p,
            tol,
            seed,
            out,
            format,
            config,
            workers,
        } => {
            let config = match config {
                Some(path) => {
                    SuiteConfig::from_json(&std::fs::read_to_string(&path).map_err(usage)?)?
                }
                None => {
                    let mut c = SuiteConfig {
                        checks: CheckGroup::suite(&suite)?,
                        dims: vec![(n, p)],
                        format: format.parse::<Format>()?,
                        output: out,
                        workers,
                        ..SuiteConfig::default()
                    };
                    if let Some(t) = tol {
                        c.tolerances.equality = t;
                    }
                    if let Some(s) = seed {
                        c.seed = s;
                    }
                    c
                }
            };
            config.validate()?;
            let sink: Box<dyn Write> = match &config.output {
                Some(path) => Box::new(BufWriter::new(File::create(path)?)),
                None => Box::new(io::stdout().lock()),
            };
            let mut writer = ReportWriter::new(sink, config.format);
            let mut io_error = None;
            let outcome = run_suite_with(&config, |r| {
                if io_error.is_none() {
                    io_error = writer.report(r).err();
                }
            })?;
            if let Some(e) = io_error {
                return Err(e.into());
            }
            writer.summary(&outcome.summary)?;
            let s = &outcome.summary;
            eprintln!(
                "{} checks: {} passed, {} failed ({:.1} s)",
                s.total,
                s.passed,
                s.failed,
                s.wall_time_ms / 1e3
            );
            Ok(s.all_passed())
        }
        Command::Constants { n_range, p, format } => {
            let dims = parse_range(&n_range)?
                .into_iter()
                .map(|n| Dimensions::new(n, p).map_err(usage))
                .collect::<Result<Vec<_>, _>>()?;
            print!("{}", emit_constants_table(&dims, format.parse()?));
            Ok(true)
        }
        Command::Body { op, input, p } => {
            let text = std::fs::read_to_string(&input).map_err(usage)?;
            let body = BodyRecord::from_json(&text)
                .map_err(usage)?
                .to_body()
                .map_err(usage)?;
            let out = match op {
                BodyOp::Volume => serde_json::json!({ "volume": body.volume() }).to_string(),
                BodyOp::Polar => BodyRecord::sample(&body.polar()).to_json(),
                BodyOp::Centroid => {
                    BodyRecord::sample(&centroid_body(&body, p).map_err(usage)?).to_json()
                }
            };
            println!("{out}");
            Ok(true)
        }
    }
}
