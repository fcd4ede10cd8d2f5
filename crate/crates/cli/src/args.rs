//! Command-line parsing. Flags the CLI knows are handled by clap; every
//! other `--key value` pair is a dotted-path override of the config.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ldtail::report::Format;

const OVERRIDE_HELP: &str = "\
Any other `--KEY VALUE` (or `--KEY=VALUE`) sets the config field at the
dotted path KEY, e.g. `--distribution.p 0.4` or `--methods '[\"thm6\"]'`.
VALUE is read as JSON when it parses and as a string otherwise.";

#[derive(Debug, Parser)]
#[command(name = "ldtail", version, about = "Large-deviation tail approximations and oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Saddle root h, rate exponent alpha, lambda and b0 over a c grid.
    #[command(after_help = OVERRIDE_HELP)]
    Rate(RunArgs),
    /// Tail probabilities by method over (n, x) or (n, c) grids.
    #[command(after_help = OVERRIDE_HELP)]
    Tail(RunArgs),
    /// Monte Carlo and importance-sampling tail estimates.
    #[command(after_help = OVERRIDE_HELP)]
    Simulate(RunArgs),
    /// Correction-series coefficients c0, c1 and lambda over a z grid.
    #[command(after_help = OVERRIDE_HELP)]
    Series(RunArgs),
    /// Compare a result file against a golden baseline.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the result manifest to PATH (`-` for standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format; defaults to the config, then the file extension, then csv.
    #[arg(long, value_name = "csv|json")]
    pub format: Option<Format>,
    /// Seed for simulation methods (default 0).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(skip)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Result file to check.
    pub current: PathBuf,
    /// Golden baseline file.
    pub baseline: PathBuf,
    /// Relative tolerance for deterministic rows.
    #[arg(long, value_name = "X", default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Write the diff report as JSON to PATH.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// `(dotted key, raw value)` pairs in command-line order.
pub type Overrides = Vec<(String, String)>;

const KNOWN_FLAGS: [&str; 8] = [
    "config",
    "out",
    "format",
    "seed",
    "threads",
    "tolerance",
    "help",
    "version",
];

/// Splits argv into the clap-visible part and `(key, value)` overrides.
pub fn split_overrides(argv: &[String]) -> Result<(Vec<OsString>, Overrides), String> {
    let mut known = Vec::with_capacity(argv.len());
    let mut overrides = Vec::new();
    let mut iter = argv.iter().enumerate();
    while let Some((i, arg)) = iter.next() {
        let Some(body) = arg.strip_prefix("--").filter(|b| !b.is_empty() && i > 0) else {
            known.push(OsString::from(arg));
            continue;
        };
        let (name, inline) = match body.split_once('=') {
            Some((n, v)) => (n, Some(v.to_string())),
            None => (body, None),
        };
        if KNOWN_FLAGS.contains(&name) {
            known.push(OsString::from(arg));
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => match iter.next() {
                Some((_, v)) => v.clone(),
                None => return Err(format!("override `--{name}` needs a value")),
            },
        };
        overrides.push((name.to_string(), value));
    }
    Ok((known, overrides))
}

/// Parses argv (including the program name).
pub fn parse(argv: &[String]) -> Result<Cli, clap::Error> {
    let (known, overrides) = match split_overrides(argv) {
        Ok(split) => split,
        Err(msg) => return Err(Cli::command_error(msg)),
    };
    let mut cli = Cli::try_parse_from(known)?;
    match &mut cli.command {
        Sub::Rate(a) | Sub::Tail(a) | Sub::Simulate(a) | Sub::Series(a) => a.overrides = overrides,
        Sub::Compare(_) if !overrides.is_empty() => {
            return Err(Cli::command_error(format!(
                "compare takes no config overrides (got `--{}`)",
                overrides[0].0
            )));
        }
        Sub::Compare(_) => {}
    }
    Ok(cli)
}

impl Cli {
    fn command_error(msg: String) -> clap::Error {
        use clap::CommandFactory;
        Cli::command().error(clap::error::ErrorKind::ValueValidation, msg)
    }
}
