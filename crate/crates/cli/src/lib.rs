//! Command-line front end for `ldtail`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::io::Write;
use std::path::Path;

use ldtail::report::{self, compare_golden, emit, Format, RunManifest};
use serde_json::{json, Value};

use crate::args::{CompareArgs, RunArgs, Sub};
use crate::commands::Command;
use crate::error::{exit, CliError};

/// Runs the CLI with `argv` (including the program name), writing the
/// table to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write, color: bool) -> i32 {
    let cli = match args::parse(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return exit::OK;
            }
            let _ = write!(stderr, "{e}");
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            let message = first.strip_prefix("error: ").unwrap_or(first).to_string();
            let _ = writeln!(stderr, "{}", CliError::Usage(message).to_json());
            return exit::USAGE;
        }
    };
    let result = match cli.command {
        Sub::Rate(a) => run_command(Command::Rate, a, stdout, stderr, color),
        Sub::Tail(a) => run_command(Command::Tail, a, stdout, stderr, color),
        Sub::Simulate(a) => run_command(Command::Simulate, a, stdout, stderr, color),
        Sub::Series(a) => run_command(Command::Series, a, stdout, stderr, color),
        Sub::Compare(a) => run_compare(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Loads the config and applies `--seed` and the dotted overrides.
pub fn resolve_config(a: &RunArgs) -> Result<Value, CliError> {
    let mut doc = config::load_document(a.config.as_deref())?;
    if !doc.is_object() {
        return Err(CliError::config("", "config must be a JSON object"));
    }
    for (key, raw) in &a.overrides {
        config::apply_override(&mut doc, key, raw)?;
    }
    if let Some(seed) = a.seed {
        doc["seed"] = json!(seed);
    }
    Ok(doc)
}

fn output_format(flag: Option<Format>, configured: Option<Format>, path: Option<&Path>) -> Format {
    flag.or(configured)
        .or_else(|| path.and_then(Format::from_path))
        .unwrap_or_default()
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Lib(ldtail::Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run_command(
    command: Command,
    a: RunArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    color: bool,
) -> Result<i32, CliError> {
    let doc = resolve_config(&a)?;
    let cfg = config::parse_config(&doc)?;
    let rows = match a.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(|| commands::run(command, &cfg))?,
        None => commands::run(command, &cfg)?,
    };
    let manifest = RunManifest::new(command.name(), &doc, cfg.seed(), rows);

    let configured = cfg.output.clone().unwrap_or_default();
    let path = a.out.clone().or(configured.path);
    let format = output_format(a.format, configured.format, path.as_deref());
    let bytes = emit(&manifest, format)?;
    match path.as_deref() {
        Some(p) if p == Path::new("-") => stdout.write_all(&bytes).map_err(|e| io_error(p, e))?,
        Some(p) => {
            report::write_manifest(p, &manifest, format)?;
            let _ = stdout.write_all(table::render(&manifest.rows, color).as_bytes());
        }
        None => {
            let _ = stdout.write_all(table::render(&manifest.rows, color).as_bytes());
        }
    }

    for (index, row) in manifest.rows.iter().enumerate().filter(|(_, r)| r.is_error()) {
        let detail = row.error_note.strip_prefix("error:").unwrap_or(&row.error_note);
        let (code, message) = detail.split_once(": ").unwrap_or(("ERROR", detail));
        let line = json!({
            "level": "error",
            "code": code,
            "message": message,
            "row": index,
            "family": row.family,
            "n_or_t": row.n_or_t,
            "x_or_c": row.x_or_c,
            "method": row.method,
        });
        let _ = writeln!(stderr, "{line}");
    }
    Ok(if manifest.has_errors() {
        exit::ROW_ERRORS
    } else {
        exit::OK
    })
}

fn run_compare(a: &CompareArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let current = report::read_manifest(&a.current)?;
    let baseline = std::fs::read(&a.baseline).map_err(|e| io_error(&a.baseline, e))?;
    let diff = compare_golden(&current, &baseline, a.tolerance)?;
    if let Some(out) = &a.out {
        let mut text =
            serde_json::to_string_pretty(&diff).map_err(|e| CliError::Lib(ldtail::Error::Parse(e.to_string())))?;
        text.push('\n');
        std::fs::write(out, text).map_err(|e| io_error(out, e))?;
    }
    let failures: Vec<_> = diff.failures().collect();
    for f in &failures {
        let _ = writeln!(stdout, "{}", f.describe());
    }
    let _ = writeln!(
        stdout,
        "{}: {} rows compared, {} failed",
        if diff.pass { "PASS" } else { "FAIL" },
        diff.rows.len(),
        failures.len()
    );
    Ok(if diff.pass { exit::OK } else { exit::COMPARE_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_precedence() {
        let json = Some(Path::new("a.json"));
        assert_eq!(output_format(Some(Format::Csv), Some(Format::Json), json), Format::Csv);
        assert_eq!(output_format(None, Some(Format::Csv), json), Format::Csv);
        assert_eq!(output_format(None, None, json), Format::Json);
        assert_eq!(output_format(None, None, Some(Path::new("a.txt"))), Format::Csv);
        assert_eq!(output_format(None, None, None), Format::Csv);
    }
}
