//! Batch front-end: figure-ready sweeps and the validation suites.

pub mod args;
pub mod output;
pub mod sweep;
pub mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;

use args::{Cli, Command, Format, SweepArgs, ValidateArgs};
use sweep::{run_sweep, Quantity, SweepConfig};

/// Bad flags, config or parameter values; exit code 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Process outcome apart from usage errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    ValidationFailed,
    NonConvergence,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::ValidationFailed => 1,
            Status::NonConvergence => 2,
        }
    }
}

pub const USAGE_EXIT: u8 = 64;

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(a: SweepArgs) -> anyhow::Result<SweepArgs> {
    let Some(path) = a.config.clone() else {
        return Ok(a);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let file: SweepArgs =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    Ok(a.overlay(file))
}

fn sweep(q: Quantity, a: SweepArgs) -> anyhow::Result<Status> {
    let a = load_config(a)?;
    let cfg = SweepConfig::from_args(q, &a)?;
    let mut out = open_out(a.out.as_deref())?;
    let result = run_sweep(&cfg);
    output::write_table(&result.table, a.format.unwrap_or(Format::Csv), &mut out).context("writing output")?;
    let mut failed = false;
    for (v, e) in result.failures() {
        eprintln!("kmu: axis value {v}: {e}");
        failed = true;
    }
    Ok(if failed { Status::NonConvergence } else { Status::Success })
}

fn validate(a: ValidateArgs) -> anyhow::Result<Status> {
    if a.suite.is_empty() {
        return Err(usage("select at least one --suite"));
    }
    if a.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let mut suites = a.suite.clone();
    suites.sort();
    suites.dedup();
    let mut out = open_out(a.out.as_deref())?;
    let mut all = true;
    for s in suites {
        let report = validate::run_suite(s, a.seed, a.trials);
        all &= report.pass;
        serde_json::to_writer(&mut out, &report)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(if all { Status::Success } else { Status::ValidationFailed })
}

pub fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Pdf(a) => sweep(Quantity::Pdf, a),
        Command::Cdf(a) => sweep(Quantity::Cdf, a),
        Command::Coverage(a) => sweep(Quantity::Coverage, a),
        Command::Bep(a) => sweep(Quantity::Bep, a),
        Command::Validate(a) => validate(a),
    }
}
