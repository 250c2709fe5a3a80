use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dynspan_harness::{
    generate, lightness_sweep, run_stream, write_csv, Check, FaultArg, ModeArg, Ops, RunOptions,
    Scenario, ScenarioConfig,
};
use serde_json::json;

/// Replays point insertions and deletions against the dynamic light spanner
/// and checks the result against brute-force oracles.
///
/// Writes one JSON object per update, then a `{"summary": ...}` line.
/// Oracle violations go to stderr, one JSON object per line, and make the
/// exit status 1. Errors exit with status 2.
#[derive(Parser, Debug)]
#[command(name = "dynspan-bench", version)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Scenario::UniformCube)]
    scenario: Scenario,
    /// Number of initial insertions (ignored for `file`).
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Power of two bounding the diameter. Defaults to 1024 for the cube
    /// scenarios and to the smallest valid value for `path` and `file`.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// insert-only, mixed:<p_delete> or window:<w>.
    #[arg(long, default_value = "insert-only")]
    ops: Ops,
    /// Operations after the initial insertions for `mixed` (default 2n).
    #[arg(long)]
    updates: Option<usize>,
    /// none, final, every-k:<k> or every-update.
    #[arg(long, default_value = "final")]
    check: Check,
    /// Point file for the `file` scenario: `id x1 ... xd` per line.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Output file for the update log (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated sizes; runs a lightness sweep instead of a replay.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<usize>>,
    /// CSV output for `--sweep`.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn main_inner(cli: Cli) -> anyhow::Result<bool> {
    let cfg = ScenarioConfig {
        scenario: cli.scenario,
        n: cli.n,
        dim: cli.dim,
        eps: cli.eps,
        phi: cli.phi,
        seed: cli.seed,
        ops: cli.ops,
        updates: cli.updates,
        mode: cli.mode.into(),
        check: cli.check,
        points: cli.points,
    };
    cfg.validate()?;

    if let Some(ns) = &cli.sweep {
        let rows = lightness_sweep(&cfg, ns)?;
        let mut out = output(&cli.out)?;
        for r in &rows {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
        out.flush()?;
        if let Some(p) = &cli.csv {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(BufWriter::new(f), &rows)?;
        }
        return Ok(true);
    }

    let stream = generate(&cfg)?;
    let opts = RunOptions {
        fault: cli.inject_fault.map(Into::into),
    };
    let mut out = output(&cli.out)?;
    let outcome = run_stream(&cfg, &stream, opts, |line| {
        serde_json::to_writer(&mut out, line)?;
        writeln!(out)?;
        Ok(())
    })?;
    serde_json::to_writer(&mut out, &json!({ "summary": outcome.summary }))?;
    writeln!(out)?;
    out.flush()?;

    let stderr = io::stderr();
    let mut err = stderr.lock();
    for v in &outcome.violations {
        serde_json::to_writer(&mut err, v)?;
        writeln!(err)?;
    }
    Ok(outcome.violations.is_empty())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
