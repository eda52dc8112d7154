//! `ltl`: iterate linked-twist maps, check their derivative and cone claims,
//! and run ergodic diagnostics. Every run writes a manifest that `ltl replay`
//! can rerun.

mod args;
mod commands;
mod config;
mod failure;
mod manifest;
mod output;

use std::ffi::OsString;
use std::fs;
use std::process::ExitCode;

use chrono::SecondsFormat;
use linked_twist::annulus_geometry::AnnulusPair;

use crate::args::Cmd;
use crate::config::Invocation;
use crate::failure::{usage, Failure};
use crate::manifest::{RunManifest, CODE_VERSION};
use crate::output::{write_atomic, Report};

fn main() -> ExitCode {
    match run(std::env::args_os().collect(), true) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

/// Runs one invocation and returns its exit code.
pub(crate) fn run(argv: Vec<OsString>, allow_replay: bool) -> Result<u8, Failure> {
    let inv = config::resolve(argv)?;
    let cli = &inv.cli;
    if let Cmd::Replay(r) = &cli.command {
        if !allow_replay {
            return Err(usage("a manifest cannot record a replay"));
        }
        return commands::replay::run(r, &cli.out_dir);
    }
    let ann = AnnulusPair::new(cli.r0, cli.r1).map_err(|e| usage(format!("--r0 {} --r1 {}: {e}", cli.r0, cli.r1)))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("--threads: {e}")))?;
    let report = pool.install(|| match &cli.command {
        Cmd::Iterate(a) => commands::iterate::run(a, &ann, cli.seed),
        Cmd::Verify { which } => commands::verify::run(which, &ann, cli.seed),
        Cmd::Diagnose { which } => commands::diagnose::run(which, &ann, cli.seed),
        Cmd::Replay(_) => unreachable!("handled above"),
    })?;
    write_report(&inv, &report)?;
    for line in &report.summary {
        println!("{line}");
    }
    match &report.violation {
        Some(v) => {
            eprintln!("violation: {v}");
            Ok(1)
        }
        None => Ok(0),
    }
}

/// Writes every output, then the manifest naming them.
fn write_report(inv: &Invocation, report: &Report) -> Result<(), Failure> {
    let dir = &inv.cli.out_dir;
    let io = |what: &str, e: std::io::Error| usage(format!("cannot write {what} in {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(|e| io("outputs", e))?;
    for o in &report.outputs {
        write_atomic(&dir.join(&o.name), &o.bytes).map_err(|e| io(&o.name, e))?;
    }
    let manifest = RunManifest {
        command: inv.path.join(" "),
        parameters: inv.parameters.clone(),
        seed: inv.cli.seed,
        timestamp: chrono::Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        code_version: CODE_VERSION.to_string(),
        outputs: report.outputs.iter().map(|o| o.name.clone()).collect(),
    };
    let name = RunManifest::file_name(&report.stem);
    write_atomic(&dir.join(&name), &manifest.to_bytes()).map_err(|e| io(&name, e))?;
    let files: Vec<&str> = report.outputs.iter().map(|o| o.name.as_str()).collect();
    println!("wrote {} and {name} to {}", files.join(", "), dir.display());
    Ok(())
}
