//! Command line: `run <scenario>...` and `audit <mode>`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use crate::audit::{self, Mode};
use crate::runner::{run_scenario, Outputs, RunError};
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "bundleobs-sim", version, about = "Simulate and audit equivariant observers")]
pub struct Cli {
    /// Worker threads for `run` (scenarios are independent).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory, overriding the scenarios' `output` key.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run scenario files and write `<name>_trajectory.csv` and `<name>_report.txt`.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Check equivariance, gradient or autonomy properties on seeded samples.
    Audit {
        mode: Mode,
        /// Number of samples (100; 3 simulation pairs for `autonomy`).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = bundleobs::random::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return 2;
    }
    match &cli.command {
        Command::Run { files } => run_files(files, cli.out_dir.as_deref(), cli.jobs),
        Command::Audit { mode, samples, seed } => run_audit(*mode, samples.unwrap_or(mode.default_samples()), *seed),
    }
}

fn run_one(path: &Path, out_dir: Option<&Path>) -> Result<Outputs, RunError> {
    let scenario = Scenario::load(path)?;
    run_scenario(&scenario, out_dir)
}

/// Runs every file, `jobs` at a time; the exit code is the largest of the
/// per-file codes (0 ok, 1 failure, 2 configuration or i/o, 3 blowup).
pub fn run_files(files: &[PathBuf], out_dir: Option<&Path>, jobs: usize) -> i32 {
    let results: Vec<Mutex<Option<Result<Outputs, RunError>>>> = files.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(files.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                *results[i].lock().expect("unpoisoned") = Some(run_one(path, out_dir));
            });
        }
    });
    let mut code = 0;
    for (path, slot) in files.iter().zip(results) {
        match slot.into_inner().expect("unpoisoned").expect("every file is processed") {
            Ok(out) => {
                println!(
                    "{}: wrote {} and {}",
                    path.display(),
                    out.trajectory.display(),
                    out.report_path.display()
                );
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                let c = match &e {
                    RunError::Io(_) => 2,
                    other => other.exit_code(),
                };
                code = code.max(c);
            }
        }
    }
    code
}

/// Prints one line per check; 0 when all pass, 1 otherwise, 2 on bad arguments.
pub fn run_audit(mode: Mode, samples: usize, seed: u64) -> i32 {
    if samples == 0 {
        eprintln!("error: --samples must be at least 1");
        return 2;
    }
    match audit::run(mode, samples, seed) {
        Ok(checks) => {
            checks.iter().for_each(|c| println!("{c}"));
            let failed = checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {failed} failed", checks.len());
            i32::from(failed > 0)
        }
        Err(e) => {
            eprintln!("audit failed: {e}");
            1
        }
    }
}
