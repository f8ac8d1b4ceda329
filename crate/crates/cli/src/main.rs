use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use srht_matmul_cli::experiments::{
    run_bound, run_coherence, run_moments, run_sketch, run_verify_lemma2, run_verify_theorem1,
};
use srht_matmul_cli::io::{format_matrix, save_matrix};
use srht_matmul_cli::{CliError, ExperimentConfig, Mode, Options, Result};

/// Randomized Hadamard-sampled matrix multiplication experiments.
#[derive(Debug, Parser)]
#[command(name = "srht-matmul", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate A Bᵀ once and write the result to --out (or stdout)
    Sketch(#[command(flatten)] Options),
    /// Evaluate the error bound at --n and the sample count for --eps
    Bound(#[command(flatten)] Options),
    /// Monte Carlo check of the unconditional error bound
    VerifyTheorem1(#[command(flatten)] Options),
    /// Monte Carlo check of the rotated column-norm tail
    VerifyLemma2(#[command(flatten)] Options),
    /// Coherence before and after random rotations
    Coherence(#[command(flatten)] Options),
    /// Exact moment inequalities on a small instance
    Moments(#[command(flatten)] Options),
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

/// Runs one command; `Ok(false)` means the checked criterion failed.
fn run(command: Command) -> Result<bool> {
    let (mode, mut opts) = match command {
        Command::Sketch(o) => (Mode::Sketch, o),
        Command::Bound(o) => (Mode::Bound, o),
        Command::VerifyTheorem1(o) => (Mode::VerifyTheorem1, o),
        Command::VerifyLemma2(o) => (Mode::VerifyLemma2, o),
        Command::Coherence(o) => (Mode::Coherence, o),
        Command::Moments(o) => (Mode::Moments, o),
    };
    opts.merge_config_file()?;
    let cfg = ExperimentConfig::resolve(mode, &opts)?;
    let stdout = io::stdout();
    let out_err = |e| CliError::io("<stdout>", e);

    match mode {
        Mode::Sketch => {
            let run = run_sketch(&cfg)?;
            match &cfg.output_path {
                Some(p) => {
                    save_matrix(&run.estimate, p)?;
                    println!("{run}");
                }
                None => {
                    stdout.lock().write_all(format_matrix(&run.estimate).as_bytes()).map_err(out_err)?;
                    eprintln!("{run}");
                }
            }
            Ok(true)
        }
        Mode::Bound => {
            println!("{}", run_bound(&cfg)?);
            Ok(true)
        }
        Mode::VerifyTheorem1 => {
            let run = run_verify_theorem1(&cfg)?;
            if let Some(p) = &cfg.output_path {
                let mut w = create(p)?;
                run.write_csv(&mut w)?;
                w.flush().map_err(|e| CliError::io(p, e))?;
            }
            println!("{}", run.summary);
            Ok(run.passed())
        }
        Mode::VerifyLemma2 => {
            let run = run_verify_lemma2(&cfg)?;
            if let Some(p) = &cfg.output_path {
                let mut w = create(p)?;
                run.write_csv(&mut w)?;
                w.flush().map_err(|e| CliError::io(p, e))?;
            }
            println!("{run}");
            Ok(run.passed())
        }
        Mode::Coherence => {
            let run = run_coherence(&cfg)?;
            println!("{run}");
            Ok(run.passed())
        }
        Mode::Moments => {
            let run = run_moments(&cfg)?;
            println!("{run}");
            Ok(run.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
