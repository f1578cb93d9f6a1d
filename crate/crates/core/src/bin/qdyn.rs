use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdyn::workflow::{cmd_compile, emit_series, run_workflow, RunConfig, WorkflowError};
use qdyn::{Dialect, NativeTarget};

#[derive(Parser)]
#[command(name = "qdyn", version, about = "Simulate spin-chain dynamics with Trotterized quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the run described by an input file and write results.
    Run {
        input: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Compile a QASM or Quil circuit for a native gate set.
    Compile {
        #[arg(long, value_parser = parse_dialect)]
        dialect: Dialect,
        #[arg(long, value_parser = parse_target)]
        target: NativeTarget,
        /// Use the optimizing compiler and report it against plain lowering.
        #[arg(long)]
        ds: bool,
        input: PathBuf,
        output: PathBuf,
    },
    /// Write the circuit series of an input file without simulating it.
    Emit {
        #[arg(long, value_parser = parse_dialect)]
        dialect: Dialect,
        input: PathBuf,
        outdir: PathBuf,
    },
}

fn parse_dialect(s: &str) -> Result<Dialect, String> {
    s.parse()
}

fn parse_target(s: &str) -> Result<NativeTarget, String> {
    s.parse()
}

fn execute(command: Command) -> Result<(), WorkflowError> {
    match command {
        Command::Run { input, out } => {
            let config = RunConfig::from_path(&input)?;
            let artifacts = run_workflow(&config, &out)?;
            println!("wrote {} data files to {}", artifacts.data_files.len(), artifacts.out_dir.display());
        }
        Command::Compile { dialect, target, ds, input, output } => {
            print!("{}", cmd_compile(&input, &output, dialect, target, ds)?);
        }
        Command::Emit { dialect, input, outdir } => {
            let config = RunConfig::from_path(&input)?;
            let paths = emit_series(&config, dialect, &outdir)?;
            println!("wrote {} circuits to {}", paths.len(), outdir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
