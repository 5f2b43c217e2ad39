use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use globsolv::cli::{exit_code, run, Arith, Command, RunOptions};

#[derive(Parser)]
#[command(name = "globsolv", version, about = "Global solvability of d_t + c(t, D_x)∧ on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Config document (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exact rational arithmetic.
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Floating-point arithmetic.
    #[arg(long, global = true)]
    float: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Divisor scan and Diophantine verdict.
    Analyze,
    /// Solve L^p u = f.
    Solve,
    /// Build a Liouville-type witness and its blow-up report.
    Witness,
    /// Normal-form reduction of a variable-coefficient system.
    Reduce,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Some(config) = cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let command = match cli.command {
        Cmd::Analyze => Command::Analyze,
        Cmd::Solve => Command::Solve,
        Cmd::Witness => Command::Witness,
        Cmd::Reduce => Command::Reduce,
    };
    let arith = if cli.exact {
        Some(Arith::Exact)
    } else if cli.float {
        Some(Arith::Float)
    } else {
        None
    };
    match run(command, &config, &cli.out, &RunOptions { arith, seed: cli.seed }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
