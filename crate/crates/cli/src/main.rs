//! `pwembed`: generate instances, compute pathwidth and run embeddings.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a run
//! observes a non-contraction or stretch-bound violation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pwembed", version, about = "Stochastic tree embeddings of bounded-pathwidth graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated instance as graph JSON.
    Generate(GenerateArgs),
    /// Compute the pathwidth of a graph file.
    Pathwidth(PathwidthArgs),
    /// Sample embeddings and print a stretch report.
    Embed(EmbedArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(subcommand)]
    family: Family,
    /// Graph output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a composition sequence for the instance.
    #[arg(long, global = true)]
    composition_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Family {
    /// A root joined to `i` unit paths of length `i`.
    Phi {
        #[arg(long)]
        i: u64,
    },
    /// Recursively nested spiders.
    Psi {
        #[arg(long)]
        i: u32,
        #[arg(long)]
        m: u64,
    },
    /// Nested spiders keeping only the first ⌈l⌉ root branches.
    PsiTrunc {
        #[arg(long)]
        i: u32,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        l: String,
    },
    /// The unit n-cycle.
    Cycle {
        #[arg(long)]
        n: u64,
    },
    /// A random graph of pathwidth at most k.
    RandomPw {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `unit`, `int:LO:HI` or `pow2:MAX_EXP`.
        #[arg(long, default_value = "unit")]
        lengths: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Tree,
    Peel,
}

#[derive(Debug, Args)]
struct PathwidthArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    /// Largest vertex count the exact oracle accepts.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, conflicts_with = "decomposition")]
    composition: Option<PathBuf>,
    #[arg(long)]
    decomposition: Option<PathBuf>,
    /// Expected width of the composition sequence.
    #[arg(long)]
    k: Option<usize>,
    /// Use the pathwidth-2 warm-up algorithm (requires k = 2).
    #[arg(long)]
    warmup: bool,
    /// Override the inflation factor, e.g. `12` or `25/2`.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Worker threads; the report does not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Report output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
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
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Pathwidth(a) => commands::pathwidth(a),
        Command::Embed(a) => commands::embed(a),
    };
    match result {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
