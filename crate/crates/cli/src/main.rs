mod commands;
mod specfile;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CmdResult, Globals, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "xlearn", version, about = "Typecheck, verify, train and explain learning agents")]
struct Cli {
    /// Seed of all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance of numeric stream comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Number of steps compared in extensional checks.
    #[arg(long, global = true, default_value_t = 5)]
    horizon: usize,
    /// Random instances per law.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Typecheck every term and build the translator.
    Check { spec: PathBuf },
    /// Write a term as a DOT graph.
    Render {
        spec: PathBuf,
        term: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Render the canonical form instead of the direct lowering.
        #[arg(long)]
        normalize: bool,
    },
    /// Check feedback axioms, stream laws, term laws and functor laws.
    Axioms {
        spec: Option<PathBuf>,
        #[arg(long, hide = true)]
        mutant: bool,
    },
    /// Train the agent on the spec's dataset.
    Train {
        spec: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        /// Write the step-by-step trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Explain one input row with the spec's explainer.
    Explain {
        spec: PathBuf,
        /// Comma-separated inputs, optionally followed by targets.
        #[arg(long)]
        input: String,
    },
    /// Print the taxonomy label of the spec's agent.
    Classify { spec: PathBuf },
}

fn run(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let g = Globals {
        seed: cli.seed,
        tol: cli.tol,
        horizon: cli.horizon,
        samples: cli.samples,
    };
    match cli.command {
        Command::Check { spec } => commands::check(&spec, g, out),
        Command::Render {
            spec,
            term,
            output,
            normalize,
        } => commands::render(&spec, &term, output.as_deref(), normalize, out),
        Command::Axioms { spec, mutant } => commands::axioms(spec.as_deref(), g, mutant, out),
        Command::Train { spec, steps, trace } => commands::train(&spec, g, steps, trace.as_deref(), out),
        Command::Explain { spec, input } => commands::explain(&spec, g, &input, out),
        Command::Classify { spec } => commands::classify_cmd(&spec, g, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.code
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}
