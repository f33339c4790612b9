//! `olam`: check, evaluate, enumerate and trust-check programs.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "olam",
    version,
    about = "Probabilistic dependently typed λ-calculus with oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Program file.
    pub program: PathBuf,
    /// Oracle definition files.
    #[arg(long, num_args = 1.., value_name = "PATH")]
    pub oracles: Vec<PathBuf>,
    /// Step budget for evaluation and enumeration.
    #[arg(long, default_value_t = 100_000)]
    pub fuel: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Type-check a program and print the type of every definition.
    Check(Common),
    /// Sample normal forms of `main`.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        samples: u64,
    },
    /// Exact output distribution of `main`.
    Dist(Common),
    /// Static reduction sequences witnessing each outcome of `main`.
    Trace(Common),
    /// Check `main` against a target distribution and write a certificate.
    Trust {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        target: PathBuf,
        #[arg(long, value_name = "P/Q")]
        epsilon: String,
        /// Judge a bare oracle form by its frequencies over `n` holes.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Output frequencies of the oracle form in `main` over `n` holes.
    OracleFreq {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
    },
}

/// Every failure the front end reports, with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable files: exit 2.
    Usage(String),
    /// A well-formed request the program or data rejects: exit 1.
    Domain {
        code: String,
        message: String,
        file: Option<PathBuf>,
        line: Option<usize>,
        col: Option<usize>,
    },
}

impl Failure {
    pub fn domain(code: &str, message: impl Into<String>) -> Self {
        Failure::Domain {
            code: code.to_string(),
            message: message.into(),
            file: None,
            line: None,
            col: None,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain { .. } => 1,
        }
    }
}

/// What a successful command prints and how it exits.
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
    /// `false` makes the process exit with 1 after printing, as `trust`
    /// does for an untrusted program.
    pub ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match &cli.command {
        Command::Check(c) | Command::Dist(c) | Command::Trace(c) => c.format,
        Command::Eval { common, .. }
        | Command::Trust { common, .. }
        | Command::OracleFreq { common, .. } => common.format,
    };
    let result = match cli.command {
        Command::Check(c) => commands::check(&c),
        Command::Eval {
            common,
            seed,
            samples,
        } => commands::eval(&common, seed, samples),
        Command::Dist(c) => commands::dist(&c),
        Command::Trace(c) => commands::trace(&c),
        Command::Trust {
            common,
            target,
            epsilon,
            n,
        } => commands::trust(&common, &target, &epsilon, n),
        Command::OracleFreq { common, n } => commands::oracle_freq(&common, n),
    };
    match result {
        Ok(report) => {
            match format {
                Format::Text => print!("{}", report.text),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.json).expect("json output")
                ),
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            match format {
                Format::Text => eprintln!("{}", render::failure_text(&f)),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&render::failure_json(&f)).expect("json output")
                ),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
