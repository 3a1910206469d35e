//! `hothand`: command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or domain errors, 2 when the requested
//! statistic is undefined (`D = 0`).

mod commands;
mod grid;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hothand::{ArithmeticMode, ProbLiteral};

#[derive(Debug, Parser)]
#[command(name = "hothand", version, about = "Hot hand streak statistic: exact, closed-form and simulated")]
struct Cli {
    /// Arithmetic for exact computations. Defaults to the form of the `p` literal:
    /// `a/b` selects rational, a decimal selects double.
    #[arg(long, global = true, env = "HOTHAND_MODE", value_parser = parse_mode)]
    mode: Option<ArithmeticMode>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Counts and statistic for a sequence stored in a file of '0'/'1' characters.
    Stat {
        file: std::path::PathBuf,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Closed-form conditional mean for k = 1 and its gap to p.
    ClosedForm {
        #[arg(short, long)]
        n: u64,
        #[arg(short, long, value_parser = parse_prob)]
        p: ProbLiteral,
        #[arg(long)]
        json: bool,
    },
    /// Exact conditional mean and P(D=0) from the run-length dynamic program.
    Exact {
        #[arg(short, long)]
        n: u32,
        #[arg(short, long)]
        k: u32,
        #[arg(short, long, value_parser = parse_prob)]
        p: ProbLiteral,
        /// Print the joint (N, D) distribution as JSON instead of the summary line.
        #[arg(long)]
        dump: bool,
        /// Also enumerate all 2^n sequences (n <= 20) and require identical output.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo estimate by rejection sampling; prints a JSON report.
    Mc {
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        k: usize,
        #[arg(short, long)]
        p: f64,
        #[arg(short, long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = hothand::monte_carlo::DEFAULT_MAX_ATTEMPT_FACTOR)]
        max_attempt_factor: u64,
        #[arg(long, default_value_t = 1)]
        shards: u32,
    },
    /// Table of conditional means and bias gaps over a grid.
    BiasTable {
        /// Sequence lengths: `3..5` (inclusive), `3..=5`, `7` or `3,5,9`.
        #[arg(long = "n", value_parser = grid::parse_int_set)]
        n: grid::IntSet,
        /// Streak lengths, same syntax as `--n`.
        #[arg(long = "k", value_parser = grid::parse_int_set, default_value = "1")]
        k: grid::IntSet,
        /// Comma separated probabilities, e.g. `1/2,1/3` or `0.1,0.5`.
        #[arg(long = "p", value_parser = grid::parse_prob_list)]
        p: grid::ProbList,
        #[arg(long, value_enum, default_value_t = Method::Dp)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Accepted samples per row for `--method monte-carlo`.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run the built-in invariant battery.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    #[value(name = "closed_form", alias = "closed-form")]
    ClosedForm,
    Dp,
    Enumeration,
    #[value(name = "monte_carlo", alias = "monte-carlo")]
    MonteCarlo,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Dp => "dp",
            Method::Enumeration => "enumeration",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_mode(s: &str) -> Result<ArithmeticMode, String> {
    s.parse().map_err(|e: hothand::Error| e.to_string())
}

fn parse_prob(s: &str) -> Result<ProbLiteral, String> {
    s.parse().map_err(|e: hothand::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let mut out = std::io::stdout().lock();
    let result = match cli.command {
        Command::Stat { file, k, json } => commands::stat(&mut out, &file, k, json),
        Command::ClosedForm { n, p, json } => commands::closed_form(&mut out, n, &p, cli.mode, json),
        Command::Exact {
            n,
            k,
            p,
            dump,
            oracle,
            json,
        } => commands::exact(&mut out, n, k, &p, cli.mode, commands::ExactOutput { dump, oracle, json }),
        Command::Mc {
            n,
            k,
            p,
            samples,
            seed,
            max_attempt_factor,
            shards,
        } => commands::monte_carlo(&mut out, n, k, p, samples, seed, max_attempt_factor, shards),
        Command::BiasTable {
            n,
            k,
            p,
            method,
            format,
            samples,
            seed,
        } => {
            let spec = table::TableSpec {
                n,
                k,
                p,
                method,
                mode: cli.mode,
                samples,
                seed,
            };
            table::run(&mut out, &spec, format)
        }
        Command::Verify => commands::verify(&mut out),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
