//! `norms-lab`: command-line front end.
//!
//! Every command prints one canonical JSON document (sorted keys) on
//! stdout, or a plain-text table with `--format table`. Exit codes:
//! 0 success, 1 verification failed, 2 input error, 3 precision exhausted.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use norms_lab::{DEFAULT_PRECISION, MIN_PRECISION};

#[derive(Debug, Parser)]
#[command(
    name = "norms-lab",
    version,
    about = "Exact p-adic computations along the cyclotomic tower"
)]
pub struct Cli {
    /// Working precision in p-adic digits.
    #[arg(long, global = true, env = "NORMS_LAB_PRECISION", default_value_t = DEFAULT_PRECISION,
          value_parser = clap::value_parser!(u32).range(MIN_PRECISION as i64..))]
    pub precision: u32,

    /// Deepest tower level a command may touch.
    #[arg(long, global = true, default_value_t = 5)]
    pub max_level: u32,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power series on the open disc.
    #[command(subcommand)]
    Weierstrass(WeierstrassCmd),
    /// Ramification of tower steps.
    #[command(subcommand)]
    Ram(RamCmd),
    /// Norm-compatible sequences.
    #[command(subcommand)]
    Fon(FonCmd),
    /// The p-cyclic lifting construction.
    #[command(subcommand)]
    Oort(OortCmd),
    /// p-adic numbers.
    #[command(subcommand)]
    Padic(PadicCmd),
}

#[derive(Debug, Subcommand)]
pub enum WeierstrassCmd {
    /// Factor a series document as ϖ^c f U.
    Prep {
        /// Series document; `-` reads stdin.
        file: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum RamCmd {
    /// Filtration, Herbrand functions, conductor and different of L^top | L^base.
    Profile {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        base: u32,
        #[arg(long)]
        top: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum FonCmd {
    /// Check norm compatibility of a sequence document.
    Check {
        file: PathBuf,
        /// Pass a pair once it is certified modulo 𝔪^k.
        #[arg(long)]
        required: Option<i64>,
    },
    /// Sum of two sequences at a probe depth, with its stability report.
    Add {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        probe: u32,
    },
    /// Norm-compatible sequence of Σ τ(g_i) π^i.
    FromSeries(FromSeriesArgs),
}

#[derive(Debug, Args)]
pub struct FromSeriesArgs {
    #[arg(long)]
    pub p: u64,
    /// Residues of g, constant term first, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub g: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub lo: u32,
    #[arg(long)]
    pub probe: u32,
}

#[derive(Debug, Subcommand)]
pub enum OortCmd {
    /// Verify the cover T^p = 1 + λ^p W(Z) / Z^c along the tower.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub c: i64,
    /// W as a polynomial in Z with residue coefficients, e.g. "1 + Z^4".
    #[arg(long, default_value = "1")]
    pub w: String,
    /// `auto`, `auto+k` or `a..b`.
    #[arg(long, default_value = "auto+2")]
    pub levels: String,
    /// Also compute the ramification inside the explicit extension (p = 3, m <= 2).
    #[arg(long)]
    pub cross_check: bool,
}

#[derive(Debug, Subcommand)]
pub enum PadicCmd {
    /// Normalize a number given as an integer or in `p^v * (d0 + d1*p ...) [r]` form.
    Show {
        #[arg(long)]
        p: Option<u64>,
        value: String,
    },
    /// Teichmüller representative of a residue.
    Teichmuller {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u64,
    },
    /// Binary arithmetic.
    Arith {
        #[arg(value_enum)]
        op: ArithOp,
        a: String,
        b: String,
        #[arg(long)]
        p: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_INPUT } else { 0 });
        }
    };
    let outcome = match commands::run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(commands::exit_code(&e));
        }
    };
    let text = match cli.format {
        Format::Json => commands::canonical(&outcome.doc),
        Format::Table => table::render(&cli.command, &outcome.doc),
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(anyhow::Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(commands::EXIT_INPUT);
    }
    ExitCode::from(if outcome.passed { 0 } else { commands::EXIT_FAILED })
}
