mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{CliError, Config, Report};

#[derive(Parser, Debug)]
#[command(name = "posmod", version, about = "Finite positive model theory workbench")]
struct Cli {
    /// Longest context stored during saturation.
    #[arg(long, global = true, env = "POSMOD_NMAX", default_value_t = 3)]
    nmax: usize,
    /// Seed for the sampled audits.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest lattice built before giving up.
    #[arg(long, global = true, default_value_t = 4096)]
    max_lattice: usize,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    structured: bool,
    /// Corrupts one computation so that a cross-check fails.
    #[arg(long, global = true, hide = true)]
    inject_fault: Option<Fault>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    LmDirect,
    TvVerify,
    Krull,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Saturate a family and run every analysis on it.
    Analyze {
        theory: PathBuf,
        #[arg(required = true)]
        models: Vec<PathBuf>,
    },
    /// Present a lattice as a family of one-point models and compare LM with K/p.
    PosetalImport {
        lattice: PathBuf,
        /// Members of the prime filter, comma separated. Every prime filter when absent.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Tarski-Vaught test for a family of sort subsets of one model.
    Tv { theory: PathBuf, model: PathBuf, subsets: PathBuf },
    /// Reduced product over a finite index set.
    Redprod {
        theory: PathBuf,
        #[arg(required = true)]
        models: Vec<PathBuf>,
        /// A generator of the filter: comma-separated indices. Repeatable.
        #[arg(long = "gen")]
        gens: Vec<String>,
    },
    /// Lattice utilities.
    Dlat {
        #[command(subcommand)]
        op: DlatOp,
    },
}

#[derive(Subcommand, Debug)]
enum DlatOp {
    /// Prime filters and specialization order.
    Spec(LatticeArg),
    /// Krull dimension by chains and by the algebraic criterion.
    Krull(LatticeArg),
    /// Quotient by a prime filter.
    Quotient {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long)]
        filter: String,
    },
}

#[derive(Args, Debug)]
struct LatticeArg {
    lattice: PathBuf,
}

pub struct Ctx {
    pub config: Config,
    pub fault: Option<Fault>,
}

fn run(cli: Cli, echo: Vec<String>) -> Result<Report, CliError> {
    let ctx = Ctx { config: Config { nmax: cli.nmax, seed: cli.seed, max_lattice: cli.max_lattice }, fault: cli.inject_fault };
    let mut report = Report::new(echo, ctx.config.clone());
    match cli.command {
        Command::Analyze { theory, models } => commands::analyze(&ctx, &mut report, &theory, &models)?,
        Command::PosetalImport { lattice, filter } => commands::posetal(&ctx, &mut report, &lattice, filter.as_deref())?,
        Command::Tv { theory, model, subsets } => commands::tv(&ctx, &mut report, &theory, &model, &subsets)?,
        Command::Redprod { theory, models, gens } => commands::redprod(&ctx, &mut report, &theory, &models, &gens)?,
        Command::Dlat { op } => match op {
            DlatOp::Spec(l) => commands::dlat_spec(&mut report, &l.lattice)?,
            DlatOp::Krull(l) => commands::dlat_krull(&ctx, &mut report, &l.lattice)?,
            DlatOp::Quotient { lattice, filter } => commands::dlat_quotient(&mut report, &lattice.lattice, &filter)?,
        },
    }
    Ok(report)
}

fn main() -> ExitCode {
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let structured = cli.structured;
    match run(cli, echo) {
        Ok(r) => {
            print!("{}", r.render(structured));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
