//! `supersim`: classify set similarities, reproduce the catalogue verdicts,
//! check LSH families and build similarities from set functions.
//!
//! Exit codes: 0 when the run matched expectations, 1 when a mismatch or
//! violation was found, 2 on usage or input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, ConstructFlags, LshFlags, SimFlags, Table1Flags};
use output::{Format, Report};

#[derive(Parser)]
#[command(name = "supersim", version, about = "Supermodularity, metric and LSH checks for set similarities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance for float-valued inputs; formula similarities are exact
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one similarity (or a custom table, or a single set function)
    Classify(ClassifyArgs),
    /// Classify every catalogued similarity and compare with the expected verdicts
    Table1(Table1Args),
    /// Check that a hash family's collision probability equals the similarity
    VerifyLsh(VerifyArgs),
    /// Build and check a named counterexample
    Counterexample(CounterexampleArgs),
    /// Construct a similarity from a supermodular function or a convex profile
    Construct(ConstructArgs),
}

/// Similarity descriptor `name[:key=value,...]` and its parameter flags.
#[derive(Args)]
struct SimArgs {
    /// e.g. jaccard, sorensen_gamma:gamma=2, profile:h=1;0.5;0.25
    #[arg(long)]
    sim: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Intersection: size of the set part
    #[arg(long)]
    k: Option<String>,
    /// Intersection: size of the integer part
    #[arg(long)]
    nint: Option<String>,
    /// Intersection: weight of the constant branch
    #[arg(long)]
    x: Option<String>,
    /// Intersection: weight per shared element (profile: values joined by ;)
    #[arg(long)]
    h: Option<String>,
    /// Compose with a PGF read from JSON
    #[arg(long)]
    pgf: Option<PathBuf>,
}

impl SimArgs {
    fn flags(&self) -> Option<SimFlags> {
        Some(SimFlags {
            sim: self.sim.clone()?,
            gamma: self.gamma.clone(),
            k: self.k.clone(),
            nint: self.nint.clone(),
            x: self.x.clone(),
            h: self.h.clone(),
            pgf: self.pgf.clone(),
        })
    }
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["sim", "table", "function"]))]
struct ClassifyArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Universe size (default 5, or the size the similarity fixes)
    #[arg(long)]
    n: Option<usize>,
    /// Custom similarity table `{ "n": int, "S": [[...]] }`
    #[arg(long)]
    table: Option<PathBuf>,
    /// Set function `{ "n": int, "values": [...] }`
    #[arg(long)]
    function: Option<PathBuf>,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.5,2")]
    gammas: Vec<String>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    nint: usize,
    #[arg(long, default_value = "0.1")]
    x: String,
    #[arg(long, default_value = "0.2")]
    h: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, required_unless_present = "exact")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 4.0)]
    zmax: f64,
    /// Compare exact collision probabilities instead of sampling
    #[arg(long)]
    exact: bool,
    /// Pairs `[{ "X": [...], "Y": [...] }, ...]`; default is every distinct pair
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Counterexample {
    GammaMatrix,
    CshsPgf,
}

#[derive(Args)]
struct CounterexampleArgs {
    name: Counterexample,
    /// gamma_matrix: value in [0, 1/3]
    #[arg(long, default_value = "0.25")]
    gamma: String,
    /// cshs_pgf: universe size
    #[arg(long, default_value_t = 4)]
    n: usize,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["g", "profile"]))]
struct ConstructArgs {
    /// Supermodular set function `{ "n", "values" }`
    #[arg(long)]
    g: Option<PathBuf>,
    /// Modular function `{ "offset", "weights" }`; defaults to zero
    #[arg(long, requires = "g")]
    m: Option<PathBuf>,
    /// Convex profile `{ "h": [...] }` or a bare list
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Write the constructed table `{ "n", "S" }` here
    #[arg(long)]
    table_out: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let missing_sim = || CliError::Usage("--sim is required".into());
    match &cli.command {
        Command::Classify(a) => match (&a.table, &a.function) {
            (Some(path), _) => commands::classify_table(path, cli.tol),
            (_, Some(path)) => commands::classify_function(path, cli.tol),
            _ => {
                let spec = a.sim.flags().ok_or_else(missing_sim)?.build()?;
                commands::classify_similarity(&spec, a.n, cli.tol)
            }
        },
        Command::Table1(a) => commands::table1(&Table1Flags {
            n: a.n,
            gammas: a.gammas.clone(),
            k: a.k,
            nint: a.nint,
            x: a.x.clone(),
            h: a.h.clone(),
        }),
        Command::VerifyLsh(a) => {
            let spec = a.sim.flags().ok_or_else(missing_sim)?.build()?;
            commands::verify(
                &spec,
                &LshFlags {
                    n: a.n,
                    samples: a.samples,
                    seed: a.seed,
                    zmax: a.zmax,
                    exact: a.exact,
                    pairs: a.pairs.clone(),
                },
            )
        }
        Command::Counterexample(a) => match a.name {
            Counterexample::GammaMatrix => commands::gamma_matrix(&a.gamma),
            Counterexample::CshsPgf => commands::cshs_pgf(a.n),
        },
        Command::Construct(a) => commands::construct(
            &ConstructFlags {
                g: a.g.clone(),
                m: a.m.clone(),
                profile: a.profile.clone(),
                table_out: a.table_out.clone(),
            },
            cli.tol,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|report| {
        report
            .emit(cli.format, cli.out.as_deref())
            .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))?;
        Ok(report.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
