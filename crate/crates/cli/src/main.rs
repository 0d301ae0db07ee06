//! `dcubic`: runs library experiments and verification suites, writing one
//! JSON record per experiment.

mod config;
mod record;
mod run;
mod suites;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use record::{write_csv_files, write_jsonl};

/// Environment variable naming a directory for relative `--out` paths.
pub const OUT_DIR_ENV: &str = "DCUBIC_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "dcubic",
    version,
    about = "Experiments on diagonal cubic forms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Complete exponential sums `S_c(n)`.
    Expsum {
        #[arg(long, value_enum, default_value_t = MethodArg::Multiplicative)]
        method: MethodArg,
    },
    /// The dual form `F^∨(c)` and its valuations at small primes.
    Disc,
    /// Point counts of `V_c` (or of `V` without `--c`) over `F_{p^r}`.
    Count,
    /// Frobenius data and local-factor coefficients at good primes.
    Lfactor,
    /// Delta-method identity check or decay of the oscillatory integral.
    Delta {
        #[arg(long, value_enum, default_value_t = DeltaTask::Identity)]
        task: DeltaTask,
    },
    /// Sums of three cubes: series, cone constant, double count, variance.
    Cubes {
        #[arg(long, value_enum)]
        task: CubesTask,
    },
    /// Root counts and sieve statistics.
    Sieve {
        #[arg(long, value_enum)]
        task: SieveTask,
    },
    /// Named verification suites; all of them when none is given.
    Verify {
        #[arg(long = "suite", value_enum)]
        suites: Vec<Suite>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Expsum { .. } => "expsum",
            Command::Disc => "disc",
            Command::Count => "count",
            Command::Lfactor => "lfactor",
            Command::Delta { .. } => "delta",
            Command::Cubes { .. } => "cubes",
            Command::Sieve { .. } => "sieve",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MethodArg {
    Brute,
    Multiplicative,
    Structural,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaTask {
    Identity,
    Decay,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CubesTask {
    Series,
    Cone,
    DoubleCount,
    Variance,
    R3,
    Identities,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SieveTask {
    Squarefull,
    B3,
    ZeroDensity,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Suite {
    ExactIdentities,
    StructuralExpsum,
    Locav,
    ConicBundle,
    DeltaDecay,
    Variance,
    SieveTrends,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

/// Parameters shared by every subcommand. Each may also come from the
/// `--config` file.
#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct Params {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// `fermatM` or a coefficient list such as `1,1,-2`.
    #[arg(long, global = true)]
    pub form: Option<String>,
    /// Frequency tuple, comma-separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Moduli (expsum) or `N` values (b3), comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, global = true)]
    pub nmax: Option<u64>,
    #[arg(long, global = true)]
    pub p: Option<u64>,
    #[arg(long, global = true)]
    pub pmax: Option<u64>,
    #[arg(long, global = true)]
    pub l: Option<u32>,
    #[arg(long, global = true)]
    pub lmax: Option<u32>,
    /// Field degree `r` for point counts over `F_{p^r}`.
    #[arg(long, global = true)]
    pub r: Option<u32>,
    /// Number of variables for the verification suites.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Scale `X`, comma-separated for several.
    #[arg(long = "X", global = true, value_delimiter = ',')]
    pub x: Vec<f64>,
    /// Approximation level `M`.
    #[arg(long = "M", global = true)]
    pub m_level: Option<u64>,
    /// Box size `Z`.
    #[arg(long = "Z", global = true)]
    pub z: Option<i64>,
    /// Scales `Q`, comma-separated.
    #[arg(long = "Q", global = true, value_delimiter = ',')]
    pub q: Vec<u64>,
    /// Bound `B` (cone count) or the integer `a` (r3).
    #[arg(long = "B", global = true)]
    pub b: Option<u64>,
    /// Reference level for the singular series.
    #[arg(long, global = true)]
    pub mref: Option<u64>,
    /// Bump radius of the smooth weight.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Polynomial coefficients from the constant term up (zero density).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub poly: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample size; switches square-full statistics to sampled mode.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<usize>,
    /// Work budget for exponential sums.
    #[arg(long, global = true)]
    pub budget: Option<u128>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    #[serde(skip)]
    pub format: Format,
}

/// Exit status: 0 pass, 1 verification failure, 2 usage or configuration,
/// 3 resource budget.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const BUDGET: u8 = 3;
}

fn out_path(p: &PathBuf) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
        _ => p.clone(),
    }
}

fn emit(records: &[record::ExperimentRecord], params: &Params) -> anyhow::Result<()> {
    match (&params.out, params.format) {
        (Some(p), Format::Jsonl) => {
            let mut f = std::fs::File::create(out_path(p))?;
            write_jsonl(records, &mut f)?;
        }
        (Some(p), Format::Csv) => {
            write_csv_files(records, &out_path(p))?;
        }
        (None, Format::Jsonl) => {
            let mut out = std::io::stdout().lock();
            write_jsonl(records, &mut out)?;
            out.flush()?;
        }
        (None, Format::Csv) => {
            let mut out = std::io::stdout().lock();
            for (i, t) in record::csv_tables(records).iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                writeln!(out, "# {}", t.name)?;
                t.write(&mut out)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let args = match config::config_path(&args) {
        Some(path) => match config::load(path.as_ref()) {
            Ok(entries) => config::merge(&args, &entries),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(exit::USAGE);
            }
        },
        None => args,
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::PASS
            });
        }
    };
    if let Some(w) = cli.params.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(exit::USAGE);
        }
    }
    let outcome = run::run(&cli.command, &cli.params);
    if let Err(e) = emit(&outcome.records, &cli.params) {
        eprintln!("error: {e:#}");
        return ExitCode::from(exit::USAGE);
    }
    if let Some(msg) = &outcome.error {
        eprintln!("error: {msg}");
    }
    ExitCode::from(outcome.status)
}
