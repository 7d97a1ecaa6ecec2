//! `qplugin` command line: bandwidth computation, accuracy comparison,
//! KDE curve export, benchmarking, Remez coefficient generation.

mod ingest;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use qplugin::elementary::{remez_minimax, RemezTarget};
use qplugin::kde::{kde_curve, GridSpec};
use qplugin::oracle;
use qplugin::plugin;
use qplugin::{Dataset, Strategy};

use ingest::{ingest, InputFormat};

#[derive(Parser)]
#[command(
    name = "qplugin",
    version,
    about = "PLUGIN bandwidth selection for kernel density estimation on a \
             bit-exact Q32.32 fixed-point datapath model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliStrategy {
    Literal,
    Minimal,
    Fast,
}

impl From<CliStrategy> for Strategy {
    fn from(s: CliStrategy) -> Strategy {
        match s {
            CliStrategy::Literal => Strategy::Literal,
            CliStrategy::Minimal => Strategy::Minimal,
            CliStrategy::Fast => Strategy::Fast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum CliFormat {
    Json,
    Plain,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliInputFormat {
    /// One number per line
    Lines,
    /// Comma-separated, optional header, column selected by --csv-column
    Csv,
}

impl From<CliInputFormat> for InputFormat {
    fn from(f: CliInputFormat) -> InputFormat {
        match f {
            CliInputFormat::Lines => InputFormat::Lines,
            CliInputFormat::Csv => InputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Input data file
    #[arg(long)]
    input: PathBuf,

    /// Input layout
    #[arg(long, value_enum, default_value_t = CliInputFormat::Lines)]
    input_format: CliInputFormat,

    /// Zero-based column to read in csv mode
    #[arg(long, default_value_t = 0)]
    csv_column: usize,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset> {
        ingest(&self.input, self.input_format.into(), self.csv_column)
            .with_context(|| format!("reading {}", self.input.display()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the PLUGIN optimal bandwidth of a dataset
    Bandwidth {
        #[command(flatten)]
        input: InputArgs,

        /// Loop strategy of the double-sum steps
        #[arg(long, value_enum, default_value_t = CliStrategy::Fast)]
        strategy: CliStrategy,

        /// plain prints h_final only; json adds every intermediate with
        /// both decimal and raw Q32.32 words
        #[arg(long, value_enum, default_value_t = CliFormat::Plain)]
        format: CliFormat,
    },

    /// Compare the fixed-point pipeline against the binary64 reference
    Compare {
        #[command(flatten)]
        input: InputArgs,

        #[arg(long, value_enum, default_value_t = CliStrategy::Fast)]
        strategy: CliStrategy,

        #[arg(long, value_enum, default_value_t = CliFormat::Json)]
        format: CliFormat,
    },

    /// Export a KDE curve as CSV (x,density)
    Kde {
        #[command(flatten)]
        input: InputArgs,

        /// Bandwidth; computed by the PLUGIN pipeline when omitted
        #[arg(long)]
        bandwidth: Option<f64>,

        /// Strategy for the computed bandwidth
        #[arg(long, value_enum, default_value_t = CliStrategy::Fast)]
        strategy: CliStrategy,

        /// Number of grid points
        #[arg(long, default_value_t = 512)]
        grid_points: usize,

        /// Grid lower bound (default: min X - 5h)
        #[arg(long)]
        grid_lo: Option<f64>,

        /// Grid upper bound (default: max X + 5h)
        #[arg(long)]
        grid_hi: Option<f64>,

        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Time every strategy over synthetic standard-normal datasets
    Bench {
        /// Dataset sizes
        #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024")]
        sizes: Vec<usize>,

        /// RNG seed for the synthetic data
        #[arg(long, default_value_t = 42)]
        seed: u64,

        #[arg(long, value_enum, default_value_t = CliFormat::Plain)]
        format: CliFormat,
    },

    /// Generate minimax exp polynomial coefficients (JSON)
    RemezGen {
        /// Polynomial degree
        #[arg(long, default_value_t = 6)]
        degree: usize,

        /// Domain lower bound (default: -ln2/4, the exp unit's range)
        #[arg(long)]
        domain_lo: Option<f64>,

        /// Domain upper bound (default: ln2/4)
        #[arg(long)]
        domain_hi: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Bandwidth {
            input,
            strategy,
            format,
        } => {
            let data = input.load()?;
            let result = plugin::bandwidth(&data, strategy.into())?;
            match format {
                CliFormat::Plain => println!("{}", result.h_final),
                CliFormat::Json => {
                    let mut value = serde_json::to_value(&result)?;
                    value
                        .as_object_mut()
                        .expect("result serializes to an object")
                        .insert("n".into(), serde_json::json!(data.len()));
                    println!("{}", serde_json::to_string_pretty(&value)?);
                }
            }
        }

        Command::Compare {
            input,
            strategy,
            format,
        } => {
            let data = input.load()?;
            let report = oracle::compare(&data, strategy.into())?;
            match format {
                CliFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
                CliFormat::Plain => {
                    println!(
                        "n={} strategy={} h_fixed={:.15} h_ref={:.15} delta_percent={:.3e}",
                        report.n, report.strategy, report.h_fixed, report.h_ref,
                        report.delta_percent
                    );
                }
            }
        }

        Command::Kde {
            input,
            bandwidth,
            strategy,
            grid_points,
            grid_lo,
            grid_hi,
            out,
        } => {
            let data = input.load()?;
            let h = match bandwidth {
                Some(h) => h,
                None => plugin::bandwidth(&data, strategy.into())?.h_final.decode(),
            };
            let spec = GridSpec {
                lo: grid_lo,
                hi: grid_hi,
                points: grid_points,
            };
            let curve = kde_curve(&data, h, &spec)?;
            match out {
                Some(path) => {
                    let file = File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    curve.write_csv(io::BufWriter::new(file))?;
                }
                None => curve.write_csv(io::stdout().lock())?,
            }
        }

        Command::Bench {
            sizes,
            seed,
            format,
        } => run_bench(&sizes, seed, format)?,

        Command::RemezGen {
            degree,
            domain_lo,
            domain_hi,
        } => {
            let lo = domain_lo.unwrap_or(-std::f64::consts::LN_2 / 4.0);
            let hi = domain_hi.unwrap_or(std::f64::consts::LN_2 / 4.0);
            let poly = remez_minimax(RemezTarget::Exp, [lo, hi], degree)?;
            println!("{}", serde_json::to_string_pretty(&poly)?);
        }
    }
    Ok(())
}

/// Pipeline wall time only (data generation and ingestion excluded),
/// median of five repetitions per (n, strategy) cell.
fn run_bench(sizes: &[usize], seed: u64, format: CliFormat) -> Result<()> {
    const REPS: usize = 5;

    #[derive(Serialize)]
    struct Row {
        n: usize,
        strategy: Strategy,
        seconds: f64,
    }

    let mut rows = Vec::new();
    for &n in sizes {
        let data = synthetic_normal(n, seed)?;
        for strategy in Strategy::ALL {
            let mut times = Vec::with_capacity(REPS);
            for _ in 0..REPS {
                times.push(plugin::bandwidth(&data, strategy)?.elapsed.as_secs_f64());
            }
            times.sort_by(f64::total_cmp);
            rows.push(Row {
                n,
                strategy,
                seconds: times[REPS / 2],
            });
        }
    }

    match format {
        CliFormat::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
        CliFormat::Plain => {
            let mut out = io::stdout().lock();
            writeln!(out, "{:>8} {:<8} {:>12}", "n", "strategy", "seconds")?;
            for row in rows {
                writeln!(
                    out,
                    "{:>8} {:<8} {:>12.6}",
                    row.n,
                    row.strategy.to_string(),
                    row.seconds
                )?;
            }
        }
    }
    Ok(())
}

fn synthetic_normal(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E3779B97F4A7C15));
    Ok(Dataset::new(
        (0..n).map(|_| rng.sample(StandardNormal)).collect(),
    )?)
}
