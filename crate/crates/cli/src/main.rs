use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kendall_cli::bench::{run_bench, BenchConfig, Implementation};
use kendall_cli::commands::{cmd_exchtest, cmd_simulate, cmd_tau, cmd_taumatrix, MatrixMode};
use kendall_cli::dataset::{ingest_csv, CsvOptions, Dataset};
use kendall_cli::{CliError, CliResult};
use kendall_core::simulate::{DepartureKind, DepartureSpec, Factorization, StudyConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "kendall", version, about = "Kendall's tau with fast jackknife inference")]
struct Cli {
    /// Worker threads (falls back to KENDALL_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// CSV file to read.
    file: PathBuf,
    /// The file has no header row; columns are then named V1, V2, ...
    #[arg(long)]
    no_header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Columns to use, by name or 1-based position (comma separated).
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Break ties by adding uniform noise in [0, eps). Not part of the
    /// continuous-data method; results depend on the noise.
    #[arg(long)]
    jitter: Option<f64>,
    /// Seed for --jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Input {
    fn load(&self) -> CliResult<Dataset> {
        if !self.delimiter.is_ascii() {
            return Err(CliError::Usage("delimiter must be a single ASCII character".into()));
        }
        if let Some(eps) = self.jitter {
            if !(eps > 0.0) {
                return Err(CliError::Usage("--jitter must be positive".into()));
            }
            eprintln!("warning: --jitter {eps} perturbs the data to break ties");
        }
        ingest_csv(
            &self.file,
            &CsvOptions {
                has_header: !self.no_header,
                delimiter: self.delimiter as u8,
                columns: self.columns.clone(),
                jitter: self.jitter.map(|e| (e, self.seed)),
            },
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum Departure {
    None,
    Single,
    Column,
    Check,
}

impl From<Departure> for DepartureKind {
    fn from(d: Departure) -> Self {
        match d {
            Departure::None => DepartureKind::None,
            Departure::Single => DepartureKind::Single,
            Departure::Column => DepartureKind::Column,
            Departure::Check => DepartureKind::Check,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Impl {
    Fast,
    Naive,
}

#[derive(Subcommand)]
enum Command {
    /// Kendall's tau of two columns with jackknife standard error.
    Tau {
        #[command(flatten)]
        input: Input,
        /// First column (name or 1-based position); defaults to the first.
        #[arg(long)]
        x: Option<String>,
        /// Second column; defaults to the second.
        #[arg(long)]
        y: Option<String>,
        /// Confidence level of the normal-approximation interval.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Also print the pseudo-values, one per input row.
        #[arg(long)]
        per_obs: bool,
    },
    /// Tau for every pair of columns with the dense or structured covariance.
    Taumatrix {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "dense")]
        mode: Mode,
    },
    /// Test of full exchangeability (needs at least 4 columns).
    Exchtest {
        #[command(flatten)]
        input: Input,
    },
    /// Size/power study of the exchangeability test on Gaussian data.
    Simulate {
        #[arg(long, value_enum, default_value = "none")]
        departure: Departure,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value_t = 250)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        p: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1")]
        alpha: Vec<f64>,
        /// Rescale the departure matrix to unit diagonal.
        #[arg(long)]
        unit_diag: bool,
        /// Sample indefinite matrices by clipping negative eigenvalues to
        /// zero instead of failing.
        #[arg(long)]
        psd_clip: bool,
        /// Directory receiving pvalues.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Median runtime of the fast and O(n^2) estimators (CSV).
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        tau_list: Vec<f64>,
        #[arg(long = "impl", value_enum, value_delimiter = ',', default_value = "fast,naive")]
        implementations: Vec<Impl>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var("KENDALL_THREADS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| CliError::Usage(format!("KENDALL_THREADS='{v}' is not a number")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Tau {
            input,
            x,
            y,
            level,
            per_obs,
        } => {
            let ds = input.load()?;
            let xi = x.as_deref().map_or(Ok(0), |k| ds.column_index(k))?;
            let yi = y.as_deref().map_or(Ok(1), |k| ds.column_index(k))?;
            if ds.p() < 2 {
                return Err(CliError::Usage("tau needs at least two columns".into()));
            }
            print_json(&cmd_tau(&ds, xi, yi, level, per_obs)?)
        }
        Command::Taumatrix { input, mode } => {
            let ds = input.load()?;
            let mode = match mode {
                Mode::Dense => MatrixMode::Dense,
                Mode::Structured => MatrixMode::Structured,
            };
            print_json(&cmd_taumatrix(&ds, mode)?)
        }
        Command::Exchtest { input } => print_json(&cmd_exchtest(&input.load()?)?),
        Command::Simulate {
            departure,
            delta,
            rho,
            n,
            p,
            reps,
            seed,
            alpha,
            unit_diag,
            psd_clip,
            out,
        } => {
            let config = StudyConfig {
                spec: DepartureSpec {
                    unit_diag,
                    ..DepartureSpec::new(departure.into(), delta, rho, p)
                },
                n,
                reps,
                seed,
                alpha_levels: alpha,
                factorization: if psd_clip {
                    Factorization::PsdClip
                } else {
                    Factorization::Cholesky
                },
            };
            let (_, summary) = cmd_simulate(&config, out.as_deref())?;
            print_json(&summary)
        }
        Command::Bench {
            n_list,
            tau_list,
            implementations,
            reps,
            warmup,
            seed,
            out,
        } => {
            let config = BenchConfig {
                n_list,
                tau_list,
                implementations: implementations
                    .into_iter()
                    .map(|i| match i {
                        Impl::Fast => Implementation::Fast,
                        Impl::Naive => Implementation::Naive,
                    })
                    .collect(),
                reps,
                warmup,
                seed,
            };
            let csv = run_bench(&config)?.to_csv();
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
