//! `rauzy`: induction traces, the Rauzy graph, cylinder and dimension
//! pipelines, Monte Carlo suites and gasket rendering.
//!
//! stdout carries JSON or CSV only; diagnostics go to stderr.
//! Exit codes: 0 ok, 1 invariant violated, 2 bad input, 3 budget too small, 4 IO.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rauzy", version, about = "Rauzy induction and the Rauzy gasket")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma2,
    Lemma3,
    Kerckhoff,
    RoofJacobian,
    Partition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TailKind {
    Roof,
    Balance,
}

/// Options shared by the stochastic commands.
#[derive(Args, Debug, Clone)]
pub struct Run {
    /// Seed for every random stream.
    #[arg(long, env = "RAUZY_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace Rauzy steps from exact lengths `p/q p/q p/q`.
    Step {
        lengths: Vec<String>,
        /// Generalized iterations (runs of one winner) instead of single steps.
        #[arg(long)]
        accelerated: bool,
        #[arg(long, default_value_t = 10)]
        iters: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Depth-bounded thin-type classification.
    Classify {
        lengths: Vec<String>,
        #[arg(long, default_value_t = 50)]
        iters: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Rauzy graph with its connectivity verdict.
    Graph {
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
    },
    /// Exact cylinder dump, one record per line.
    Cylinders {
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 16)]
        ncap: u64,
        /// Measure floor as `p/q` (or `0`).
        #[arg(long, default_value = "0")]
        floor: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Survivor decay, fast decay, the dimension bound and box counting.
    Dimension {
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 64)]
        ncap: u64,
        #[arg(long, default_value_t = 1e-12)]
        floor: f64,
        #[arg(long, default_value_t = 1)]
        fd_depth: usize,
        #[arg(long, default_value_t = 4096)]
        fd_ncap: u64,
        #[arg(long, default_value_t = 1_000_000)]
        points: usize,
        #[arg(long, default_value_t = 64)]
        burn_in: usize,
        /// Dyadic grid levels, `lo-hi`.
        #[arg(long, default_value = "4-10")]
        levels: String,
        /// Box-count this point file instead of a fresh chaos-game cloud.
        #[arg(long)]
        cloud: Option<std::path::PathBuf>,
        #[command(flatten)]
        run: Run,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Roof tail of the first-return map, or the balance experiment.
    Tail {
        #[arg(long, value_enum, default_value = "roof")]
        kind: TailKind,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 10.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1e5)]
        t_max: f64,
        #[arg(long, default_value_t = 30)]
        t_count: usize,
        /// Balance constants `C`, log-spaced.
        #[arg(long, default_value_t = 1.01)]
        c_min: f64,
        #[arg(long, default_value_t = 1e4)]
        c_max: f64,
        #[arg(long, default_value_t = 25)]
        c_count: usize,
        /// Depth cap on one return, or on one balance path.
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        #[command(flatten)]
        run: Run,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run one invariant suite; exit 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        samples: Option<u64>,
        /// Longest path for lemma2.
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        /// Largest counter for lemma3.
        #[arg(long, default_value_t = 100)]
        nmax: u64,
        /// Counter cap for partition.
        #[arg(long, default_value_t = 64)]
        ncap: u64,
        #[command(flatten)]
        run: Run,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Rasterize a chaos-game cloud to a binary graymap.
    Render {
        #[arg(long, default_value_t = 1_000_000)]
        points: usize,
        #[arg(long, default_value_t = 64)]
        burn_in: usize,
        /// Raster size, `WxH`.
        #[arg(long, default_value = "1024x1024")]
        size: String,
        #[arg(long)]
        out: std::path::PathBuf,
        /// Also write the chart points (`.csv`, anything else binary).
        #[arg(long)]
        cloud: Option<std::path::PathBuf>,
        #[command(flatten)]
        run: Run,
    },
    /// Same-cell distortion statistics.
    Distortion {
        #[arg(long, default_value_t = 100_000)]
        pairs: u64,
        #[arg(long, default_value_t = 100)]
        nmax: u64,
        #[command(flatten)]
        run: Run,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// What a command printed, and whether it found a violated invariant.
pub struct Output {
    pub text: String,
    pub violation: Option<String>,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Output { text, violation: None }
    }
}

/// A command that produced no result, and its exit code.
#[derive(Debug)]
pub enum Failure {
    BadInput(String),
    Budget(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::BadInput(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::BadInput(m) | Failure::Budget(m) | Failure::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Step { lengths, accelerated, iters, format } => commands::step(&lengths, accelerated, iters, format),
        Command::Classify { lengths, iters, format } => commands::classify(&lengths, iters, format),
        Command::Graph { format } => commands::graph(format),
        Command::Cylinders { depth, ncap, floor, format } => commands::cylinders(depth, ncap, &floor, format),
        Command::Dimension { depth, ncap, floor, fd_depth, fd_ncap, points, burn_in, levels, cloud, run, format } => {
            commands::dimension(
                commands::DimensionArgs { depth, ncap, floor, fd_depth, fd_ncap, points, burn_in, levels, cloud },
                &run,
                format,
            )
        }
        Command::Tail { kind, samples, t_min, t_max, t_count, c_min, c_max, c_count, cap, run, format } => {
            let grid = match kind {
                TailKind::Roof => (t_min, t_max, t_count),
                TailKind::Balance => (c_min, c_max, c_count),
            };
            commands::tail(kind, samples, grid, cap, &run, format)
        }
        Command::Verify { suite, samples, max_len, nmax, ncap, run, format } => {
            commands::verify(suite, samples, max_len, nmax, ncap, &run, format)
        }
        Command::Render { points, burn_in, size, out, cloud, run } => {
            commands::render(points, burn_in, &size, &out, cloud.as_deref(), &run)
        }
        Command::Distortion { pairs, nmax, run, format } => commands::distortion(pairs, nmax, &run, format),
    };
    match result {
        Ok(out) => {
            print!("{}", out.text);
            match out.violation {
                Some(msg) => {
                    eprintln!("rauzy: {msg}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(f) => {
            eprintln!("rauzy: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
