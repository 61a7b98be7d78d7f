//! `geneo`: persistence diagrams, matching distances, natural pseudo-distances
//! and GENEO checks from the command line.
//!
//! Exit codes: 0 success, 1 a check or assertion failed, 2 usage or I/O error.

mod commands;
mod config;
mod output;
mod reproduce;

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// A check the command was asked to make did not hold (exit code 1).
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

pub fn io_error(e: io::Error, path: &Path) -> anyhow::Error {
    if e.kind() == io::ErrorKind::NotFound {
        anyhow::anyhow!("no such file: {}", path.display())
    } else {
        anyhow::anyhow!("{}: {e}", path.display())
    }
}

#[derive(Parser)]
#[command(
    name = "geneo",
    version,
    about = "GENEOs, sublevel persistence and matching distances on the circle"
)]
struct Cli {
    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Functions given by builtin name and/or CSV file. Builtins come first, in
/// the order given, then files.
#[derive(Args, Debug, Clone)]
pub struct FunctionArgs {
    /// Builtin function: abs_sin, sin_sq, sin_sq_root:<p>, constant:<c>.
    #[arg(long = "builtin", value_name = "NAME")]
    pub builtins: Vec<String>,
    /// Function CSV with header `index,value`.
    #[arg(long = "input", value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
    /// Grid size for builtins (default 360); must match any input file.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// rotations (= cyclic), dihedral or trivial.
    #[arg(long)]
    pub group: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiagramFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Degree-0 sublevel persistence diagram of a function (optionally after an operator).
    Diagram {
        #[command(flatten)]
        function: FunctionArgs,
        /// Operator expression applied first.
        #[arg(long)]
        op: Option<String>,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, value_enum, default_value_t = DiagramFormat::Json)]
        format: DiagramFormat,
        /// Also write plot-ready `birth,death,essential` rows to this file;
        /// essential classes are drawn up to the function's maximum.
        #[arg(long, value_name = "FILE")]
        plot_data: Option<PathBuf>,
    },
    /// Bottleneck distance between two diagram files (JSON, or CSV by extension).
    Match { left: PathBuf, right: PathBuf },
    /// Exact natural pseudo-distance by scanning the whole group.
    Dg {
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Empirical check of equivariance and non-expansivity.
    Validate {
        expr: String,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        n: Option<usize>,
        /// Number of probe functions and of probe pairs.
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long, env = "GENEO_SEED")]
        seed: Option<u64>,
        /// Largest violation / excess still accepted (default 1e-12).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Applies an operator to a function and prints `index,value` CSV.
    Apply {
        expr: String,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        group: GroupArgs,
        /// Fail instead of warning when the output leaves the function space.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Lower bounds from growing random GENEO families versus exact d_G.
    Gap {
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        group: GroupArgs,
        /// Operators placed at the front of the family.
        #[arg(long = "include", value_name = "EXPR")]
        include: Vec<String>,
        /// Family sizes, comma separated (default 1,4,16,64).
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, env = "GENEO_SEED")]
        seed: Option<u64>,
        /// Write gap_report.json and gap_report.csv here instead of printing.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Rebuilds the power-mean examples: samples, diagrams, distances, checks.
    ReproducePaper {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Exponent for the second example.
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        /// Grid size; must be divisible by 4.
        #[arg(long, default_value_t = 360)]
        n: usize,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = config::ExperimentConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Diagram {
            function,
            op,
            group,
            format,
            plot_data,
        } => commands::diagram(
            &config,
            &function,
            op.as_deref(),
            &group,
            format,
            plot_data.as_deref(),
        ),
        Command::Match { left, right } => commands::matching(&left, &right),
        Command::Dg { function, group } => commands::dg(&config, &function, &group),
        Command::Validate {
            expr,
            group,
            n,
            probes,
            seed,
            tolerance,
        } => commands::validate(&config, &expr, &group, n, probes, seed, tolerance),
        Command::Apply {
            expr,
            function,
            group,
            strict,
            out,
        } => commands::apply(&config, &expr, &function, &group, strict, out.as_deref()),
        Command::Gap {
            function,
            group,
            include,
            sizes,
            max_depth,
            seed,
            out,
        } => commands::gap(
            &config,
            commands::GapArgs {
                function,
                group,
                include,
                sizes,
                max_depth,
                seed,
                out,
            },
        ),
        Command::ReproducePaper { out, p, n } => reproduce::run(&out, p, n),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<CheckFailed>() => {
            eprintln!("check failed: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
