//! `nsk`: norms, heat flow, bubbling analysis, Hopf and gauge reports, and
//! the analytic fixture corpus, with reproducible run manifests.

mod commands;
mod error;
mod experiment;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::hopf::HopfArgs;
use error::{CliError, CliResult};
use experiment::AnalyzeExperiment;

#[derive(Parser)]
#[command(name = "nsk", version, about = "Bubbling analysis of approximate harmonic maps into the sphere")]
struct Cli {
    /// Seed for randomized fixtures and initial data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Function-space norms of the pointwise modulus of a field file.
    Norms {
        file: PathBuf,
        /// l2, l21, l2inf, llogl, morrey:p:delta, weakmorrey:p:delta
        #[arg(required = true)]
        norms: Vec<String>,
        #[arg(long, default_value = "all")]
        region: String,
        /// Also write the JSON reports to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Harmonic map heat flow from a TOML config.
    Flow {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Cells per side for generated initial data.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Bubble-tree analysis of a generated ladder or a directory of field files.
    Analyze {
        /// Experiment config (`[input]`, `[analysis]`) or a bare sequence spec.
        #[arg(long, required_unless_present = "fields", conflicts_with = "fields")]
        config: Option<PathBuf>,
        /// Directory of `.nsk` maps, indexed by the number in each file name.
        #[arg(long)]
        fields: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hopf differential report of a single map.
    Hopf {
        file: PathBuf,
        /// Disk centre `x,y` (default: grid centre).
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        /// Disk radius (default: an eighth of the shorter side).
        #[arg(long)]
        radius: Option<f64>,
        /// Write the Laurent coefficients of the Hopf differential as CSV.
        #[arg(long)]
        emit_laurent: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Analysis parameters (delta, max_degree, laurent_modes).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Coulomb gauge and ∂̄-decomposition diagnostics of a map.
    Gauge {
        file: PathBuf,
        #[arg(long, default_value = "all")]
        region: String,
        /// Write every constituent field of the decomposition.
        #[arg(long)]
        dump_gauge: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the analytic fixture corpus.
    MakeFixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("NSK_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::usage(format!("NSK_THREADS=`{v}` is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> CliResult<String> {
    init_threads()?;
    let seed = cli.seed;
    match cli.command {
        Command::Norms { file, norms, region, out } => commands::norms::run(&file, &norms, &region, out.as_deref()),
        Command::Flow { config, out, grid } => Ok(commands::flow::run(&config, &out, grid, seed)?.1),
        Command::Analyze { config, fields, out } => {
            let exp = match (config, fields) {
                (Some(c), _) => AnalyzeExperiment::load(&c)?,
                (None, Some(d)) => AnalyzeExperiment::from_fields(&d)?,
                (None, None) => return Err(CliError::usage("analyze needs --config or --fields")),
            };
            Ok(commands::analyze::run(exp, &out, seed)?.1)
        }
        Command::Hopf { file, center, radius, emit_laurent, out, config } => {
            let center = center.as_deref().map(|c| commands::parse_pair(c, "center")).transpose()?;
            commands::hopf::run(&HopfArgs {
                file: &file,
                center,
                radius,
                emit_laurent,
                out: out.as_deref(),
                config: config.as_deref(),
                seed,
            })
        }
        Command::Gauge { file, region, dump_gauge, out } => {
            commands::gauge::run(&file, &region, dump_gauge, out.as_deref(), seed)
        }
        Command::MakeFixtures { out, grid } => {
            let m = commands::fixtures::run(&out, grid, seed)?;
            Ok(format!("wrote {} files to {}\n", m.files.len() + 1, out.display()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nsk: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
