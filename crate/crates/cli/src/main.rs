//! `bintab`: binary probability tables with prescribed margins and pairwise moments.

mod commands;
mod document;
mod error;
mod render;
mod reproduce;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use bintab_core::baselines::DEFAULT_MAX_ITER;
use bintab_core::constraints::{MarginMode, DEFAULT_DIGITS};
use bintab_core::datasets::Dataset;
use bintab_core::loglinear::DEFAULT_EPS;
use bintab_core::sampling::{SamplerConfig, DEFAULT_BURN_IN, DEFAULT_THINNING};
use clap::{Parser, Subcommand, ValueEnum};

use commands::{Globals, Method, Output, ParamChoice};
use error::{CliError, CliResult};
use render::Precision;

#[derive(Parser)]
#[command(
    name = "bintab",
    version,
    about = "Polytopes of binary tables with fixed margins and pairwise moments"
)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Decimal places kept when turning odds ratios into moments.
    #[arg(long, global = true, default_value_t = DEFAULT_DIGITS)]
    digits: u32,
    /// How exact values are shown in text output.
    #[arg(long, global = true, value_enum, default_value_t = Precision::Rational)]
    precision_mode: Precision,
    /// Tolerance for decomposition and iterative fitting.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for the samplers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for vertex enumeration (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Margins {
    Uniform,
    Observed,
}

impl From<Margins> for MarginMode {
    fn from(m: Margins) -> Self {
        match m {
            Margins::Uniform => MarginMode::Uniform,
            Margins::Observed => MarginMode::Observed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Margins, correlations and odds ratios of a table.
    Analyze { input: String },
    /// Target margins and moments derived from a table.
    Targets {
        input: String,
        #[arg(long, value_enum, default_value_t = Margins::Uniform)]
        margins: Margins,
    },
    /// The constraint matrix H with H p = 0.
    Constraints {
        input: String,
        #[arg(long, value_enum, default_value_t = Margins::Uniform)]
        margins: Margins,
    },
    /// Extreme pmfs of the feasible polytope.
    Vertices {
        input: String,
        #[arg(long, value_enum, default_value_t = Margins::Uniform)]
        margins: Margins,
        /// Write the vertex set as JSON to this file.
        #[arg(long, short)]
        output: Option<String>,
        /// Decimal places in the decimal renderings.
        #[arg(long, default_value_t = 6)]
        places: usize,
    },
    /// Mixes the vertices of a vertex-set file with given weights.
    Mixture {
        vertices: String,
        /// Comma-separated weights, e.g. "1/2,1/2" or "0.3,0.7".
        #[arg(long)]
        weights: String,
    },
    /// Writes a table as a mixture of the vertices of a vertex-set file.
    Decompose { vertices: String, table: String },
    /// Saturated log-linear coefficients of a table or of every vertex in a vertex-set file.
    Loglinear {
        input: String,
        #[arg(long, value_enum, default_value_t = ParamChoice::Both)]
        parametrization: ParamChoice,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Random pmfs from the feasible polytope, as JSON lines.
    Sample {
        input: String,
        #[arg(long, value_enum, default_value_t = Margins::Uniform)]
        margins: Margins,
        #[arg(long, value_enum, default_value_t = Method::HitAndRun)]
        method: Method,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burn_in: usize,
        #[arg(long, default_value_t = DEFAULT_THINNING)]
        thinning: usize,
        #[arg(long, short)]
        output: Option<String>,
    },
    /// Maximum-entropy table by iterative proportional fitting.
    Ipf {
        input: String,
        #[arg(long, value_enum, default_value_t = Margins::Uniform)]
        margins: Margins,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Published values next to recomputed ones for a built-in dataset.
    Reproduce {
        #[arg(value_parser = parse_dataset)]
        example: Dataset,
    },
    /// Writes a table to a .json or .csv file with exact cell values.
    Export {
        input: String,
        #[arg(long, short)]
        output: String,
    },
}

fn parse_dataset(s: &str) -> Result<Dataset, String> {
    s.parse().map_err(|e: bintab_core::Error| e.to_string())
}

fn run(cli: Cli) -> CliResult<Option<Output>> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let g = Globals {
        digits: cli.digits,
        precision: cli.precision_mode,
        tol: cli.tol,
        seed: cli.seed,
    };
    let out = match cli.command {
        Command::Analyze { input } => commands::analyze(&input)?,
        Command::Targets { input, margins } => commands::targets(&input, &g, margins.into())?,
        Command::Constraints { input, margins } => {
            commands::constraints(&input, &g, margins.into())?
        }
        Command::Vertices {
            input,
            margins,
            output,
            places,
        } => commands::vertices(&input, &g, margins.into(), output.as_deref(), places)?,
        Command::Mixture { vertices, weights } => commands::mixture_cmd(&vertices, &weights, &g)?,
        Command::Decompose { vertices, table } => commands::decompose_cmd(&vertices, &table, &g)?,
        Command::Loglinear {
            input,
            parametrization,
            eps,
        } => commands::loglinear(&input, parametrization, eps)?,
        Command::Sample {
            input,
            margins,
            method,
            count,
            burn_in,
            thinning,
            output,
        } => {
            let cfg = SamplerConfig {
                seed: g.seed,
                count,
                burn_in,
                thinning,
            };
            match output {
                Some(path) => {
                    let file = File::create(&path).map_err(|source| CliError::Write {
                        path: path.clone(),
                        source,
                    })?;
                    commands::sample(
                        &input,
                        &g,
                        margins.into(),
                        method,
                        cfg,
                        BufWriter::new(file),
                    )?;
                }
                None => {
                    commands::sample(&input, &g, margins.into(), method, cfg, io::stdout().lock())?
                }
            }
            return Ok(None);
        }
        Command::Ipf {
            input,
            margins,
            max_iter,
        } => commands::ipf(&input, &g, margins.into(), max_iter)?,
        Command::Reproduce { example } => reproduce::reproduce(example, g.digits)?,
        Command::Export { input, output } => commands::export(&input, &output)?,
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    // Usage errors share the domain-error code; 2 is reserved for infeasibility.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(Some(out)) => {
            let mut stdout = io::stdout().lock();
            let written = if json {
                writeln!(
                    stdout,
                    "{}",
                    serde_json::to_string_pretty(&out.json).expect("serializable")
                )
            } else {
                write!(stdout, "{}", out.text)
            };
            if written.is_err() {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
