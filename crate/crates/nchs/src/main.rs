use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nchs::commands;
use nchs::config::{self, OutputFormat, RunConfig};
use nchs::error::{CliError, CliResult, Status};
use nchs::gen::{GenParams, InstanceKind};
use nchs::verify::{self, SuiteKey};
use nchs_core::SubdiagonalModel;

#[derive(Parser)]
#[command(name = "nchs", version, about = "Factorization, angle and Toeplitz tools for subdiagonal algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outer factor or full HS1 factorization of a weight.
    Factor {
        #[command(flatten)]
        common: Common,
        /// Only compute the outer factor.
        #[arg(long)]
        outer_only: bool,
    },
    /// Angle ρ between the analytic and co-analytic subspaces.
    Angle {
        #[command(flatten)]
        common: Common,
        /// Report the distance to the algebra instead.
        #[arg(long)]
        distance: bool,
    },
    /// Invertibility of a Toeplitz operator.
    Toeplitz {
        #[command(flatten)]
        common: Common,
    },
    /// Positive-real certificate for a unitary.
    Certify {
        #[command(flatten)]
        common: Common,
    },
    /// Scalar and matrix weights sampled on the circle.
    Classical {
        #[command(flatten)]
        common: Common,
    },
    /// Seeded instance generation.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: InstanceKind,
        /// `key=value` pairs separated by `;`.
        #[arg(long, default_value = "")]
        params: String,
    },
    /// Runs the verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated suite names or numbers, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// `triangular:n=N` or `fourier:d=D,deg=K[,grid=M]`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = config::DEFAULT_TOL)]
    tol: f64,
    /// Comma-separated section cutoffs.
    #[arg(long, value_parser = config::parse_cutoffs)]
    cutoffs: Option<Vec<usize>>,
    /// Overridden by the NCHS_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn into_config(self, command: &str) -> CliResult<RunConfig> {
        let model = self
            .model
            .as_deref()
            .map(str::parse::<SubdiagonalModel>)
            .transpose()?;
        let cfg = RunConfig {
            command: command.to_owned(),
            model,
            inputs: self.inputs,
            tol: self.tol,
            cutoffs: self.cutoffs.unwrap_or_default(),
            seed: config::resolve_seed(self.seed)?,
            format: match self.format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            },
            out: self.out,
            jobs: self.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<Status> {
    match cli.command {
        Command::Factor { common, outer_only } => commands::cmd_factor(&common.into_config("factor")?, outer_only),
        Command::Angle { common, distance } => commands::cmd_angle(&common.into_config("angle")?, distance),
        Command::Toeplitz { common } => commands::cmd_toeplitz(&common.into_config("toeplitz")?),
        Command::Certify { common } => commands::cmd_certify(&common.into_config("certify")?),
        Command::Classical { common } => commands::cmd_classical(&common.into_config("classical")?),
        Command::Gen { common, kind, params } => {
            let params = GenParams::parse(&params)?;
            commands::cmd_gen(&common.into_config("gen")?, kind, &params)
        }
        Command::Verify { common, suite } => {
            let suites = SuiteKey::parse(&suite).ok_or_else(|| CliError::Usage(format!("unknown suite in `{suite}`")))?;
            verify::cmd_verify(&common.into_config("verify")?, &suites)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("nchs: {e}");
            e.status().into()
        }
    }
}
