use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use wedgeqft_cli::{
    cmd_car, cmd_geometry, cmd_npoint, cmd_verify, load_config, OutputFormat, EXIT_CONFIG,
};

#[derive(Parser)]
#[command(name = "wedgeqft", about = "Warped-convolution deformation experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format for tabular commands
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Seed for all pseudo-random inputs
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Deformed n-point comparison tables
    Npoint(CommonArgs),
    /// Wedge predicates with JSON answers
    Geometry(CommonArgs),
    /// Cross-module invariant suite
    Verify(CommonArgs),
    /// CAR fixed-point and vacuum-invariance reports
    Car(CommonArgs),
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let (args, which) = match &cli.command {
        Command::Npoint(a) => (a, "npoint"),
        Command::Geometry(a) => (a, "geometry"),
        Command::Verify(a) => (a, "verify"),
        Command::Car(a) => (a, "car"),
    };
    let cfg = load_config(&args.config)?;
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    let out = args.out.as_deref();
    match which {
        "npoint" => {
            let section = cfg.npoint.ok_or_else(|| anyhow!("config lacks an npoint section"))?;
            cmd_npoint(&section, args.seed, format, out)
        }
        "geometry" => {
            let section =
                cfg.geometry.ok_or_else(|| anyhow!("config lacks a geometry section"))?;
            cmd_geometry(&section, out)
        }
        "verify" => {
            let section = cfg.verify.unwrap_or_default();
            cmd_verify(&section, args.seed, out)
        }
        _ => {
            let section = cfg.car.ok_or_else(|| anyhow!("config lacks a car section"))?;
            cmd_car(&section, args.seed, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
