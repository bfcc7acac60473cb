use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sizer_core::io::{
    generate, read_csv, write_csv, CensoringScheme, LifetimeFamily, SyntheticSpec,
};
use sizer_core::scale_space::direct_estimate;
use sizer_core::{
    analyze, BlocksRule, EstimatorMode, OutputFormat, RunConfig, SizerError, WeightConvention,
};

#[derive(Parser)]
#[command(
    name = "sizer",
    version,
    about = "SiZer maps for censored and uncensored density and hazard estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the family of smooths and the SiZer map for a `time,event` CSV.
    Run(RunArgs),
    /// Write a synthetic `time,event` sample as CSV.
    Synth(SynthArgs),
    /// Print the exact unbinned estimate, derivative, sd and ESS at one (x, h).
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV with columns time,event.
    input: PathBuf,
    #[arg(long, default_value = "density")]
    mode: EstimatorMode,
    #[arg(long, default_value_t = 401)]
    grid_points: usize,
    /// Number of bandwidths.
    #[arg(long = "bandwidths", default_value_t = 51)]
    bandwidth_count: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 5.0)]
    ess_threshold: f64,
    #[arg(long, default_value = "left-limit")]
    convention: WeightConvention,
    /// Quantile rule: independent-blocks or pointwise.
    #[arg(long, default_value = "independent-blocks")]
    rule: BlocksRule,
    /// Comma-separated subset of csv, ppm, svg.
    #[arg(long, default_value = "csv", value_delimiter = ',')]
    format: Vec<OutputFormat>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Lower clamp for the grid (hazard modes default to 0).
    #[arg(long, allow_negative_numbers = true)]
    support_floor: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Exponential,
    Weibull,
    Normal,
    Bathtub,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "exponential")]
    family: FamilyArg,
    /// Exponential rate.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Weibull shape.
    #[arg(long, default_value_t = 1.0)]
    shape: f64,
    /// Weibull scale.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Normal mean (truncated to positive values).
    #[arg(long, default_value_t = 1.0)]
    mean: f64,
    /// Normal standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
    /// Exponential censoring rate; uncensored when omitted.
    #[arg(long)]
    censoring_rate: Option<f64>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    input: PathBuf,
    #[arg(long, default_value = "density")]
    mode: EstimatorMode,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value = "left-limit")]
    convention: WeightConvention,
}

fn run(args: RunArgs) -> Result<(), SizerError> {
    let sample = read_csv(&args.input)?;
    let config = RunConfig {
        mode: args.mode,
        grid_points: args.grid_points,
        bandwidth_count: args.bandwidth_count,
        alpha: args.alpha,
        ess_threshold: args.ess_threshold,
        blocks_rule: args.rule,
        convention: args.convention,
        formats: args.format,
        support_floor: args.support_floor,
        seed: None,
    };
    let analysis = analyze(&sample, &config)?;
    let written = analysis.write(&config.formats, &args.out)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for path in written {
        writeln!(out, "{}", path.display())?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), SizerError> {
    let family = match args.family {
        FamilyArg::Exponential => LifetimeFamily::Exponential { rate: args.rate },
        FamilyArg::Weibull => LifetimeFamily::Weibull {
            shape: args.shape,
            scale: args.scale,
        },
        FamilyArg::Normal => LifetimeFamily::Normal {
            mean: args.mean,
            sd: args.sd,
        },
        FamilyArg::Bathtub => LifetimeFamily::BathtubMixture,
    };
    let censoring = match args.censoring_rate {
        Some(rate) => CensoringScheme::Exponential { rate },
        None => CensoringScheme::None,
    };
    let sample = generate(&SyntheticSpec {
        family,
        censoring,
        n: args.n,
        seed: args.seed,
    })?;
    match args.out {
        Some(path) => {
            let file = File::create(&path).map_err(|source| SizerError::File { path, source })?;
            write_csv(&sample, BufWriter::new(file))
        }
        None => write_csv(&sample, io::stdout().lock()),
    }
}

fn oracle(args: OracleArgs) -> Result<(), SizerError> {
    let sample = read_csv(&args.input)?;
    let d = direct_estimate(&sample, args.mode, args.x, args.h, args.convention)?;
    println!("estimate,derivative,sd,ess");
    println!("{:?},{:?},{:?},{:?}", d.estimate, d.derivative, d.sd, d.ess);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth(args) => synth(args),
        Command::Oracle(args) => oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sizer: {e}");
            ExitCode::FAILURE
        }
    }
}
