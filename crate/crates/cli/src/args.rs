use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "permchan",
    version,
    about = "Achievability bounds, Gaussian approximations and simulations for noisy permutation channels"
)]
pub struct Cli {
    /// TOML file with default values for flags not given on the command line
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Grid packing counts and their closed-form bounds
    Pack(PackArgs),
    /// Largest code size meeting a target error, or the bound at a given size
    Bound(BoundArgs),
    /// Rate-blocklength curve over a grid of blocklengths
    Curve(CurveArgs),
    /// Gaussian approximations of the code size
    Approx(ApproxArgs),
    /// Monte Carlo estimate of the decoding error of a packing code
    Simulate(SimulateArgs),
    /// Run the built-in cross-checks and print a pass/fail table
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    Bsc,
    Bec,
    Matrix,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// Channel family
    #[arg(value_enum)]
    pub channel: ChannelKind,
    /// Crossover probability of the BSC, in (0, 1/2)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Erasure probability of the BEC, in (0, 1)
    #[arg(long)]
    pub eta: Option<f64>,
    /// Channel matrix file: "|X| |Y|" on the first line, then the rows
    #[arg(long = "matrix", value_name = "FILE")]
    pub matrix_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("radius").required(true).args(["grid_n", "r0"])))]
#[command(group(ArgGroup::new("image").args(["lambda", "matrix_file"])))]
pub struct PackArgs {
    /// Alphabet size (taken from the matrix when one is given)
    #[arg(long)]
    pub k: Option<usize>,
    /// Grid resolution N (total-variation radius 1/N)
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Divergence radius in bits
    #[arg(long)]
    pub r0: Option<f64>,
    /// Volume ratio of the channel image, in (0, 1]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Channel matrix file; its |det| is used as the volume ratio
    #[arg(long = "matrix", value_name = "FILE")]
    pub matrix_file: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("size").required(true).args(["eps", "m", "grid_n"])))]
pub struct BoundArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Blocklength
    #[arg(long)]
    pub n: u64,
    /// Target error probability, in (0, 1); searches for the largest code
    #[arg(long, value_parser = parse_eps)]
    pub eps: Option<f64>,
    /// Code size for BSC/BEC
    #[arg(long)]
    pub m: Option<usize>,
    /// Grid resolution for a matrix channel
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Target error probability, in (0, 1)
    #[arg(long, value_parser = parse_eps)]
    pub eps: f64,
    /// Blocklengths: "20,50,100" or "logspace:MIN:MAX:POINTS"
    #[arg(long, value_name = "SPEC")]
    pub n_grid: String,
    /// Comma-separated methods (default: the channel's bound and its ceil approximation)
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Blocklength
    #[arg(long)]
    pub n: u64,
    /// Target error probability, in (0, 1)
    #[arg(long, value_parser = parse_eps)]
    pub eps: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("size").required(true).args(["m", "grid_n"])))]
pub struct SimulateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Blocklength
    #[arg(long)]
    pub n: u64,
    /// Code size for BSC/BEC
    #[arg(long)]
    pub m: Option<usize>,
    /// Grid resolution for a matrix channel
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Number of transmissions
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Generator seed
    #[arg(long)]
    pub seed: u64,
    /// Skip the output shuffle (the error rate must not change)
    #[arg(long)]
    pub no_permute: bool,
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Seed for the randomized checks
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
}

fn parse_eps(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {v}"))
    }
}
