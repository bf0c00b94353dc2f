use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fbl_rmt::mc::ChannelKind;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "fbl-rmt",
    version,
    about = "Finite-blocklength bounds for Rayleigh-product MIMO channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed point and asymptotic moments per SNR.
    Moments(ScenarioArgs),
    /// Error-probability bounds and outage per SNR.
    Bounds(ScenarioArgs),
    /// Monte Carlo mutual-information-density statistics next to the closed forms.
    Simulate(ScenarioArgs),
    /// Empirical resolvent traces against the deterministic equivalents.
    ResolventCheck(ScenarioArgs),
    /// Run the built-in consistency checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct ScenarioArgs {
    /// JSON scenario file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Transmit antennas.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Receive antennas.
    #[arg(long = "N")]
    pub n_rx: Option<usize>,
    /// Scatterers.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Blocklength.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// N/M, in place of integer dimensions.
    #[arg(long)]
    pub eta: Option<f64>,
    /// M/L, in place of integer dimensions.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// n/M, in place of integer dimensions.
    #[arg(long)]
    pub rho: Option<f64>,
    /// SNR in dB, either a value or start:stop:step.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Rate per antenna in nats.
    #[arg(long, conflicts_with = "rate_bits", allow_hyphen_values = true)]
    pub rate: Option<f64>,
    /// Rate per antenna in bits.
    #[arg(long = "rate-bits", allow_hyphen_values = true)]
    pub rate_bits: Option<f64>,
    /// rayleigh_product or rayleigh.
    #[arg(long)]
    pub channel: Option<ChannelKind>,
    /// Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed for the random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add single-hop Rayleigh reference columns.
    #[arg(long)]
    pub rayleigh: bool,
    /// Add high-SNR approximation columns.
    #[arg(long = "high-snr")]
    pub high_snr: bool,
    /// Add low-SNR approximation columns.
    #[arg(long = "low-snr")]
    pub low_snr: bool,
    /// Write per-trial scaled MID samples (`.bin`/`.f64` for raw little-endian).
    #[arg(long = "dump-samples")]
    pub dump_samples: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ValidateArgs {
    /// Smaller grid and fewer resolvent trials.
    #[arg(long)]
    pub fast: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
