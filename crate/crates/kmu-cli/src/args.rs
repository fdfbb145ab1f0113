//! Command-line surface. Sweep options double as the JSON config schema;
//! a flag given on the command line replaces the config file's value.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(
    name = "kmu",
    version,
    about = "Sweeps and validation for MRC over i.i.d. kappa-mu branches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Density of the combined SNR over a grid.
    Pdf(SweepArgs),
    /// Distribution function of the combined SNR over a grid.
    Cdf(SweepArgs),
    /// Coverage probability P(SNR > threshold), by default versus distance.
    Coverage(SweepArgs),
    /// Bit error probability, by default versus transmit power.
    Bep(SweepArgs),
    /// Run the built-in oracle suites and print a JSON report per suite.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Evaluation point (pdf, cdf) or per-branch mean SNR (coverage, bep).
    W,
    /// Link distance in metres.
    Distance,
    /// Transmit power in dBm.
    #[value(name = "pt_dbm", alias = "pt-dbm")]
    PtDbm,
    /// Carrier frequency in Hz.
    #[value(name = "fc_hz", alias = "fc-hz")]
    FcHz,
    /// Number of branches (rounded to an integer).
    N,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModArg {
    Bpsk,
    BfskOrth,
    BfskMincorr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprArg {
    Auto,
    Standard,
    Tilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    /// JSON object with any of the options below (snake_case keys).
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Ratio of dominant to scattered power [default: 1.5].
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of multipath clusters [default: 0.5].
    #[arg(long)]
    pub mu: Option<f64>,
    /// Number of receive branches [default: 64].
    #[arg(long)]
    pub n: Option<u32>,
    /// Per-branch mean SNR (linear); replaces the link budget.
    #[arg(long)]
    pub w_hat: Option<f64>,

    /// Transmit power in dBm [default: 23].
    #[arg(long, allow_negative_numbers = true)]
    pub pt_dbm: Option<f64>,
    /// Carrier frequency in GHz [default: 140].
    #[arg(long)]
    pub fc_ghz: Option<f64>,
    /// Link distance in metres [default: 200].
    #[arg(long)]
    pub distance_m: Option<f64>,
    /// Path-loss exponent [default: 2].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Receiver noise figure in dB [default: 6].
    #[arg(long, allow_negative_numbers = true)]
    pub noise_figure_db: Option<f64>,
    /// Bandwidth as a fraction of the carrier [default: 0.005].
    #[arg(long)]
    pub bw_frac: Option<f64>,
    /// CSI estimation accuracy in [0, 1); 0 is perfect CSI [default: 0].
    #[arg(long)]
    pub alpha: Option<f64>,

    /// SNR threshold for coverage, in dB [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_th_db: Option<f64>,
    /// Modulation for bep [default: bpsk].
    #[arg(long = "mod", value_enum)]
    #[serde(rename = "mod")]
    pub modulation: Option<ModArg>,

    /// Absolute truncation target [default: 1e-12; 1e-300 for bep].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative truncation target [default: 0; 1e-10 for bep].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Largest number of series terms [default: 4096].
    #[arg(long)]
    pub eps_max: Option<usize>,
    /// Series representation for pdf, cdf and coverage [default: auto].
    #[arg(long, value_enum)]
    pub repr: Option<ReprArg>,
    /// Accepted for interface uniformity; analytic sweeps draw no samples.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Sweep axis [default: w for pdf/cdf, distance for coverage, pt_dbm for bep].
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Lower end of the axis range.
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    /// Upper end of the axis range.
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    /// Number of grid points, at least 2 [default: 200].
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid spacing [default: log for coverage/bep over w, else linear].
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
    /// Evaluation point for pdf/cdf when the axis is not w [default: mean SNR].
    #[arg(long)]
    pub w: Option<f64>,
    /// Add the high-SNR asymptote column (coverage, bep).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub asymptote: Option<bool>,

    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file [default: stdout].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl SweepArgs {
    /// Fills every option not set here from `file`.
    pub fn overlay(mut self, file: SweepArgs) -> SweepArgs {
        overlay!(self, file;
            kappa, mu, n, w_hat, pt_dbm, fc_ghz, distance_m, beta, noise_figure_db,
            bw_frac, alpha, gamma_th_db, modulation, tol, rel_tol, eps_max, repr, seed,
            axis, min, max, points, spacing, w, asymptote, format, out,
        );
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Specfun,
    Coefficients,
    Distribution,
    Metrics,
    Mc,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Specfun => "specfun",
            Suite::Coefficients => "coefficients",
            Suite::Distribution => "distribution",
            Suite::Metrics => "metrics",
            Suite::Mc => "mc",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    /// Suites to run; repeat the flag or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub suite: Vec<Suite>,
    /// Seed for the Monte Carlo suite.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo trials per check.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Report file [default: stdout].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
