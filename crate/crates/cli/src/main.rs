//! Experiment runner: mutual-information sweeps, gain tables and
//! symbol-error-rate sweeps for the splitting receiver, written as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod scenarios;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<splitrx::Error> for CliError {
    fn from(e: splitrx::Error) -> Self {
        match e {
            splitrx::Error::Numeric(_) | splitrx::Error::Input(_) => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

const MI_SWEEP_COLUMNS: &str = "\
CSV columns:
  power       transmit power (linear)
  rho         split ratio
  sigma_a2    antenna noise variance
  sigma_cov2  conversion noise variance
  sigma_rec2  rectifier noise variance
  mi_bits     mutual information per channel use, bits
  std_err     Monte-Carlo standard error (0 for analytic methods)
  method      histogram | plugin | approx | closed-form
  warning     reliability note, empty when none";

const GAIN_COLUMNS: &str = "\
CSV columns:
  power       transmit power (linear)
  sigma_a2    antenna noise variance
  sigma_cov2  conversion noise variance
  sigma_rec2  rectifier noise variance
  rho_star    split ratio maximising the mutual information
  g_mi        gain over the better pure receiver, bits
  g_mi_pct    the same gain in percent of that receiver
  mi_at_0     power-detection-only mutual information, bits
  mi_at_1     coherent-only mutual information, bits
  mi_at_star  mutual information at rho_star, bits
  std_err     standard error of mi_at_star
  warning     reliability notes joined by '; ', empty when none";

const SER_RHO_COLUMNS: &str = "\
CSV columns:
  power          transmit power (linear)
  rho            split ratio
  ser            symbol error rate
  ci95           half-width of the 95% binomial interval
  errors         symbol errors counted
  n_symbols      symbols simulated
  detector       ml | fast | nn-cd
  constellation  constellation label";

const SER_POWER_COLUMNS: &str = "\
CSV columns:
  power_db       transmit power, dB
  receiver       cd (rho = 1) or split (best rho on the grid)
  rho            split ratio of the row
  ser            symbol error rate
  ci95           half-width of the 95% binomial interval
  errors         symbol errors counted
  n_symbols      symbols simulated
  detector       ml | fast | nn-cd
  constellation  constellation label";

const DEMO_COLUMNS: &str = "\
CSV columns:
  trial   trial number
  sent    transmitted constellation index
  y1_re   coherent-branch output, real part
  y1_im   coherent-branch output, imaginary part
  y2      power-branch output
  ml      decision of the optimal detector
  fast    decision of the low-complexity detector
  nn_cd   decision of the coherent-only nearest-neighbour detector";

#[derive(Parser, Debug)]
#[command(
    name = "splitrx",
    version,
    about = "Splitting-receiver experiments, written as CSV"
)]
struct Cli {
    #[command(subcommand)]
    scenario: Scenario,
}

#[derive(Subcommand, Debug)]
enum Scenario {
    /// Mutual information over powers and split ratios (Gaussian input).
    #[command(after_help = MI_SWEEP_COLUMNS)]
    MiSweep(Settings),
    /// Best split ratio and its gain over pure coherent or power detection.
    #[command(after_help = GAIN_COLUMNS)]
    MiGainTable(Settings),
    /// Symbol error rate against the split ratio.
    #[command(after_help = SER_RHO_COLUMNS)]
    SerSweepRho(Settings),
    /// Symbol error rate against power, for rho = 1 and the best split.
    #[command(after_help = SER_POWER_COLUMNS)]
    SerSweepPower(Settings),
    /// A few received samples with the decisions of every detector.
    #[command(after_help = DEMO_COLUMNS)]
    DetectDemo(Settings),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.scenario {
        Scenario::MiSweep(s) => s.merged().and_then(scenarios::mi_sweep),
        Scenario::MiGainTable(s) => s.merged().and_then(scenarios::mi_gain_table),
        Scenario::SerSweepRho(s) => s.merged().and_then(scenarios::ser_sweep_rho),
        Scenario::SerSweepPower(s) => s.merged().and_then(scenarios::ser_sweep_power),
        Scenario::DetectDemo(s) => s.merged().and_then(scenarios::detect_demo),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("splitrx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
