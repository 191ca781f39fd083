//! Run settings: command-line flags layered over an optional TOML file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use splitrx::detect::DetectorKind;
use splitrx::mi::{EstimatorConfig, MiMethod};
use splitrx::model::{apsk32_four_ring, apsk32_three_ring, make_psk, make_qam, Constellation};
use splitrx::{NoiseEnv, QuadratureSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Histogram,
    Plugin,
    Approx,
    /// Coherent-only closed form; only valid at rho = 1.
    Closed,
}

impl From<Method> for MiMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Histogram => MiMethod::Histogram,
            Method::Plugin => MiMethod::Plugin,
            Method::Approx => MiMethod::Approx,
            Method::Closed => MiMethod::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    /// Optimal rule with the antenna noise integrated numerically.
    Ml,
    /// Low-complexity Gaussian rule.
    Fast,
    /// Coherent branch only, nearest neighbour.
    NnCd,
}

/// Every flag is optional so that a config file can supply it; flags win.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// TOML file with any of these settings (keys as the long flag names).
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Transmit power, linear. Repeat for several values.
    #[arg(long, value_name = "P")]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub power: Vec<f64>,

    /// Transmit power in dB. Repeat for several values; added to --power.
    #[arg(long, value_name = "DB", allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub power_db: Vec<f64>,

    /// Single split ratio (fraction of power sent to the coherent branch).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,

    /// Split-ratio grid, either `start:step:stop` or a comma list.
    #[arg(long, value_name = "GRID")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<String>,

    /// Grid step for the gain search (mi-gain-table).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_step: Option<f64>,

    /// Antenna noise variance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_a2: Option<f64>,

    /// Coherent-branch conversion noise variance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_cov2: Option<f64>,

    /// Power-branch rectifier noise variance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_rec2: Option<f64>,

    /// qam64 | qam16 | qam4 | psk8 | psk4 | apsk32-3ring | apsk32-4ring | file:PATH
    #[arg(long, value_name = "NAME")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constellation: Option<String>,

    /// Monte-Carlo draws (MI samples or SER symbols) per point.
    #[arg(long, value_name = "N")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// Histogram bins per dimension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,

    /// Quadrature order for the antenna-noise integral.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,

    /// Inner draws per sample for the plug-in marginal (0 = exact).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_samples: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Output CSV path; standard output when absent.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector: Option<Detector>,

    /// SER level at which ser-sweep-power reports the power gap.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_ser: Option<f64>,
}

impl Settings {
    /// Reads `--config` (if given) and fills every unset flag from it.
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: Settings = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(self.over(file))
    }

    fn over(self, file: Settings) -> Self {
        let pick = |a: Vec<f64>, b: Vec<f64>| if a.is_empty() { b } else { a };
        Self {
            config: self.config,
            power: pick(self.power, file.power),
            power_db: pick(self.power_db, file.power_db),
            rho: self.rho.or(file.rho),
            rho_grid: self.rho_grid.or(file.rho_grid),
            rho_step: self.rho_step.or(file.rho_step),
            sigma_a2: self.sigma_a2.or(file.sigma_a2),
            sigma_cov2: self.sigma_cov2.or(file.sigma_cov2),
            sigma_rec2: self.sigma_rec2.or(file.sigma_rec2),
            constellation: self.constellation.or(file.constellation),
            samples: self.samples.or(file.samples),
            bins: self.bins.or(file.bins),
            quad_order: self.quad_order.or(file.quad_order),
            inner_samples: self.inner_samples.or(file.inner_samples),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            method: self.method.or(file.method),
            detector: self.detector.or(file.detector),
            target_ser: self.target_ser.or(file.target_ser),
        }
    }

    /// Linear powers from `--power` and `--power-db`, or `default` when
    /// neither is given.
    pub fn powers(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let mut p: Vec<f64> = self.power.clone();
        p.extend(self.power_db.iter().map(|db| 10f64.powf(db / 10.0)));
        if p.is_empty() {
            p = default.to_vec();
        }
        if let Some(bad) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(CliError::Config(format!(
                "power must be finite and >= 0, got {bad}"
            )));
        }
        Ok(p)
    }

    /// `--rho-grid`, else `--rho` as a one-point grid, else `default`.
    pub fn rhos(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let grid = match (&self.rho_grid, self.rho) {
            (Some(g), _) => parse_grid(g)?,
            (None, Some(r)) => vec![r],
            (None, None) => default.to_vec(),
        };
        if let Some(bad) = grid.iter().find(|r| !(**r >= 0.0 && **r <= 1.0)) {
            return Err(CliError::Config(format!(
                "rho must lie in [0, 1], got {bad}"
            )));
        }
        Ok(grid)
    }

    pub fn noise(&self) -> Result<NoiseEnv, CliError> {
        Ok(NoiseEnv::new(
            self.sigma_a2.unwrap_or(0.1),
            self.sigma_cov2.unwrap_or(1.0),
            self.sigma_rec2.unwrap_or(1.0),
        )?)
    }

    pub fn quad(&self) -> Result<QuadratureSpec, CliError> {
        Ok(QuadratureSpec::reduced(
            self.quad_order.unwrap_or(QuadratureSpec::DEFAULT_ORDER),
        )?)
    }

    pub fn estimator(&self) -> Result<EstimatorConfig, CliError> {
        let est = EstimatorConfig::new(
            self.samples.unwrap_or(EstimatorConfig::DEFAULT_SAMPLES),
            self.seed.unwrap_or(0),
        )?
        .with_bins(self.bins.unwrap_or(EstimatorConfig::DEFAULT_BINS))?
        .with_inner_samples(self.inner_samples.unwrap_or(0))
        .with_quad(self.quad()?);
        Ok(est)
    }

    pub fn detector_kind(&self) -> Result<DetectorKind, CliError> {
        Ok(match self.detector.unwrap_or(Detector::Fast) {
            Detector::Ml => DetectorKind::Ml(self.quad()?),
            Detector::Fast => DetectorKind::LowComplexity,
            Detector::NnCd => DetectorKind::NearestNeighborCd,
        })
    }

    pub fn constellation(&self) -> Result<Constellation, CliError> {
        let name = self.constellation.as_deref().unwrap_or("qam64");
        let c = match name {
            "qam64" => make_qam(64)?,
            "qam16" => make_qam(16)?,
            "qam4" => make_qam(4)?,
            "psk8" => make_psk(8)?,
            "psk4" => make_psk(4)?,
            "apsk32-3ring" => apsk32_three_ring()?,
            "apsk32-4ring" => apsk32_four_ring()?,
            other => match other.strip_prefix("file:") {
                Some(path) => {
                    let f = fs::File::open(path).map_err(|e| {
                        CliError::Config(format!("cannot open constellation {path}: {e}"))
                    })?;
                    Constellation::read_csv(std::io::BufReader::new(f), path)?
                }
                None => return Err(CliError::Config(format!("unknown constellation '{other}'"))),
            },
        };
        Ok(c)
    }

    /// The resolved settings as `# `-prefixed TOML lines.
    pub fn echo(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        text.lines().map(|l| format!("# {l}\n")).collect()
    }
}

/// `start:step:stop` (inclusive, rounded to 1e-9) or `a,b,c`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::Config(format!(
            "bad grid '{s}': expected start:step:stop or a comma list"
        ))
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [a, st, b] => {
            let (a, st, b) = (num(a)?, num(st)?, num(b)?);
            if !(st > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / st + 1e-9).floor() as usize;
            (0..=n)
                .map(|k| ((a + k as f64 * st) * 1e9).round() / 1e9)
                .collect()
        }
        [_] => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}
