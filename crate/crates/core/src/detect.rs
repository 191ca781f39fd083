//! Symbol detection from both branches and symbol-error-rate simulation.
//!
//! All detectors pick the constellation index with the largest
//! log-likelihood; exact ties go to the lowest index.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::densities::{cond_joint_logpdf_given_x, LowComplexityCandidate, LowComplexityModel, QuadratureSpec};
use crate::error::{Error, Result};
use crate::model::{sample_channel, scale_y2, ComplexValue, Constellation, NoiseEnv, RandomStream, RxSample, SystemConfig};

/// Symbols per Monte-Carlo chunk.
pub const CHUNK: usize = 4096;
pub const MIN_SYMBOLS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    /// Exact likelihood with the antenna noise integrated out.
    Ml(QuadratureSpec),
    /// Closed-form likelihood on the `√P`-scaled power branch.
    LowComplexity,
    /// Nearest neighbour on the coherent branch only.
    NearestNeighborCd,
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Ml(_) => "ml",
            DetectorKind::LowComplexity => "fast",
            DetectorKind::NearestNeighborCd => "nn-cd",
        })
    }
}

fn check_rx(rx: &RxSample) -> Result<()> {
    if rx.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("received sample is not finite: {rx:?}")))
    }
}

/// Index of the largest value; the first one wins ties.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Maximum-likelihood detector with per-configuration constants hoisted.
///
/// The coherent factor of each candidate's likelihood is cheap, and the
/// power-branch factor is bounded by the peak of a Gaussian of variance
/// `σ_rec²`. Candidates are visited from the best coherent factor down and
/// the search stops once no remaining bound can beat the best full value,
/// so the decision is the exact argmax.
#[derive(Debug, Clone)]
pub struct MlDetector<'a> {
    c: &'a Constellation,
    cfg: SystemConfig,
    env: NoiseEnv,
    quad: QuadratureSpec,
    means: Vec<ComplexValue>,
    coh_var: f64,
    ln_power_peak: f64,
}

impl<'a> MlDetector<'a> {
    pub fn new(c: &'a Constellation, cfg: &SystemConfig, env: &NoiseEnv, quad: QuadratureSpec) -> Self {
        let a = cfg.rho.sqrt() * cfg.amplitude();
        Self {
            c,
            cfg: *cfg,
            env: *env,
            quad,
            means: c.points().iter().map(|x| x * a).collect(),
            coh_var: cfg.rho * env.sigma_a2 + env.sigma_cov2,
            ln_power_peak: -0.5 * (2.0 * std::f64::consts::PI * env.sigma_rec2).ln(),
        }
    }

    /// Log-likelihood of every candidate, in constellation order.
    pub fn log_likelihoods(&self, rx: &RxSample) -> Result<Vec<f64>> {
        check_rx(rx)?;
        self.c
            .points()
            .iter()
            .map(|&x| cond_joint_logpdf_given_x(rx.y1, rx.y2, x, &self.cfg, &self.env, &self.quad))
            .collect()
    }

    pub fn detect(&self, rx: &RxSample) -> Result<usize> {
        check_rx(rx)?;
        let coh: Vec<f64> = self
            .means
            .iter()
            .map(|m| -(rx.y1 - m).norm_sqr() / self.coh_var)
            .collect();
        let mut order: Vec<usize> = (0..coh.len()).collect();
        order.sort_by(|&i, &j| coh[j].total_cmp(&coh[i]).then(i.cmp(&j)));
        let mut best = usize::MAX;
        let mut best_v = f64::NEG_INFINITY;
        for &k in &order {
            // constant terms shared by every candidate cancel in the bound
            let bound = coh[k] + self.ln_power_peak - (std::f64::consts::PI * self.coh_var).ln();
            if bound < best_v {
                break;
            }
            let v = cond_joint_logpdf_given_x(rx.y1, rx.y2, self.c.points()[k], &self.cfg, &self.env, &self.quad)?;
            if v > best_v || (v == best_v && k < best) {
                best = k;
                best_v = v;
            }
        }
        if best == usize::MAX {
            return Err(Error::Numeric("no finite likelihood among candidates".into()));
        }
        Ok(best)
    }
}

/// Low-complexity detector with per-candidate constants precomputed.
#[derive(Debug, Clone)]
pub struct FastDetector {
    model: LowComplexityModel,
    candidates: Vec<LowComplexityCandidate>,
}

impl FastDetector {
    pub fn new(c: &Constellation, cfg: &SystemConfig, env: &NoiseEnv) -> Result<Self> {
        let model = LowComplexityModel::new(cfg, env)?;
        let candidates = c.points().iter().map(|&x| model.candidate(x)).collect();
        Ok(Self { model, candidates })
    }

    pub fn log_likelihoods(&self, rx_scaled: &RxSample) -> Vec<f64> {
        self.candidates
            .iter()
            .map(|cand| self.model.loglik(cand, rx_scaled.y1, rx_scaled.y2))
            .collect()
    }

    /// `rx_scaled` must carry the power branch divided by `√P`.
    pub fn detect(&self, rx_scaled: &RxSample) -> Result<usize> {
        check_rx(rx_scaled)?;
        Ok(argmax(
            self.candidates
                .iter()
                .map(|cand| self.model.loglik(cand, rx_scaled.y1, rx_scaled.y2)),
        ))
    }
}

/// Nearest neighbour on `y1` against the scaled points `√ρ√P|h|x`.
#[derive(Debug, Clone)]
pub struct NearestNeighborDetector {
    means: Vec<ComplexValue>,
}

impl NearestNeighborDetector {
    pub fn new(c: &Constellation, cfg: &SystemConfig) -> Self {
        let a = cfg.rho.sqrt() * cfg.amplitude();
        Self {
            means: c.points().iter().map(|x| x * a).collect(),
        }
    }

    pub fn detect(&self, y1: ComplexValue) -> Result<usize> {
        if !y1.re.is_finite() || !y1.im.is_finite() {
            return Err(Error::Input(format!("y1 is not finite: {y1}")));
        }
        Ok(argmax(self.means.iter().map(|m| -(y1 - m).norm_sqr())))
    }
}

/// ML decision for one observation.
pub fn detect_ml(
    rx: &RxSample,
    c: &Constellation,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    quad: &QuadratureSpec,
) -> Result<usize> {
    MlDetector::new(c, cfg, env, *quad).detect(rx)
}

/// Low-complexity decision; `rx_scaled.y2` is the power branch over `√P`.
pub fn detect_fast(rx_scaled: &RxSample, c: &Constellation, cfg: &SystemConfig, env: &NoiseEnv) -> Result<usize> {
    FastDetector::new(c, cfg, env)?.detect(rx_scaled)
}

pub fn detect_nearest_cd(y1: ComplexValue, c: &Constellation, cfg: &SystemConfig) -> Result<usize> {
    NearestNeighborDetector::new(c, cfg).detect(y1)
}

/// Outcome of a symbol-error-rate run.
#[derive(Debug, Clone, PartialEq)]
pub struct SerResult {
    pub ser: f64,
    pub n_symbols: usize,
    pub errors: usize,
    /// Half-width of the normal-approximation 95% binomial interval.
    pub ci95: f64,
    pub rho: f64,
    pub power: f64,
}

impl SerResult {
    fn new(errors: usize, n_symbols: usize, cfg: &SystemConfig) -> Self {
        let ser = errors as f64 / n_symbols as f64;
        Self {
            ser,
            n_symbols,
            errors,
            ci95: 1.96 * (ser * (1.0 - ser) / n_symbols as f64).sqrt(),
            rho: cfg.rho,
            power: cfg.power,
        }
    }

    pub fn power_db(&self) -> f64 {
        10.0 * self.power.log10()
    }
}

enum Built<'a> {
    Ml(MlDetector<'a>),
    Fast(FastDetector, f64),
    Nearest(NearestNeighborDetector),
}

impl Built<'_> {
    fn detect(&self, rx: &RxSample) -> Result<usize> {
        match self {
            Built::Ml(d) => d.detect(rx),
            Built::Fast(d, power) => d.detect(&scale_y2(*rx, *power)?),
            Built::Nearest(d) => d.detect(rx.y1),
        }
    }
}

/// Monte-Carlo symbol error rate with uniformly drawn symbols.
///
/// Symbol `i` of chunk `k` is always drawn from random stream `k`, with the
/// symbol index drawn before the noise, so the result depends only on
/// `(seed, n)` and runs at different `ρ` or `P` share their random numbers.
pub fn ser_monte_carlo(
    c: &Constellation,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    det: DetectorKind,
    n: usize,
    seed: u64,
) -> Result<SerResult> {
    if n < MIN_SYMBOLS {
        return Err(Error::Argument(format!("need at least {MIN_SYMBOLS} symbols, got {n}")));
    }
    let built = match det {
        DetectorKind::Ml(q) => Built::Ml(MlDetector::new(c, cfg, env, q)),
        DetectorKind::LowComplexity => Built::Fast(FastDetector::new(c, cfg, env)?, cfg.power),
        DetectorKind::NearestNeighborCd => Built::Nearest(NearestNeighborDetector::new(c, cfg)),
    };
    let chunks = n.div_ceil(CHUNK);
    let counts: Vec<Result<usize>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = RandomStream::new(seed, k as u64);
            let draws = CHUNK.min(n - k * CHUNK);
            let mut errors = 0;
            for _ in 0..draws {
                let sent = rng.index(c.len());
                let rx = sample_channel(c.points()[sent], cfg, env, &mut rng);
                if built.detect(&rx)? != sent {
                    errors += 1;
                }
            }
            Ok(errors)
        })
        .collect();
    let mut errors = 0;
    for e in counts {
        errors += e?;
    }
    Ok(SerResult::new(errors, n, cfg))
}

/// SER over a grid of split ratios with common random numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSearch {
    pub rho_star: f64,
    pub ser_min: f64,
    pub curve: Vec<SerResult>,
}

/// Grid minimiser of SER over `ρ`; ties go to the largest `ρ`.
pub fn ser_optimal_rho(
    c: &Constellation,
    cfg_base: &SystemConfig,
    env: &NoiseEnv,
    det: DetectorKind,
    n: usize,
    seed: u64,
    rho_grid: &[f64],
) -> Result<RhoSearch> {
    if rho_grid.is_empty() {
        return Err(Error::Argument("rho grid is empty".into()));
    }
    if let Some(r) = rho_grid.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(Error::Argument(format!("rho grid values must lie in (0, 1], got {r}")));
    }
    let mut curve = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        curve.push(ser_monte_carlo(c, &cfg_base.with_rho(rho)?, env, det, n, seed)?);
    }
    let mut best = 0;
    for (i, r) in curve.iter().enumerate() {
        let b = &curve[best];
        if r.ser < b.ser || (r.ser == b.ser && r.rho > b.rho) {
            best = i;
        }
    }
    Ok(RhoSearch {
        rho_star: curve[best].rho,
        ser_min: curve[best].ser,
        curve,
    })
}

/// Default SER split-ratio grid: `0.05, 0.10, …, 1.0`.
pub fn default_rho_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

/// `0.01`-step grid within `±0.05` of `center`, clipped to `(0, 1]`.
pub fn refine_rho_grid(center: f64) -> Vec<f64> {
    (-5..=5)
        .map(|k| ((center + 0.01 * k as f64) * 100.0).round() / 100.0)
        .filter(|r| *r > 0.0 && *r <= 1.0)
        .collect()
}

/// Transmit power in dB at which a SER-versus-power curve first falls to
/// `target`, interpolating `log10 SER` linearly in dB between grid points.
/// `None` when the curve never crosses the target.
pub fn power_for_target_ser(curve: &[SerResult], target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|r| r.power > 0.0)
        .map(|r| (r.power_db(), r.ser))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lt = target.log10();
    for w in pts.windows(2) {
        let ((p0, s0), (p1, s1)) = (w[0], w[1]);
        if s0 >= target && s1 <= target {
            if s1 <= 0.0 || s0 == s1 {
                return Some(p1);
            }
            let (l0, l1) = (s0.log10(), s1.log10());
            return Some(p0 + (lt - l0) / (l1 - l0) * (p1 - p0));
        }
    }
    None
}

/// Which sweep variable leads each SER CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerAxis {
    Rho,
    PowerDb,
}

/// Writes rows `rho|power_db,ser,ci95,n_symbols,detector,constellation`.
pub fn write_ser_csv<W: Write>(
    mut out: W,
    axis: SerAxis,
    rows: &[SerResult],
    det: DetectorKind,
    constellation: &str,
) -> Result<()> {
    let lead = match axis {
        SerAxis::Rho => "rho",
        SerAxis::PowerDb => "power_db",
    };
    writeln!(out, "{lead},ser,ci95,n_symbols,detector,constellation")?;
    for r in rows {
        let x = match axis {
            SerAxis::Rho => r.rho,
            SerAxis::PowerDb => r.power_db(),
        };
        writeln!(out, "{x},{},{},{},{det},{constellation}", r.ser, r.ci95, r.n_symbols)?;
    }
    Ok(())
}
