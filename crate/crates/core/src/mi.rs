//! Mutual information between the transmitted Gaussian symbol and the pair
//! of branch outputs: closed forms, a high-SNR approximation, Monte-Carlo
//! estimators, and the gain of the best split over the two pure receivers.
//!
//! Monte-Carlo work is cut into chunks of [`CHUNK`] draws. Chunk `k` always
//! uses random stream `k` of the configured seed and chunk partial results
//! are combined in chunk order, so estimates are bit-identical for any
//! number of worker threads.

use std::collections::HashMap;
use std::f64::consts::{E, LN_2, LOG2_E, PI};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::densities::{
    coherent_marginal, cond_joint_logpdf_given_x, emg_logpdf_unchecked,
    joint_logpdf_gaussian_input, ln_conv_ncx2_normal, symbol_posterior, QuadratureSpec,
};
use crate::error::{Error, Result};
use crate::model::{sample_channel, sample_gaussian_input, ComplexValue, NoiseEnv, RandomStream, SystemConfig};
use crate::quadrature::log_sum_exp;
use crate::specfun::{exp_e1, EULER_GAMMA};

/// Draws per Monte-Carlo chunk.
pub const CHUNK: usize = 4096;
pub const MIN_SAMPLES: usize = 10_000;
pub const MIN_BINS: usize = 16;
pub const MAX_BINS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MiMethod {
    Histogram,
    Plugin,
    ClosedForm,
    Approx,
}

impl fmt::Display for MiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MiMethod::Histogram => "histogram",
            MiMethod::Plugin => "plugin",
            MiMethod::ClosedForm => "closed-form",
            MiMethod::Approx => "approx",
        })
    }
}

/// Monte-Carlo estimator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub n_samples: usize,
    pub bins_per_dim: usize,
    /// Inner draws per outer sample for the plug-in output density. `0`
    /// uses the exact output density available for Gaussian input.
    pub inner_samples: usize,
    pub quad: QuadratureSpec,
    pub seed: u64,
    /// A warning is attached to estimates whose standard error exceeds this.
    pub tolerance: Option<f64>,
}

impl EstimatorConfig {
    pub const DEFAULT_SAMPLES: usize = 1_000_000;
    pub const DEFAULT_BINS: usize = 80;

    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n_samples,
            seed,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_bins(mut self, bins_per_dim: usize) -> Result<Self> {
        self.bins_per_dim = bins_per_dim;
        self.validate()?;
        Ok(self)
    }

    pub fn with_inner_samples(mut self, inner_samples: usize) -> Self {
        self.inner_samples = inner_samples;
        self
    }

    pub fn with_quad(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::Argument(format!(
                "n_samples must be >= {MIN_SAMPLES}, got {}",
                self.n_samples
            )));
        }
        if !(MIN_BINS..=MAX_BINS).contains(&self.bins_per_dim) {
            return Err(Error::Argument(format!(
                "bins_per_dim must lie in [{MIN_BINS}, {MAX_BINS}], got {}",
                self.bins_per_dim
            )));
        }
        QuadratureSpec::new(self.quad.order, self.quad.kind)?;
        Ok(())
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            n_samples: Self::DEFAULT_SAMPLES,
            bins_per_dim: Self::DEFAULT_BINS,
            inner_samples: 0,
            quad: QuadratureSpec::default(),
            seed: 0,
            tolerance: None,
        }
    }
}

/// A mutual-information value in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    /// Monte-Carlo standard error; zero for analytic methods.
    pub std_err: f64,
    pub method: MiMethod,
    /// Reliability note (sparse histogram, error above tolerance).
    pub warning: Option<String>,
}

impl MiEstimate {
    fn exact(bits: f64, method: MiMethod) -> Self {
        Self {
            bits,
            std_err: 0.0,
            method,
            warning: None,
        }
    }
}

/// Best split against the better of the two pure receivers.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub rho_star: f64,
    /// `mi_at_star − max(mi_at_0, mi_at_1)` in bits.
    pub g_mi: f64,
    /// `g_mi` relative to `max(mi_at_0, mi_at_1)`, in percent.
    pub g_mi_pct: f64,
    pub mi_at_0: f64,
    pub mi_at_1: f64,
    pub mi_at_star: f64,
    /// Standard error of `mi_at_star`.
    pub std_err: f64,
    /// Every evaluated split ratio, ascending.
    pub curve: Vec<(f64, MiEstimate)>,
    pub warnings: Vec<String>,
}

/// Pure coherent receiver (`ρ = 1`): `log2(1 + P|h|²/(σ_A² + σ_cov²))`.
/// `cfg.rho` is ignored.
pub fn mi_cd_closed_form(cfg: &SystemConfig, env: &NoiseEnv) -> MiEstimate {
    let snr = cfg.signal_power() / (env.sigma_a2 + env.sigma_cov2);
    MiEstimate::exact(snr.ln_1p() / LN_2, MiMethod::ClosedForm)
}

/// Upper bound on the pure power-detection receiver's mutual information,
/// tight as the rectifier noise vanishes:
/// `½log2(1 + P|h|²/(2σ_A²)) + ½(log2(2π/e) − γ·log2 e)`.
pub fn mi_pd_upper_bound(cfg: &SystemConfig, env: &NoiseEnv) -> MiEstimate {
    let constant = 0.5 * ((2.0 * PI / E).log2() - EULER_GAMMA * LOG2_E);
    let bits = 0.5 * (cfg.signal_power() / (2.0 * env.sigma_a2)).ln_1p() / LN_2 + constant;
    MiEstimate::exact(bits, MiMethod::ClosedForm)
}

/// High-SNR closed-form approximation for `0 < ρ < 1`:
///
/// `log2(ρ(P|h|²+σ_A²)/(ρσ_A²+σ_cov²)) + (e^a E1(a) − e^b E1(b))/(2 ln 2)`
///
/// with `a = ρσ_rec²/(2(1−ρ)²σ_cov²(P|h|²+σ_A²))` and
/// `b = (ρσ_A²+σ_cov²)σ_rec²/(2(1−ρ)²P|h|²σ_A²σ_cov²)`.
pub fn mi_split_approx(cfg: &SystemConfig, env: &NoiseEnv) -> Result<MiEstimate> {
    let rho = cfg.rho;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!(
            "approximation needs 0 < rho < 1, got {rho}"
        )));
    }
    let p = cfg.signal_power();
    if !(p > 0.0) {
        return Err(Error::Domain("approximation needs P|h|^2 > 0".into()));
    }
    let coh = rho * env.sigma_a2 + env.sigma_cov2;
    let pd = 2.0 * (1.0 - rho).powi(2);
    let a = rho * env.sigma_rec2 / (pd * env.sigma_cov2 * (p + env.sigma_a2));
    let b = coh * env.sigma_rec2 / (pd * p * env.sigma_a2 * env.sigma_cov2);
    let upsilon = exp_e1(a)? - exp_e1(b)?;
    let bits = (rho * (p + env.sigma_a2) / coh).log2() + upsilon / (2.0 * LN_2);
    if !bits.is_finite() {
        return Err(Error::Numeric(format!("approximation not finite at rho={rho}")));
    }
    Ok(MiEstimate::exact(bits, MiMethod::Approx))
}

/// Limit of [`mi_split_approx`] as `P → ∞`:
/// `log2(P|h|²/(√(σ_A² + σ_cov²/ρ)·√σ_A²))`.
pub fn mi_split_asymptotic(cfg: &SystemConfig, env: &NoiseEnv) -> Result<MiEstimate> {
    let rho = cfg.rho;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!(
            "asymptotic form needs 0 < rho < 1, got {rho}"
        )));
    }
    let denom = (env.sigma_a2 + env.sigma_cov2 / rho).sqrt() * env.sigma_a2.sqrt();
    Ok(MiEstimate::exact(
        (cfg.signal_power() / denom).log2(),
        MiMethod::Approx,
    ))
}

/// High-SNR gap between the best split and the coherent receiver:
/// `½log2(1 + σ_cov²/σ_A²)`.
pub fn asymptotic_gain(env: &NoiseEnv) -> Result<f64> {
    if !(env.sigma_a2 > 0.0) {
        return Err(Error::Domain("asymptotic gain needs sigma_a2 > 0".into()));
    }
    Ok(0.5 * (env.sigma_cov2 / env.sigma_a2).ln_1p() / LN_2)
}

/// Running sum and sum of squares of per-draw terms.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(mut self, o: Moments) -> Moments {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn std_err(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq / n - m * m).max(0.0) / (n - 1.0)).sqrt()
    }
}

/// Streams at or above this offset feed auxiliary draws (inner samples), so
/// they never overlap the per-chunk outer streams.
const AUX_STREAM: u64 = 1 << 40;

/// Runs `body(chunk, chunk_rng, draws)` over all chunks and collects the
/// results in chunk order.
fn run_chunks<T, F>(n: usize, seed: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut RandomStream, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = RandomStream::new(seed, k as u64);
            let draws = CHUNK.min(n - k * CHUNK);
            body(k as u64, &mut rng, draws)
        })
        .collect()
}

fn reduce_moments(parts: Vec<Result<Moments>>) -> Result<Moments> {
    let mut acc = Moments::default();
    for p in parts {
        acc = acc.merge(p?);
    }
    Ok(acc)
}

fn tolerance_warning(est: &EstimatorConfig, std_err: f64) -> Option<String> {
    match est.tolerance {
        Some(tol) if std_err > tol => Some(format!(
            "standard error {std_err:.4} bits exceeds requested {tol:.4}"
        )),
        _ => None,
    }
}

/// Pure power-detection receiver (`ρ = 0`) by Monte-Carlo.
///
/// Each draw contributes `log2 f(y2|x) − log2 f(y2)`, where the output
/// density is exponentially modified Gaussian and the conditional density
/// is the noncentral chi-squared / Gaussian convolution. `cfg.rho` is
/// ignored.
pub fn mi_pd_numeric(cfg: &SystemConfig, env: &NoiseEnv, est: &EstimatorConfig) -> Result<MiEstimate> {
    est.validate()?;
    let pd = cfg.with_rho(0.0)?;
    let p = pd.signal_power();
    let mean = p + env.sigma_a2;
    let s2 = 0.5 * env.sigma_a2;
    let parts = run_chunks(est.n_samples, est.seed, |_, rng, draws| {
        let mut m = Moments::default();
        for _ in 0..draws {
            let x = sample_gaussian_input(rng);
            let y2 = sample_channel(x, &pd, env, rng).y2;
            let cond = ln_conv_ncx2_normal(y2, p * x.norm_sqr(), s2, env.sigma_rec2, est.quad.order)?;
            let marg = emg_logpdf_unchecked(y2, mean, env.sigma_rec2);
            m.push((cond - marg) * LOG2_E);
        }
        Ok(m)
    });
    let m = reduce_moments(parts)?;
    let std_err = m.std_err();
    Ok(MiEstimate {
        bits: m.mean(),
        std_err,
        method: MiMethod::Plugin,
        warning: tolerance_warning(est, std_err),
    })
}

/// Monte-Carlo mutual information of the splitting receiver at `cfg.rho`
/// under Gaussian input.
///
/// - `Plugin`: mean of `log2 f(y|x) − log2 f(y)` over joint draws.
/// - `Histogram`: 3-D histogram entropy of `(Re y1, Im y1, y2)` minus the
///   plug-in conditional entropy. The conditional density only depends on
///   `|x|`, so each draw is rotated to `x = (|x|, 0)` before evaluation.
pub fn mi_split_mc(
    cfg: &SystemConfig,
    env: &NoiseEnv,
    est: &EstimatorConfig,
    method: MiMethod,
) -> Result<MiEstimate> {
    est.validate()?;
    match method {
        MiMethod::Plugin => mi_plugin(cfg, env, est),
        MiMethod::Histogram => mi_histogram(cfg, env, est),
        other => Err(Error::Argument(format!(
            "{other} is not a Monte-Carlo method"
        ))),
    }
}

/// `ln f(y)` by importance sampling over the symbol with the coherent-branch
/// posterior as proposal. Reuses the outer stream, so it stays reproducible.
fn ln_output_density_inner(
    y1: ComplexValue,
    y2: f64,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    est: &EstimatorConfig,
    rng: &mut RandomStream,
) -> Result<f64> {
    let (ln_y1, _, _) = coherent_marginal(y1, cfg, env);
    let (mean, var) = symbol_posterior(y1, cfg, env);
    let coh_var = cfg.rho * env.sigma_a2 + env.sigma_cov2;
    let y1_cond = |x: ComplexValue| {
        let t = y1 - x * (cfg.rho.sqrt() * cfg.amplitude());
        -(PI * coh_var).ln() - t.norm_sqr() / coh_var
    };
    // f(y) = f(y1) · E_{x|y1}[f(y | x) / f(y1 | x)]
    let mut terms = Vec::with_capacity(est.inner_samples);
    for _ in 0..est.inner_samples {
        let x = mean + rng.complex_normal(var);
        terms.push(cond_joint_logpdf_given_x(y1, y2, x, cfg, env, &est.quad)? - y1_cond(x));
    }
    Ok(ln_y1 + log_sum_exp(terms.iter().copied()) - (est.inner_samples as f64).ln())
}

fn mi_plugin(cfg: &SystemConfig, env: &NoiseEnv, est: &EstimatorConfig) -> Result<MiEstimate> {
    let parts = run_chunks(est.n_samples, est.seed, |k, rng, draws| {
        let mut inner_rng = RandomStream::new(est.seed, AUX_STREAM + k);
        let mut m = Moments::default();
        for _ in 0..draws {
            let x = sample_gaussian_input(rng);
            let y = sample_channel(x, cfg, env, rng);
            let cond = cond_joint_logpdf_given_x(y.y1, y.y2, x, cfg, env, &est.quad)?;
            let marg = if est.inner_samples == 0 {
                joint_logpdf_gaussian_input(y.y1, y.y2, cfg, env, &est.quad)?
            } else {
                ln_output_density_inner(y.y1, y.y2, cfg, env, est, &mut inner_rng)?
            };
            m.push((cond - marg) * LOG2_E);
        }
        Ok(m)
    });
    let m = reduce_moments(parts)?;
    let std_err = m.std_err();
    Ok(MiEstimate {
        bits: m.mean(),
        std_err,
        method: MiMethod::Plugin,
        warning: tolerance_warning(est, std_err),
    })
}

fn mi_histogram(cfg: &SystemConfig, env: &NoiseEnv, est: &EstimatorConfig) -> Result<MiEstimate> {
    let parts = run_chunks(est.n_samples, est.seed, |_, rng, draws| {
        let mut pts = Vec::with_capacity(3 * draws);
        let mut m = Moments::default();
        for _ in 0..draws {
            let x = sample_gaussian_input(rng);
            let y = sample_channel(x, cfg, env, rng);
            pts.extend([y.y1.re, y.y1.im, y.y2]);
            // rotate so the symbol lies on the positive real axis
            let phase = if x.norm() > 0.0 { x.conj() / x.norm() } else { ComplexValue::new(1.0, 0.0) };
            let xr = ComplexValue::new(x.norm(), 0.0);
            let lc = cond_joint_logpdf_given_x(y.y1 * phase, y.y2, xr, cfg, env, &est.quad)?;
            m.push(-lc * LOG2_E);
        }
        Ok::<_, Error>((pts, m))
    });
    let mut pts = Vec::with_capacity(3 * est.n_samples);
    let mut cond = Moments::default();
    for p in parts {
        let (chunk, m) = p?;
        pts.extend_from_slice(&chunk);
        cond = cond.merge(m);
    }
    let h = histogram_entropy(&pts, 3, est.bins_per_dim)?;
    let std_err = (h.std_err.powi(2) + cond.std_err().powi(2)).sqrt();
    let mut warning = h.warning;
    if let Some(w) = tolerance_warning(est, std_err) {
        warning = Some(match warning {
            Some(prev) => format!("{prev}; {w}"),
            None => w,
        });
    }
    Ok(MiEstimate {
        bits: h.bits - cond.mean(),
        std_err,
        method: MiMethod::Histogram,
        warning,
    })
}

/// Histogram differential entropy with its plug-in standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramEntropy {
    pub bits: f64,
    pub std_err: f64,
    /// Set when more than 20% of the samples fall in cells holding fewer
    /// than 5 samples.
    pub warning: Option<String>,
}

/// Plug-in histogram estimate of differential entropy in bits.
///
/// `samples` holds `dim`-dimensional points stored row after row. Each axis
/// is split into `bins_per_dim` equal cells spanning the sample range.
pub fn entropy_histogram(samples: &[f64], dim: usize, bins_per_dim: usize) -> Result<f64> {
    histogram_entropy(samples, dim, bins_per_dim).map(|h| h.bits)
}

pub fn histogram_entropy(samples: &[f64], dim: usize, bins_per_dim: usize) -> Result<HistogramEntropy> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Argument(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    if !samples.len().is_multiple_of(dim) {
        return Err(Error::Argument("sample buffer length is not a multiple of dim".into()));
    }
    let n = samples.len() / dim;
    if n < MIN_SAMPLES {
        return Err(Error::Argument(format!("need >= {MIN_SAMPLES} samples, got {n}")));
    }
    if !(MIN_BINS..=MAX_BINS).contains(&bins_per_dim) {
        return Err(Error::Argument(format!(
            "bins_per_dim must lie in [{MIN_BINS}, {MAX_BINS}], got {bins_per_dim}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("histogram samples must be finite".into()));
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in samples.chunks_exact(dim) {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let mut width = vec![0.0; dim];
    for d in 0..dim {
        if !(hi[d] > lo[d]) {
            return Err(Error::Domain(format!("all samples equal along axis {d}")));
        }
        width[d] = (hi[d] - lo[d]) / bins_per_dim as f64;
    }
    let cell_of = |p: &[f64]| {
        let mut key = 0u64;
        for d in 0..dim {
            let b = (((p[d] - lo[d]) / width[d]) as usize).min(bins_per_dim - 1);
            key = key * bins_per_dim as u64 + b as u64;
        }
        key
    };
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for p in samples.chunks_exact(dim) {
        *counts.entry(cell_of(p)).or_insert(0) += 1;
    }
    // Summation order must not depend on hash iteration order.
    let mut occupancy: Vec<u64> = counts.into_values().collect();
    occupancy.sort_unstable();

    let nf = n as f64;
    let ln_vol: f64 = width.iter().map(|w| w.ln()).sum();
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    let mut sparse = 0u64;
    for &c in &occupancy {
        // −ln p̂ for each of the c samples in this cell
        let v = ln_vol - (c as f64 / nf).ln();
        mean += c as f64 * v;
        mean_sq += c as f64 * v * v;
        if c < 5 {
            sparse += c;
        }
    }
    mean /= nf;
    mean_sq /= nf;
    let std_err = ((mean_sq - mean * mean).max(0.0) / (nf - 1.0)).sqrt() * LOG2_E;
    let sparse_frac = sparse as f64 / nf;
    let warning = (sparse_frac > 0.2).then(|| {
        format!(
            "{:.0}% of samples sit in histogram cells with fewer than 5 samples",
            100.0 * sparse_frac
        )
    });
    Ok(HistogramEntropy {
        bits: mean * LOG2_E,
        std_err,
        warning,
    })
}

/// Split ratios searched by [`gain`]: the open-interval grid of the given
/// step plus a finer grid on `[0.9, 0.995]`, where the optimum sits at high
/// SNR.
pub fn gain_rho_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::Argument(format!("grid step must lie in (0, 0.1], got {step}")));
    }
    let mut grid: Vec<f64> = (1..)
        .map(|k| k as f64 * step)
        .take_while(|r| *r < 1.0 - 1e-9)
        .collect();
    grid.extend((0..20).map(|k| 0.9 + 0.005 * k as f64));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(grid)
}

/// Searches `ρ ∈ (0, 1)` for the largest Monte-Carlo mutual information
/// (plug-in estimator, one seed for every `ρ`), refines the grid maximum with
/// a parabola through its neighbours, and compares against the coherent
/// closed form at `ρ = 1` and the power-detection estimate at `ρ = 0`.
pub fn gain(
    cfg_base: &SystemConfig,
    env: &NoiseEnv,
    est: &EstimatorConfig,
    rho_grid_step: f64,
) -> Result<GainReport> {
    let grid = gain_rho_grid(rho_grid_step)?;
    let mut warnings = Vec::new();
    let mut curve = Vec::with_capacity(grid.len() + 1);
    for &rho in &grid {
        let e = mi_split_mc(&cfg_base.with_rho(rho)?, env, est, MiMethod::Plugin)?;
        if let Some(w) = &e.warning {
            warnings.push(format!("rho={rho:.3}: {w}"));
        }
        curve.push((rho, e));
    }
    let best = argmax_first(curve.iter().map(|(_, e)| e.bits));
    if best > 0 && best + 1 < curve.len() {
        let (x0, y0) = (curve[best - 1].0, curve[best - 1].1.bits);
        let (x1, y1) = (curve[best].0, curve[best].1.bits);
        let (x2, y2) = (curve[best + 1].0, curve[best + 1].1.bits);
        if let Some(v) = parabola_vertex((x0, y0), (x1, y1), (x2, y2)) {
            if v > x0 && v < x2 && (v - x1).abs() > 1e-6 {
                let e = mi_split_mc(&cfg_base.with_rho(v)?, env, est, MiMethod::Plugin)?;
                let pos = curve.partition_point(|(r, _)| *r < v);
                curve.insert(pos, (v, e));
            }
        }
    }
    let best = argmax_first(curve.iter().map(|(_, e)| e.bits));
    let (rho_star, star) = curve[best].clone();

    let mi1 = mi_cd_closed_form(cfg_base, env).bits;
    let pd = mi_pd_numeric(cfg_base, env, est)?;
    if let Some(w) = &pd.warning {
        warnings.push(format!("rho=0: {w}"));
    }
    let mi0 = pd.bits;
    let reference = mi0.max(mi1);
    let g_mi = star.bits - reference;
    Ok(GainReport {
        rho_star,
        g_mi,
        g_mi_pct: if reference > 0.0 { 100.0 * g_mi / reference } else { 0.0 },
        mi_at_0: mi0,
        mi_at_1: mi1,
        mi_at_star: star.bits,
        std_err: star.std_err,
        curve,
        warnings,
    })
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
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

fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<f64> {
    let d1 = (b.1 - a.1) / (b.0 - a.0);
    let d2 = (c.1 - b.1) / (c.0 - b.0);
    let curv = (d2 - d1) / (c.0 - a.0);
    if !(curv < 0.0) {
        return None;
    }
    Some(0.5 * (a.0 + b.0) - d1 / (2.0 * curv))
}

/// Writes sweep rows `rho,mi_bits,std_err,method`.
pub fn write_mi_csv<W: Write>(mut out: W, rows: &[(f64, MiEstimate)]) -> Result<()> {
    writeln!(out, "rho,mi_bits,std_err,method")?;
    for (rho, e) in rows {
        writeln!(out, "{rho},{},{},{}", e.bits, e.std_err, e.method)?;
    }
    Ok(())
}
