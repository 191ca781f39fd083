//! Probability densities of the two receiver branches.
//!
//! Every density has a `*_logpdf` form; the linear forms are `exp` of it.
//! Detection and entropy estimation work in log space throughout.
//!
//! The conditional density of `(y1, y2)` given the symbol `x` involves a
//! double integral over the antenna noise `w`. Because the coherent branch
//! and the noise prior are both Gaussian in `w`, conditioning on `y1` leaves
//! `w` complex Gaussian; the pre-split signal `√P|h|x + w` is then complex
//! Gaussian too, its squared magnitude is noncentral chi-squared, and the
//! power branch is that variable scaled by `1-ρ` plus Gaussian rectifier
//! noise. The double integral therefore collapses to the same
//! one-dimensional "noncentral chi-squared ⊛ Gaussian" convolution that
//! gives the PD-only density. [`QuadratureKind::GaussHermite2d`] keeps the
//! direct tensor-product evaluation over `w` as an independent route.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{ComplexValue, NoiseEnv, SystemConfig};
use crate::quadrature::{self, gauss_hermite, gauss_legendre, log_sum_exp};
use crate::specfun::{bessel_i0_scaled_unchecked, ln_erfc};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Integrand values more than this many nats below the peak are dropped.
const TAIL_NATS: f64 = 38.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Closed-form Gaussian marginalisation down to a single convolution
    /// integral, evaluated with an adaptive Gauss–Legendre window.
    Reduced,
    /// Tensor-product Gauss–Hermite over the real and imaginary parts of the
    /// antenna noise (`w = σ_A·t` per component).
    GaussHermite2d,
}

/// Quadrature settings for the antenna-noise marginalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Nodes per integration dimension.
    pub order: usize,
    pub kind: QuadratureKind,
}

impl QuadratureSpec {
    pub const DEFAULT_ORDER: usize = 48;

    pub fn new(order: usize, kind: QuadratureKind) -> Result<Self> {
        if !(quadrature::MIN_ORDER..=quadrature::MAX_ORDER).contains(&order) {
            return Err(Error::Argument(format!(
                "quadrature order must lie in [{}, {}], got {order}",
                quadrature::MIN_ORDER,
                quadrature::MAX_ORDER
            )));
        }
        Ok(Self { order, kind })
    }

    pub fn reduced(order: usize) -> Result<Self> {
        Self::new(order, QuadratureKind::Reduced)
    }

    pub fn gauss_hermite(order: usize) -> Result<Self> {
        Self::new(order, QuadratureKind::GaussHermite2d)
    }

    /// Same kind, twice the order (capped at the maximum).
    pub fn doubled(&self) -> Self {
        Self {
            order: (2 * self.order).min(quadrature::MAX_ORDER),
            kind: self.kind,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: Self::DEFAULT_ORDER,
            kind: QuadratureKind::Reduced,
        }
    }
}

#[inline]
fn ln_normal(x: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln()) - 0.5 * x * x / var
}

#[inline]
fn ln_complex_normal(t: ComplexValue, var: f64) -> f64 {
    -(PI * var).ln() - t.norm_sqr() / var
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Log density of the power-branch output of a PD-only receiver under
/// Gaussian input: an exponential with mean `P|h|² + σ_A²` plus Gaussian
/// noise of variance `σ_rec²` (exponentially modified Gaussian).
pub fn emg_logpdf(y2: f64, power: f64, h_mag: f64, sigma_a2: f64, sigma_rec2: f64) -> Result<f64> {
    check_positive("sigma_a2", sigma_a2)?;
    check_positive("sigma_rec2", sigma_rec2)?;
    if !(power >= 0.0) || !h_mag.is_finite() || !y2.is_finite() {
        return Err(Error::Domain("emg: need finite y2, h_mag and power >= 0".into()));
    }
    let mean = power * h_mag * h_mag + sigma_a2;
    Ok(emg_logpdf_unchecked(y2, mean, sigma_rec2))
}

pub fn emg_pdf(y2: f64, power: f64, h_mag: f64, sigma_a2: f64, sigma_rec2: f64) -> Result<f64> {
    emg_logpdf(y2, power, h_mag, sigma_a2, sigma_rec2).map(f64::exp)
}

pub(crate) fn emg_logpdf_unchecked(y2: f64, mean: f64, var: f64) -> f64 {
    let shift = var / mean;
    -(2.0 * mean).ln() + (shift - 2.0 * y2) / (2.0 * mean)
        + ln_erfc((shift - y2) / (2.0 * var).sqrt())
}

/// Log density of `R = |μ + w|²` with `|μ|² = lambda` and `w` having
/// per-component variance `sigma_s2` (noncentral chi-squared, two degrees
/// of freedom). `-∞` for `r < 0`.
pub fn ncx2_logpdf(r: f64, lambda: f64, sigma_s2: f64) -> Result<f64> {
    check_positive("sigma_s2", sigma_s2)?;
    if !(lambda >= 0.0) || !lambda.is_finite() || r.is_nan() {
        return Err(Error::Domain(format!(
            "ncx2: need lambda >= 0 and a number r, got lambda={lambda}, r={r}"
        )));
    }
    Ok(ncx2_logpdf_unchecked(r, lambda, sigma_s2))
}

pub fn ncx2_pdf(r: f64, lambda: f64, sigma_s2: f64) -> Result<f64> {
    ncx2_logpdf(r, lambda, sigma_s2).map(f64::exp)
}

#[inline]
pub(crate) fn ncx2_logpdf_unchecked(r: f64, lambda: f64, sigma_s2: f64) -> f64 {
    if r < 0.0 {
        return f64::NEG_INFINITY;
    }
    let sr = r.sqrt();
    let sl = lambda.sqrt();
    let z = sr * sl / sigma_s2;
    // e^{-(r+λ)/2s} I0(z) = e^{-(√r-√λ)²/2s} · e^{-z} I0(z)
    -(2.0 * sigma_s2).ln() - (sr - sl) * (sr - sl) / (2.0 * sigma_s2)
        + bessel_i0_scaled_unchecked(z).ln()
}

/// `ln ∫_0^∞ ncx2(r; λ, s) · N(y - r; 0, v) dr`.
///
/// The integrand is log-concave, so it has one peak. A Gauss–Legendre rule
/// is laid over a window seeded from the moment-matched Gaussian product;
/// the window is widened while its edges still carry mass and narrowed when
/// the mass occupies only a few nodes.
pub(crate) fn ln_conv_ncx2_normal(y: f64, lambda: f64, s: f64, v: f64, order: usize) -> Result<f64> {
    let rule = gauss_legendre(order);
    let g = |r: f64| ncx2_logpdf_unchecked(r, lambda, s) + ln_normal(y - r, v);

    let mean = lambda + 2.0 * s;
    let var = 4.0 * s * (s + lambda);
    let prec = 1.0 / var + 1.0 / v;
    let centre = (mean / var + y / v) / prec;
    let width = prec.sqrt().recip();
    const K: f64 = 10.0;
    let mut lo = (centre - K * width).max(0.0);
    let mut hi = centre + K * width;
    if hi <= lo {
        lo = 0.0;
        hi = K * width;
    }

    let mut values = vec![0.0; order];
    for _ in 0..40 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut gmax = f64::NEG_INFINITY;
        for (v, t) in values.iter_mut().zip(&rule.nodes) {
            *v = g(mid + half * t);
            gmax = gmax.max(*v);
        }
        if !gmax.is_finite() {
            return Err(Error::Numeric(format!(
                "convolution integrand not finite (y={y}, lambda={lambda}, s={s}, v={v})"
            )));
        }
        let thr = gmax - TAIL_NATS;
        let grow_lo = lo > 0.0 && g(lo) > thr;
        let grow_hi = g(hi) > thr;
        if grow_lo || grow_hi {
            let span = hi - lo;
            if grow_lo {
                lo = (lo - span).max(0.0);
            }
            if grow_hi {
                hi += span;
            }
            continue;
        }
        let first = values.iter().position(|&v| v > thr).unwrap_or(0);
        let last = values.iter().rposition(|&v| v > thr).unwrap_or(order - 1);
        if last - first + 1 < order / 3 {
            let new_lo = if first == 0 { lo } else { mid + half * rule.nodes[first - 1] };
            let new_hi = if last + 1 == order { hi } else { mid + half * rule.nodes[last + 1] };
            if new_hi - new_lo < 0.999 * (hi - lo) {
                lo = new_lo;
                hi = new_hi;
                continue;
            }
        }
        let sum = log_sum_exp(values.iter().zip(&rule.ln_weights).map(|(v, lw)| v + lw));
        return Ok(half.ln() + sum);
    }
    Err(Error::Numeric(format!(
        "convolution window did not settle (y={y}, lambda={lambda}, s={s}, v={v})"
    )))
}

/// Log density of `R_c = R_n + N`, the PD-only branch output conditioned on
/// the symbol: noncentral chi-squared `R_n` (`λ = P|h|²|x|²`,
/// `σ_s² = σ_A²/2`) convolved with rectifier noise `N ~ N(0, σ_rec²)`.
pub fn rc_logpdf(r_c: f64, lambda: f64, sigma_s2: f64, sigma_rec2: f64) -> Result<f64> {
    rc_logpdf_with_order(r_c, lambda, sigma_s2, sigma_rec2, QuadratureSpec::DEFAULT_ORDER)
}

pub fn rc_logpdf_with_order(
    r_c: f64,
    lambda: f64,
    sigma_s2: f64,
    sigma_rec2: f64,
    order: usize,
) -> Result<f64> {
    check_positive("sigma_s2", sigma_s2)?;
    check_positive("sigma_rec2", sigma_rec2)?;
    if !(lambda >= 0.0) || !lambda.is_finite() || !r_c.is_finite() {
        return Err(Error::Domain("rc: need finite r_c and lambda >= 0".into()));
    }
    QuadratureSpec::reduced(order)?;
    ln_conv_ncx2_normal(r_c, lambda, sigma_s2, sigma_rec2, order)
}

pub fn rc_pdf(r_c: f64, lambda: f64, sigma_s2: f64, sigma_rec2: f64) -> Result<f64> {
    rc_logpdf(r_c, lambda, sigma_s2, sigma_rec2).map(f64::exp)
}

/// Log density of `(y1, y2)` when both the symbol and the antenna noise are
/// known: a complex Gaussian around `√ρ(√P|h|x + w)` times a real Gaussian
/// around `(1-ρ)|√P|h|x + w|²`.
pub fn cond_joint_logpdf_given_xw(
    y1: ComplexValue,
    y2: f64,
    x: ComplexValue,
    w: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
) -> f64 {
    let u = x * cfg.amplitude() + w;
    ln_complex_normal(y1 - u * cfg.rho.sqrt(), env.sigma_cov2)
        + ln_normal(y2 - (1.0 - cfg.rho) * u.norm_sqr(), env.sigma_rec2)
}

pub fn cond_joint_pdf_given_xw(
    y1: ComplexValue,
    y2: f64,
    x: ComplexValue,
    w: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
) -> f64 {
    cond_joint_logpdf_given_xw(y1, y2, x, w, cfg, env).exp()
}

/// `ln f(y2 | u ~ CN(mean, var))` for `y2 = (1-ρ)|u|² + n`.
fn ln_power_branch_given_gaussian(
    y2: f64,
    mean: ComplexValue,
    var: f64,
    rho: f64,
    sigma_rec2: f64,
    order: usize,
) -> Result<f64> {
    let gain = 1.0 - rho;
    if gain <= 0.0 {
        return Ok(ln_normal(y2, sigma_rec2));
    }
    let conv = ln_conv_ncx2_normal(
        y2 / gain,
        mean.norm_sqr(),
        0.5 * var,
        sigma_rec2 / (gain * gain),
        order,
    )?;
    Ok(conv - gain.ln())
}

/// Log density of `(y1, y2)` given the transmitted symbol, with the antenna
/// noise integrated out.
pub fn cond_joint_logpdf_given_x(
    y1: ComplexValue,
    y2: f64,
    x: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !y1.re.is_finite() || !y1.im.is_finite() || !y2.is_finite() {
        return Err(Error::Input("observation must be finite".into()));
    }
    match quad.kind {
        QuadratureKind::Reduced => {
            let rho = cfg.rho;
            let s = x * cfg.amplitude();
            let t1 = y1 - s * rho.sqrt();
            let coh_var = rho * env.sigma_a2 + env.sigma_cov2;
            // w | (x, y1) ~ CN(mu, tau2)
            let tau2 = env.sigma_a2 * env.sigma_cov2 / coh_var;
            let mu = t1 * (rho.sqrt() * env.sigma_a2 / coh_var);
            Ok(ln_complex_normal(t1, coh_var)
                + ln_power_branch_given_gaussian(y2, s + mu, tau2, rho, env.sigma_rec2, quad.order)?)
        }
        QuadratureKind::GaussHermite2d => {
            let rule = gauss_hermite(quad.order);
            let sa = env.sigma_a2.sqrt();
            let mut terms = Vec::with_capacity(quad.order * quad.order);
            for (tr, lwr) in rule.nodes.iter().zip(&rule.ln_weights) {
                for (ti, lwi) in rule.nodes.iter().zip(&rule.ln_weights) {
                    let w = ComplexValue::new(sa * tr, sa * ti);
                    terms.push(cond_joint_logpdf_given_xw(y1, y2, x, w, cfg, env) + lwr + lwi);
                }
            }
            Ok(log_sum_exp(terms.iter().copied()) - PI.ln())
        }
    }
}

pub fn cond_joint_pdf_given_x(
    y1: ComplexValue,
    y2: f64,
    x: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    quad: &QuadratureSpec,
) -> Result<f64> {
    cond_joint_logpdf_given_x(y1, y2, x, cfg, env, quad).map(f64::exp)
}

/// As [`cond_joint_logpdf_given_x`], but also evaluates at twice the order
/// and fails when the two disagree by more than `1e-6` nats.
pub fn cond_joint_logpdf_given_x_checked(
    y1: ComplexValue,
    y2: f64,
    x: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let base = cond_joint_logpdf_given_x(y1, y2, x, cfg, env, quad)?;
    let fine = cond_joint_logpdf_given_x(y1, y2, x, cfg, env, &quad.doubled())?;
    if (base - fine).abs() > 1e-6 {
        return Err(Error::Numeric(format!(
            "quadrature order {} too small: doubling moved the log-density by {:.3e}",
            quad.order,
            (base - fine).abs()
        )));
    }
    Ok(base)
}

/// Log of the joint output density `f(y1, y2)` under Gaussian input
/// `x ~ CN(0, 1)`.
///
/// With Gaussian input the pre-split signal `u = √P|h|x + w` is
/// `CN(0, P|h|² + σ_A²)` and jointly Gaussian with `y1`, so
/// `f(y1, y2) = f(y1)·f(y2 | y1)` with `u | y1` complex Gaussian.
pub fn joint_logpdf_gaussian_input(
    y1: ComplexValue,
    y2: f64,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (ln_y1, mean, var) = coherent_marginal(y1, cfg, env);
    Ok(ln_y1 + ln_power_branch_given_gaussian(y2, mean, var, cfg.rho, env.sigma_rec2, quad.order)?)
}

/// `ln f(y1)` and the posterior `u | y1 ~ CN(mean, var)` under Gaussian input.
pub(crate) fn coherent_marginal(
    y1: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
) -> (f64, ComplexValue, f64) {
    let rho = cfg.rho;
    let total = cfg.signal_power() + env.sigma_a2;
    let y1_var = rho * total + env.sigma_cov2;
    let mean = y1 * (rho.sqrt() * total / y1_var);
    let var = total * env.sigma_cov2 / y1_var;
    (ln_complex_normal(y1, y1_var), mean, var)
}

/// Posterior of the symbol given only the coherent branch, under Gaussian
/// input: `x | y1 ~ CN(mean, var)`.
pub(crate) fn symbol_posterior(y1: ComplexValue, cfg: &SystemConfig, env: &NoiseEnv) -> (ComplexValue, f64) {
    let a = cfg.rho.sqrt() * cfg.amplitude();
    let noise = cfg.rho * env.sigma_a2 + env.sigma_cov2;
    let denom = a * a + noise;
    (y1 * (a / denom), noise / denom)
}

/// Closed-form likelihood of the low-complexity detector.
///
/// `y2_scaled` is the power branch divided by `√P`. The squared antenna-noise
/// term of that branch is dropped, which leaves `(y1, y2_scaled)` jointly
/// Gaussian given `x`: the coherent residual has variance
/// `S = ρσ_A² + σ_cov²`, and the power residual, conditioned on it, has
/// variance `D/S` with
/// `D = σ_cov²σ_Ns² + 2σ_A²σ_cov²|h|²|x|²(1-ρ)² + ρσ_A²σ_Ns²`,
/// `σ_Ns² = σ_rec²/P`.
#[derive(Debug, Clone)]
pub struct LowComplexityModel {
    sqrt_rho_amp: f64,
    pd_gain: f64,
    coh_var: f64,
    cross: f64,
    d_const: f64,
    d_slope: f64,
}

impl LowComplexityModel {
    pub fn new(cfg: &SystemConfig, env: &NoiseEnv) -> Result<Self> {
        if !(cfg.power > 0.0) {
            return Err(Error::Domain(format!(
                "low-complexity rule needs power > 0, got {}",
                cfg.power
            )));
        }
        let rho = cfg.rho;
        let h = cfg.h_mag;
        let ns2 = env.sigma_rec2 / cfg.power;
        let coh_var = rho * env.sigma_a2 + env.sigma_cov2;
        let d_const = env.sigma_cov2 * ns2 + rho * env.sigma_a2 * ns2;
        let d_slope = 2.0 * env.sigma_a2 * env.sigma_cov2 * h * h * (1.0 - rho).powi(2);
        if !(coh_var > 0.0) || !(d_const > 0.0) {
            return Err(Error::Domain("degenerate low-complexity variances".into()));
        }
        Ok(Self {
            sqrt_rho_amp: rho.sqrt() * cfg.amplitude(),
            pd_gain: (1.0 - rho) * cfg.power.sqrt() * h * h,
            coh_var,
            cross: 2.0 * rho.sqrt() * env.sigma_a2 * (rho - 1.0) * h,
            d_const,
            d_slope,
        })
    }

    /// Per-candidate constants, so detectors can hoist them out of the loop.
    pub fn candidate(&self, x: ComplexValue) -> LowComplexityCandidate {
        let e = x.norm_sqr();
        let d = self.d_const + self.d_slope * e;
        let sd = self.coh_var * d;
        LowComplexityCandidate {
            x,
            y1_mean: x * self.sqrt_rho_amp,
            y2_mean: self.pd_gain * e,
            ln_norm: -0.5 * (2.0 * PI.powi(3) * sd).ln(),
            inv_two_sd: 0.5 / sd,
        }
    }

    pub fn loglik(&self, c: &LowComplexityCandidate, y1: ComplexValue, y2_scaled: f64) -> f64 {
        let t1 = y1 - c.y1_mean;
        let t2 = y2_scaled - c.y2_mean;
        let q = self.cross * (c.x.re * t1.re + c.x.im * t1.im) + self.coh_var * t2;
        c.ln_norm - q * q * c.inv_two_sd - t1.norm_sqr() / self.coh_var
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LowComplexityCandidate {
    x: ComplexValue,
    y1_mean: ComplexValue,
    y2_mean: f64,
    ln_norm: f64,
    inv_two_sd: f64,
}

pub fn lowcomplexity_loglik(
    y1: ComplexValue,
    y2_scaled: f64,
    x: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
) -> Result<f64> {
    let model = LowComplexityModel::new(cfg, env)?;
    Ok(model.loglik(&model.candidate(x), y1, y2_scaled))
}

pub fn lowcomplexity_likelihood(
    y1: ComplexValue,
    y2_scaled: f64,
    x: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
) -> Result<f64> {
    lowcomplexity_loglik(y1, y2_scaled, x, cfg, env).map(f64::exp)
}
