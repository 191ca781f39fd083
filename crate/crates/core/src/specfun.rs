//! Special functions used by the receiver densities and the high-SNR
//! mutual-information approximation.
//!
//! `E1` here is the exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt`, whose
//! power series is `-γ - ln x - Σ_{n≥1} (-x)^n / (n·n!)`. Every formula that
//! needs it consumes the scaled product `e^x·E1(x)`, which is finite and
//! smooth for all `x > 0`.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CUTOFF_E1: f64 = 1.0;
const SERIES_CUTOFF_I0: f64 = 25.0;

/// Complementary error function.
pub fn erfc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("erfc: argument must be finite, got {x}")));
    }
    Ok(libm::erfc(x))
}

/// `ln erfc(x)`, finite for every finite `x` (the plain product underflows
/// past x ≈ 26.5).
pub fn ln_erfc(x: f64) -> f64 {
    if x < 5.0 {
        return libm::erfc(x).ln();
    }
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut t = x;
    for k in (1..=60).rev() {
        t = x + 0.5 * k as f64 / t;
    }
    -x * x - 0.5 * std::f64::consts::PI.ln() - t.ln()
}

/// Scaled exponential integral `e^x·E1(x)` for `x > 0`.
pub fn exp_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("exp_e1: need finite x > 0, got {x}")));
    }
    Ok(exp_e1_unchecked(x))
}

pub(crate) fn exp_e1_unchecked(x: f64) -> f64 {
    if x <= SERIES_CUTOFF_E1 {
        // Σ_{n≥1} (-x)^n / (n·n!)
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..200 {
            term *= -x / n as f64;
            let contrib = term / n as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        (-EULER_GAMMA - x.ln() - sum) * x.exp()
    } else {
        // Modified Lentz evaluation of the continued fraction
        // E1(x) = e^{-x} / (x + 1 - 1²/(x + 3 - 2²/(x + 5 - ...)))
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// `e^{-x}·I0(x)` for `x ≥ 0`, where `I0` is the zeroth-order modified
/// Bessel function of the first kind.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_i0_scaled: need finite x >= 0, got {x}"
        )));
    }
    Ok(bessel_i0_scaled_unchecked(x))
}

pub(crate) fn bessel_i0_scaled_unchecked(x: f64) -> f64 {
    if x <= SERIES_CUTOFF_I0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let eight_x = 8.0 * x;
        for k in 1..40 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (kf * eight_x);
            if next < 1e-17 * sum || next > term {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}
