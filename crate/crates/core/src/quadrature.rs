//! Gauss rules, built once per order and cached for the life of the process.

use std::f64::consts::PI;
use std::sync::OnceLock;

pub const MIN_ORDER: usize = 4;
pub const MAX_ORDER: usize = 256;

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ln` of each weight, for log-space sums.
    pub ln_weights: Vec<f64>,
}

impl GaussRule {
    fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let ln_weights = weights.iter().map(|w| w.ln()).collect();
        Self {
            nodes,
            weights,
            ln_weights,
        }
    }
}

static LEGENDRE: [OnceLock<GaussRule>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
static HERMITE: [OnceLock<GaussRule>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];

/// Gauss–Legendre rule on `[-1, 1]`.
///
/// # Panics
/// If `n` is outside `[MIN_ORDER, MAX_ORDER]`.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    assert!((MIN_ORDER..=MAX_ORDER).contains(&n), "order {n} out of range");
    LEGENDRE[n].get_or_init(|| build_legendre(n))
}

/// Gauss–Hermite rule for the weight `e^{-t²}` on the real line.
///
/// # Panics
/// If `n` is outside `[MIN_ORDER, MAX_ORDER]`.
pub fn gauss_hermite(n: usize) -> &'static GaussRule {
    assert!((MIN_ORDER..=MAX_ORDER).contains(&n), "order {n} out of range");
    HERMITE[n].get_or_init(|| build_hermite(n))
}

fn build_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    GaussRule::new(nodes, weights)
}

fn build_hermite(n: usize) -> GaussRule {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let nf = n as f64;
    // Starting values: eigenvalues of the symmetric Jacobi matrix, polished
    // below by Newton steps on the orthonormal recurrence.
    let off: Vec<f64> = (1..n).map(|k| (0.5 * k as f64).sqrt()).collect();
    let mut x = symmetric_tridiagonal_eigenvalues(vec![0.0; n], off);
    x.sort_by(f64::total_cmp);
    let mut w = vec![0.0; n];
    for (z, wi) in x.iter_mut().zip(w.iter_mut()) {
        let mut pp = 0.0;
        for _ in 0..8 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = *z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            *z -= step;
            if step.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        // weight relative to e^{-t²}; the recurrence carries e^{-z²/2}
        *wi = 2.0 / (pp * pp);
    }
    GaussRule::new(x, w)
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL).
fn symmetric_tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 60, "tridiagonal QL did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// `ln Σ exp(v_i)`, returning `-∞` for an empty or all-`-∞` input.
pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}
