//! Equivalent-baseband model of the splitting receiver.
//!
//! The coherent branch sees `y1 = √ρ(√P|h|x + w) + z` and the power branch
//! sees `y2 = (1-ρ)|√P|h|x + w|² + n`. The antenna noise `w` is drawn once
//! and shared by both branches; `z` and `n` are the branch processing noises.
//! The channel phase and the rectifier efficiency are folded into the
//! equivalent signals, so `eta` is carried for bookkeeping only.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_finite, Error, Result};

pub type ComplexValue = Complex64;

/// Noise variances defining an operating condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEnv {
    /// Antenna noise, added before the splitter (total complex variance).
    pub sigma_a2: f64,
    /// Conversion noise of the coherent branch (total complex variance).
    pub sigma_cov2: f64,
    /// Rectifier noise of the power branch (real variance).
    pub sigma_rec2: f64,
}

impl NoiseEnv {
    pub fn new(sigma_a2: f64, sigma_cov2: f64, sigma_rec2: f64) -> Result<Self> {
        for (name, v) in [
            ("sigma_a2", sigma_a2),
            ("sigma_cov2", sigma_cov2),
            ("sigma_rec2", sigma_rec2),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            sigma_a2,
            sigma_cov2,
            sigma_rec2,
        })
    }
}

/// Link parameters: transmit power, channel magnitude, splitting ratio and
/// rectifier efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub power: f64,
    pub h_mag: f64,
    pub rho: f64,
    pub eta: f64,
}

impl SystemConfig {
    /// Unit channel and unit rectifier efficiency.
    pub fn new(power: f64, rho: f64) -> Result<Self> {
        Self::with_channel(power, 1.0, rho, 1.0)
    }

    pub fn with_channel(power: f64, h_mag: f64, rho: f64, eta: f64) -> Result<Self> {
        ensure_finite("power", power)?;
        ensure_finite("h_mag", h_mag)?;
        if power < 0.0 {
            return Err(Error::Domain(format!("power must be >= 0, got {power}")));
        }
        if !(h_mag > 0.0) {
            return Err(Error::Domain(format!("h_mag must be > 0, got {h_mag}")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!("rho must lie in [0, 1], got {rho}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
        }
        Ok(Self {
            power,
            h_mag,
            rho,
            eta,
        })
    }

    /// Same link with a different splitting ratio.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::with_channel(self.power, self.h_mag, rho, self.eta)
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::with_channel(power, self.h_mag, self.rho, self.eta)
    }

    /// Received signal power `P|h|²`.
    pub fn signal_power(&self) -> f64 {
        self.power * self.h_mag * self.h_mag
    }

    /// Received amplitude scale `√P|h|`.
    pub fn amplitude(&self) -> f64 {
        self.power.sqrt() * self.h_mag
    }
}

/// One received observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RxSample {
    /// Coherent branch output.
    pub y1: ComplexValue,
    /// Power branch output.
    pub y2: f64,
}

impl RxSample {
    pub fn is_finite(&self) -> bool {
        self.y1.re.is_finite() && self.y1.im.is_finite() && self.y2.is_finite()
    }
}

/// Seeded random stream. Each `(seed, stream)` pair addresses an independent
/// ChaCha keystream, so a Monte-Carlo run split into chunks draws the same
/// numbers no matter how the chunks are scheduled.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Circular complex Gaussian with the given total variance.
    pub fn complex_normal(&mut self, variance: f64) -> ComplexValue {
        let s = (0.5 * variance).sqrt();
        let re = self.standard_normal();
        let im = self.standard_normal();
        ComplexValue::new(s * re, s * im)
    }
}

/// Draws the transmitted symbol for Gaussian signalling: `CN(0, 1)`.
pub fn sample_gaussian_input(rng: &mut RandomStream) -> ComplexValue {
    rng.complex_normal(1.0)
}

/// Draws one observation of both branches for transmitted symbol `x`.
///
/// Noise is drawn in a fixed order (antenna, conversion, rectifier) that does
/// not depend on the parameters, so sweeps over `rho` or `power` with one
/// seed see common random numbers.
pub fn sample_channel(
    x: ComplexValue,
    cfg: &SystemConfig,
    env: &NoiseEnv,
    rng: &mut RandomStream,
) -> RxSample {
    let w = rng.complex_normal(env.sigma_a2);
    let z = rng.complex_normal(env.sigma_cov2);
    let n = env.sigma_rec2.sqrt() * rng.standard_normal();
    noisy_branches(x, cfg, w, z, n)
}

/// Deterministic branch outputs for given noise realisations.
pub fn noisy_branches(
    x: ComplexValue,
    cfg: &SystemConfig,
    w: ComplexValue,
    z: ComplexValue,
    n: f64,
) -> RxSample {
    let pre_split = x * cfg.amplitude() + w;
    RxSample {
        y1: pre_split * cfg.rho.sqrt() + z,
        y2: (1.0 - cfg.rho) * pre_split.norm_sqr() + n,
    }
}

/// Divides the power branch by `√P`; the coherent branch is untouched.
pub fn scale_y2(s: RxSample, power: f64) -> Result<RxSample> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::Domain(format!("scale_y2 needs power > 0, got {power}")));
    }
    Ok(RxSample {
        y1: s.y1,
        y2: s.y2 / power.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Qam,
    Psk,
    Apsk,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Qam => "QAM",
            Family::Psk => "PSK",
            Family::Apsk => "APSK",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Finite symbol alphabet with unit average energy. Points are addressed by
/// their position in `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<ComplexValue>,
    label: String,
    family: Family,
}

impl Constellation {
    /// Builds a constellation from raw points, rescaling to unit average
    /// energy.
    pub fn from_points(
        points: Vec<ComplexValue>,
        label: impl Into<String>,
        family: Family,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("constellation must not be empty".into()));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::Argument("constellation points must be finite".into()));
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        if !(energy > 0.0) {
            return Err(Error::Argument("constellation has zero energy".into()));
        }
        let scale = energy.sqrt().recip();
        let points: Vec<_> = points.into_iter().map(|p| p * scale).collect();
        for i in 0..points.len() {
            for j in 0..i {
                if (points[i] - points[j]).norm() < 1e-12 {
                    return Err(Error::Argument(format!(
                        "constellation points {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            points,
            label: label.into(),
            family,
        })
    }

    pub fn points(&self) -> &[ComplexValue] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in 0..i {
                best = best.min((self.points[i] - self.points[j]).norm());
            }
        }
        best
    }

    /// Writes `index,re,im` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,re,im")?;
        for (i, p) in self.points.iter().enumerate() {
            writeln!(out, "{i},{:.17e},{:.17e}", p.re, p.im)?;
        }
        Ok(())
    }

    /// Reads the `index,re,im` layout written by [`Constellation::write_csv`].
    /// Lines starting with `#` are ignored; rows may come in any order.
    pub fn read_csv<R: BufRead>(input: R, label: impl Into<String>) -> Result<Self> {
        let mut rows: Vec<(usize, ComplexValue)> = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                saw_header = true;
                if line.replace(' ', "") != "index,re,im" {
                    return Err(Error::Argument(format!(
                        "expected header 'index,re,im', got '{line}'"
                    )));
                }
                continue;
            }
            let fields: Vec<_> = line.split(',').map(str::trim).collect();
            let parse_err = || Error::Argument(format!("bad constellation row {}: '{line}'", lineno + 1));
            if fields.len() != 3 {
                return Err(parse_err());
            }
            let idx: usize = fields[0].parse().map_err(|_| parse_err())?;
            let re: f64 = fields[1].parse().map_err(|_| parse_err())?;
            let im: f64 = fields[2].parse().map_err(|_| parse_err())?;
            rows.push((idx, ComplexValue::new(re, im)));
        }
        rows.sort_by_key(|r| r.0);
        for (expect, (idx, _)) in rows.iter().enumerate() {
            if *idx != expect {
                return Err(Error::Argument(format!(
                    "constellation indices must be 0..M-1, missing {expect}"
                )));
            }
        }
        Self::from_points(rows.into_iter().map(|r| r.1).collect(), label, Family::Custom)
    }
}

/// Rectangular `√M × √M` QAM grid in row-major order (real part varies
/// fastest), normalised to unit average energy.
pub fn make_qam(m: usize) -> Result<Constellation> {
    let side = (m as f64).sqrt().round() as usize;
    if m < 4 || side * side != m {
        return Err(Error::Argument(format!(
            "QAM order must be a perfect square >= 4, got {m}"
        )));
    }
    let half = (side as f64 - 1.0) / 2.0;
    let mut points = Vec::with_capacity(m);
    for row in 0..side {
        for col in 0..side {
            points.push(ComplexValue::new(col as f64 - half, half - row as f64));
        }
    }
    Constellation::from_points(points, format!("{m}-QAM"), Family::Qam)
}

/// `M` points on the unit circle at angles `2πk/M`.
pub fn make_psk(m: usize) -> Result<Constellation> {
    if m < 2 {
        return Err(Error::Argument(format!("PSK order must be >= 2, got {m}")));
    }
    let points = (0..m)
        .map(|k| ComplexValue::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
        .collect();
    Constellation::from_points(points, format!("{m}-PSK"), Family::Psk)
}

/// Concentric rings of uniformly spaced points, rescaled to unit average
/// energy.
pub fn make_apsk(
    ring_counts: &[usize],
    ring_radii: &[f64],
    ring_phases: &[f64],
) -> Result<Constellation> {
    if ring_counts.is_empty()
        || ring_counts.len() != ring_radii.len()
        || ring_counts.len() != ring_phases.len()
    {
        return Err(Error::Argument(
            "ring counts, radii and phases must be non-empty and of equal length".into(),
        ));
    }
    if ring_counts.contains(&0) {
        return Err(Error::Argument("every ring needs at least one point".into()));
    }
    if !(ring_radii[0] > 0.0) || ring_radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument(
            "ring radii must be positive and strictly increasing".into(),
        ));
    }
    let mut points = Vec::new();
    for ((&count, &radius), &phase) in ring_counts.iter().zip(ring_radii).zip(ring_phases) {
        for k in 0..count {
            let angle = phase + 2.0 * PI * k as f64 / count as f64;
            points.push(ComplexValue::from_polar(radius, angle));
        }
    }
    let label = format!(
        "{}-APSK({})",
        points.len(),
        ring_counts
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    Constellation::from_points(points, label, Family::Apsk)
}

/// 32-APSK with rings of 4, 12 and 16 points.
///
/// Preset radii `1 : 2.84 : 5.27` with ring offsets `π/4, π/12, 0`. These are
/// a documented choice for experiments, not values taken from a standard
/// table for a particular code rate.
pub fn apsk32_three_ring() -> Result<Constellation> {
    make_apsk(&[4, 12, 16], &[1.0, 2.84, 5.27], &[PI / 4.0, PI / 12.0, 0.0])
}

/// 32-APSK with rings of 4, 8, 4 and 16 points.
///
/// Preset radii `1 : 2.2 : 2.6 : 4.4`, offsets `π/4, π/8, 0, π/16`. The two
/// middle rings are close in radius; see [`apsk32_three_ring`] for the
/// caveat about presets.
pub fn apsk32_four_ring() -> Result<Constellation> {
    make_apsk(
        &[4, 8, 4, 16],
        &[1.0, 2.2, 2.6, 4.4],
        &[PI / 4.0, PI / 8.0, 0.0, PI / 16.0],
    )
}
