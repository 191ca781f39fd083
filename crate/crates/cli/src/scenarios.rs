//! One function per subcommand. Each resolves its settings, runs the
//! library, and writes `#` metadata lines followed by a CSV table.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;
use splitrx::detect::{
    default_rho_grid, power_for_target_ser, ser_optimal_rho, FastDetector, MlDetector,
    NearestNeighborDetector,
};
use splitrx::mi::{gain, mi_cd_closed_form, mi_split_approx, mi_split_mc, MiEstimate, MiMethod};
use splitrx::model::{sample_channel, scale_y2, RandomStream, SystemConfig};

use crate::settings::{Method, Settings};
use crate::CliError;

fn open(s: &Settings) -> Result<Box<dyn Write>, CliError> {
    Ok(match &s.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Config(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Writes the metadata block, then every row under a header.
fn emit<R: Serialize>(
    s: &Settings,
    scenario: &str,
    echo: &Settings,
    rows: &[R],
) -> Result<(), CliError> {
    let mut out = open(s)?;
    writeln!(out, "# splitrx {} {scenario}", env!("CARGO_PKG_VERSION"))?;
    out.write_all(echo.echo().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn grid_text(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// The settings each scenario actually used, defaults filled in.
fn resolved(s: &Settings, powers: &[f64], rhos: Option<&[f64]>) -> Result<Settings, CliError> {
    let env = s.noise()?;
    Ok(Settings {
        power: powers.to_vec(),
        rho_grid: rhos.map(grid_text),
        sigma_a2: Some(env.sigma_a2),
        sigma_cov2: Some(env.sigma_cov2),
        sigma_rec2: Some(env.sigma_rec2),
        seed: Some(s.seed.unwrap_or(0)),
        ..Default::default()
    })
}

#[derive(Serialize)]
struct MiRow {
    power: f64,
    rho: f64,
    sigma_a2: f64,
    sigma_cov2: f64,
    sigma_rec2: f64,
    mi_bits: f64,
    std_err: f64,
    method: String,
    warning: String,
}

pub fn mi_sweep(s: Settings) -> Result<(), CliError> {
    let powers = s.powers(&[100.0])?;
    let rhos = s.rhos(&default_rho_grid())?;
    let env = s.noise()?;
    let method = s.method.unwrap_or(Method::Plugin);
    let est = match method {
        Method::Histogram | Method::Plugin => Some(s.estimator()?),
        _ => None,
    };
    if method == Method::Closed && rhos.iter().any(|r| *r != 1.0) {
        return Err(CliError::Config(
            "method 'closed' is the coherent-only formula; use --rho 1".into(),
        ));
    }
    let mut rows = Vec::new();
    for &p in &powers {
        for &rho in &rhos {
            let cfg = SystemConfig::new(p, rho)?;
            let e: MiEstimate = match method {
                Method::Closed => mi_cd_closed_form(&cfg, &env),
                Method::Approx => mi_split_approx(&cfg, &env)?,
                m => mi_split_mc(&cfg, &env, est.as_ref().unwrap(), MiMethod::from(m))?,
            };
            if let Some(w) = &e.warning {
                eprintln!("warning: P={p} rho={rho}: {w}");
            }
            rows.push(MiRow {
                power: p,
                rho,
                sigma_a2: env.sigma_a2,
                sigma_cov2: env.sigma_cov2,
                sigma_rec2: env.sigma_rec2,
                mi_bits: e.bits,
                std_err: e.std_err,
                method: e.method.to_string(),
                warning: e.warning.unwrap_or_default(),
            });
        }
    }
    let mut echo = resolved(&s, &powers, Some(&rhos))?;
    echo.method = Some(method);
    if let Some(est) = &est {
        echo.samples = Some(est.n_samples);
        echo.bins = Some(est.bins_per_dim);
        echo.inner_samples = Some(est.inner_samples);
        echo.quad_order = Some(est.quad.order);
    }
    emit(&s, "mi-sweep", &echo, &rows)?;
    eprintln!("mi-sweep: {} rows", rows.len());
    Ok(())
}

#[derive(Serialize)]
struct GainRow {
    power: f64,
    sigma_a2: f64,
    sigma_cov2: f64,
    sigma_rec2: f64,
    rho_star: f64,
    g_mi: f64,
    g_mi_pct: f64,
    mi_at_0: f64,
    mi_at_1: f64,
    mi_at_star: f64,
    std_err: f64,
    warning: String,
}

pub fn mi_gain_table(s: Settings) -> Result<(), CliError> {
    let powers = s.powers(&[100.0])?;
    let env = s.noise()?;
    let est = s.estimator()?;
    let step = s.rho_step.unwrap_or(0.02);
    let mut rows = Vec::new();
    for &p in &powers {
        let r = gain(&SystemConfig::new(p, 1.0)?, &env, &est, step)?;
        eprintln!(
            "P={p}: rho*={:.3} G={:.3} bits ({:.1}%)",
            r.rho_star, r.g_mi, r.g_mi_pct
        );
        rows.push(GainRow {
            power: p,
            sigma_a2: env.sigma_a2,
            sigma_cov2: env.sigma_cov2,
            sigma_rec2: env.sigma_rec2,
            rho_star: r.rho_star,
            g_mi: r.g_mi,
            g_mi_pct: r.g_mi_pct,
            mi_at_0: r.mi_at_0,
            mi_at_1: r.mi_at_1,
            mi_at_star: r.mi_at_star,
            std_err: r.std_err,
            warning: r.warnings.join("; "),
        });
    }
    let mut echo = resolved(&s, &powers, None)?;
    echo.rho_step = Some(step);
    echo.samples = Some(est.n_samples);
    echo.inner_samples = Some(est.inner_samples);
    echo.quad_order = Some(est.quad.order);
    emit(&s, "mi-gain-table", &echo, &rows)
}

#[derive(Serialize)]
struct SerRhoRow {
    power: f64,
    rho: f64,
    ser: f64,
    ci95: f64,
    errors: usize,
    n_symbols: usize,
    detector: String,
    constellation: String,
}

const DEFAULT_SYMBOLS: usize = 1_000_000;

fn ser_echo(s: &Settings, powers: &[f64], rhos: &[f64], n: usize) -> Result<Settings, CliError> {
    let mut echo = resolved(s, powers, Some(rhos))?;
    echo.samples = Some(n);
    echo.constellation = Some(s.constellation.clone().unwrap_or_else(|| "qam64".into()));
    echo.detector = Some(s.detector.unwrap_or(crate::settings::Detector::Fast));
    if echo.detector == Some(crate::settings::Detector::Ml) {
        echo.quad_order = Some(s.quad()?.order);
    }
    Ok(echo)
}

pub fn ser_sweep_rho(s: Settings) -> Result<(), CliError> {
    let powers = s.powers(&[200.0])?;
    let rhos = s.rhos(&default_rho_grid())?;
    let env = s.noise()?;
    let c = s.constellation()?;
    let det = s.detector_kind()?;
    let n = s.samples.unwrap_or(DEFAULT_SYMBOLS);
    let seed = s.seed.unwrap_or(0);
    let mut rows = Vec::new();
    for &p in &powers {
        let r = ser_optimal_rho(&c, &SystemConfig::new(p, 1.0)?, &env, det, n, seed, &rhos)?;
        eprintln!("P={p}: rho*={} SER={:.4e}", r.rho_star, r.ser_min);
        rows.extend(r.curve.into_iter().map(|x| SerRhoRow {
            power: p,
            rho: x.rho,
            ser: x.ser,
            ci95: x.ci95,
            errors: x.errors,
            n_symbols: x.n_symbols,
            detector: det.to_string(),
            constellation: c.label().to_string(),
        }));
    }
    emit(
        &s,
        "ser-sweep-rho",
        &ser_echo(&s, &powers, &rhos, n)?,
        &rows,
    )
}

#[derive(Serialize)]
struct SerPowerRow {
    power_db: f64,
    receiver: &'static str,
    rho: f64,
    ser: f64,
    ci95: f64,
    errors: usize,
    n_symbols: usize,
    detector: String,
    constellation: String,
}

pub fn ser_sweep_power(s: Settings) -> Result<(), CliError> {
    let default_powers: Vec<f64> = (0..=16)
        .map(|k| 10f64.powf((20.0 + 0.25 * k as f64) / 10.0))
        .collect();
    let powers = s.powers(&default_powers)?;
    if powers.iter().any(|p| *p <= 0.0) {
        return Err(CliError::Config("ser-sweep-power needs power > 0".into()));
    }
    let default_rhos: Vec<f64> = (0..=15)
        .map(|k| ((0.7 + 0.02 * k as f64) * 100.0).round() / 100.0)
        .collect();
    let mut rhos = s.rhos(&default_rhos)?;
    if !rhos.contains(&1.0) {
        rhos.push(1.0);
    }
    let env = s.noise()?;
    let c = s.constellation()?;
    let det = s.detector_kind()?;
    let n = s.samples.unwrap_or(DEFAULT_SYMBOLS);
    let seed = s.seed.unwrap_or(0);
    let target = s.target_ser.unwrap_or(1e-2);
    let (mut cd, mut split, mut rows) = (Vec::new(), Vec::new(), Vec::new());
    for &p in &powers {
        let r = ser_optimal_rho(&c, &SystemConfig::new(p, 1.0)?, &env, det, n, seed, &rhos)?;
        let one = r.curve.iter().find(|x| x.rho == 1.0).unwrap().clone();
        let best = r
            .curve
            .iter()
            .find(|x| x.rho == r.rho_star)
            .unwrap()
            .clone();
        for (receiver, x) in [("cd", &one), ("split", &best)] {
            rows.push(SerPowerRow {
                power_db: x.power_db(),
                receiver,
                rho: x.rho,
                ser: x.ser,
                ci95: x.ci95,
                errors: x.errors,
                n_symbols: x.n_symbols,
                detector: det.to_string(),
                constellation: c.label().to_string(),
            });
        }
        cd.push(one);
        split.push(best);
    }
    match (
        power_for_target_ser(&cd, target),
        power_for_target_ser(&split, target),
    ) {
        (Some(a), Some(b)) => eprintln!(
            "SER {target:e}: {a:.3} dB at rho=1, {b:.3} dB with the best split, gap {:.3} dB",
            a - b
        ),
        _ => eprintln!("SER {target:e} is not crossed by both curves on this power grid"),
    }
    let mut echo = ser_echo(&s, &powers, &rhos, n)?;
    echo.target_ser = Some(target);
    emit(&s, "ser-sweep-power", &echo, &rows)
}

#[derive(Serialize)]
struct DemoRow {
    trial: usize,
    sent: usize,
    y1_re: f64,
    y1_im: f64,
    y2: f64,
    ml: usize,
    fast: usize,
    nn_cd: usize,
}

pub fn detect_demo(s: Settings) -> Result<(), CliError> {
    let powers = s.powers(&[200.0])?;
    let p = powers[0];
    if p <= 0.0 {
        return Err(CliError::Config("detect-demo needs power > 0".into()));
    }
    let rho = s.rhos(&[0.8])?[0];
    let env = s.noise()?;
    let c = s.constellation()?;
    let cfg = SystemConfig::new(p, rho)?;
    let quad = s.quad()?;
    let ml = MlDetector::new(&c, &cfg, &env, quad);
    let fast = FastDetector::new(&c, &cfg, &env)?;
    let nn = NearestNeighborDetector::new(&c, &cfg);
    let n = s.samples.unwrap_or(12);
    let seed = s.seed.unwrap_or(0);
    let mut rng = RandomStream::new(seed, 0);
    let mut rows = Vec::with_capacity(n);
    for trial in 0..n {
        let sent = rng.index(c.len());
        let rx = sample_channel(c.points()[sent], &cfg, &env, &mut rng);
        rows.push(DemoRow {
            trial,
            sent,
            y1_re: rx.y1.re,
            y1_im: rx.y1.im,
            y2: rx.y2,
            ml: ml.detect(&rx)?,
            fast: fast.detect(&scale_y2(rx, p)?)?,
            nn_cd: nn.detect(rx.y1)?,
        });
    }
    let mut echo = resolved(&s, &[p], Some(&[rho]))?;
    echo.samples = Some(n);
    echo.constellation = Some(s.constellation.clone().unwrap_or_else(|| "qam64".into()));
    echo.quad_order = Some(quad.order);
    emit(&s, "detect-demo", &echo, &rows)?;
    let wrong = |f: fn(&DemoRow) -> usize| rows.iter().filter(|r| f(r) != r.sent).count();
    eprintln!(
        "{n} symbols: errors ml {} fast {} nn-cd {}",
        wrong(|r| r.ml),
        wrong(|r| r.fast),
        wrong(|r| r.nn_cd)
    );
    Ok(())
}
