//! Acceptance criteria. Prints one PASS/FAIL line per criterion, with the
//! measured values, and exits non-zero if any criterion fails.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::Instant;

use splitrx::densities::*;
use splitrx::detect::*;
use splitrx::mi::*;
use splitrx::model::*;
use splitrx::specfun::{bessel_i0_scaled, erfc, exp_e1};
use splitrx::{ComplexValue, NoiseEnv, QuadratureSpec};

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, notes: Vec::new() }
    }
}

fn env(a: f64, c: f64, r: f64) -> NoiseEnv {
    NoiseEnv::new(a, c, r).unwrap()
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| ((lo + k as f64 * step) * 1000.0).round() / 1000.0).collect()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

const FIG2_NOISE: [(f64, f64, f64); 3] = [(1.0, 1.0, 1.0), (0.1, 1.0, 1.0), (0.01, 1.0, 1.0)];

fn ac1() -> Outcome {
    let est = EstimatorConfig::new(100_000, 101).unwrap();
    let mut worst = (0.0f64, String::new());
    let mut pass = true;
    for &(a, c, r) in &FIG2_NOISE {
        for &p in &[10.0, 100.0, 1000.0] {
            let cfg = SystemConfig::new(p, 1.0).unwrap();
            let n = env(a, c, r);
            let mc = mi_split_mc(&cfg, &n, &est, MiMethod::Plugin).unwrap();
            let cf = mi_cd_closed_form(&cfg, &n).bits;
            let diff = (mc.bits - cf).abs();
            pass &= diff <= 0.05f64.max(2.0 * mc.std_err);
            if diff >= worst.0 {
                worst = (diff, format!("σA²={a} P={p}: mc {:.4} vs {:.4}", mc.bits, cf));
            }
        }
    }
    Outcome::new(pass, format!("9 configs, max |Δ| = {:.4} bits ({}); tol max(0.05, 2·se)", worst.0, worst.1))
}

fn ac2() -> Outcome {
    let est = EstimatorConfig::new(100_000, 102).unwrap();
    let mut worst = (0.0f64, String::new());
    for &a in &[1.0, 0.1, 0.01] {
        let n = env(a, 1.0, 1.0);
        for &p in &[100.0, 1000.0] {
            for &rho in &[0.3, 0.5, 0.7, 0.9] {
                let cfg = SystemConfig::new(p, rho).unwrap();
                let mc = mi_split_mc(&cfg, &n, &est, MiMethod::Plugin).unwrap();
                let ap = mi_split_approx(&cfg, &n).unwrap().bits;
                let diff = (mc.bits - ap).abs();
                if diff >= worst.0 {
                    worst = (diff, format!("σA²={a} P={p} ρ={rho}: mc {:.4}±{:.4} vs {:.4}", mc.bits, mc.std_err, ap));
                }
            }
        }
    }
    Outcome::new(worst.0 < 0.15, format!("24 configs, max |Δ| = {:.4} bits ({}); tol 0.15", worst.0, worst.1))
}

fn ac3() -> Outcome {
    let est = EstimatorConfig::new(100_000, 103).unwrap();
    let cfg = SystemConfig::new(100.0, 1.0).unwrap();
    let r1 = gain(&cfg, &env(0.01, 1.0, 1.0), &est, 0.02).unwrap();
    let r3 = gain(&cfg, &env(0.01, 1.0, 0.01), &est, 0.02).unwrap();
    let pass = (r1.rho_star - 0.44).abs() <= 0.05
        && (r1.g_mi - 1.69).abs() <= 0.10
        && (r1.g_mi_pct - 25.4).abs() <= 2.0
        && (r3.g_mi_pct - 44.2).abs() <= 3.0;
    Outcome::new(
        pass,
        format!(
            "σrec²=1: ρ*={:.3} (0.44±0.05) G={:.3} (1.69±0.10) G%={:.2} (25.4±2.0); σrec²=0.01: ρ*={:.3} G={:.3} G%={:.2} (44.2±3.0)",
            r1.rho_star, r1.g_mi, r1.g_mi_pct, r3.rho_star, r3.g_mi, r3.g_mi_pct
        ),
    )
}

fn ac4() -> Outcome {
    let want = [3.33, 1.73, 0.50];
    let got: Vec<f64> = [(0.01, 1.0, 1.0), (0.1, 1.0, 1.0), (1.0, 1.0, 1.0)]
        .iter()
        .map(|&(a, c, r)| asymptotic_gain(&env(a, c, r)).unwrap())
        .collect();
    let table_ok = got.iter().zip(want).all(|(g, w)| ((g * 100.0).round() / 100.0 - w).abs() < 1e-9);

    let n = env(0.01, 1.0, 1.0);
    let gap_at = |p: f64| {
        let cfg = SystemConfig::new(p, 0.999).unwrap();
        mi_split_approx(&cfg, &n).unwrap().bits - mi_cd_closed_form(&cfg, &n).bits
    };
    let gap = gap_at(1e7);
    let gap_ok = (gap - 3.33).abs() <= 0.1;
    let mut out = Outcome::new(
        table_ok && gap_ok,
        format!(
            "asymptotic gains {:.4}/{:.4}/{:.4} (3.33/1.73/0.50) {}; approx(ρ=0.999) − CD at P=1e7 = {:.4} (3.33±0.1) {}",
            got[0],
            got[1],
            got[2],
            if table_ok { "ok" } else { "off" },
            gap,
            if gap_ok { "ok" } else { "off" }
        ),
    );
    out.notes.push(format!(
        "same gap at P=1e8/1e9/1e10: {:.3}/{:.3}/{:.3}; at ρ=0.999, (1−ρ)²·P·σA² = {:.2} at P=1e7, so the high-power regime is not reached",
        gap_at(1e8),
        gap_at(1e9),
        gap_at(1e10),
        1e-6 * 1e7 * 0.01
    ));
    out
}

fn ac5() -> Outcome {
    let c = make_qam(64).unwrap();
    let cfg = SystemConfig::new(200.0, 0.8).unwrap();
    let n = env(0.1, 1.0, 1.0);
    let ml = MlDetector::new(&c, &cfg, &n, QuadratureSpec::default());
    let fast = FastDetector::new(&c, &cfg, &n).unwrap();
    let mut rng = RandomStream::new(105, 0);
    let trials = 100_000;
    let mut agree = 0;
    for _ in 0..trials {
        let k = rng.index(c.len());
        let rx = sample_channel(c.points()[k], &cfg, &n, &mut rng);
        if ml.detect(&rx).unwrap() == fast.detect(&scale_y2(rx, cfg.power).unwrap()).unwrap() {
            agree += 1;
        }
    }
    let rate = agree as f64 / trials as f64;
    Outcome::new(rate >= 0.999, format!("agreement {agree}/{trials} = {:.4}% (≥ 99.9%)", 100.0 * rate))
}

/// Coarse `0.05` grid, then a `0.01` grid around its minimiser.
fn min_ser(c: &Constellation, cfg: &SystemConfig, n: &NoiseEnv, symbols: usize, seed: u64) -> (f64, f64, f64) {
    let det = DetectorKind::LowComplexity;
    let coarse = ser_optimal_rho(c, cfg, n, det, symbols, seed, &default_rho_grid()).unwrap();
    let fine = ser_optimal_rho(c, cfg, n, det, symbols, seed, &refine_rho_grid(coarse.rho_star)).unwrap();
    let best = if fine.ser_min < coarse.ser_min { &fine } else { &coarse };
    let at_one = coarse.curve.last().unwrap().ser;
    (best.rho_star, best.ser_min, at_one)
}

fn ac6() -> Outcome {
    let c = make_qam(64).unwrap();
    let cfg = SystemConfig::new(200.0, 1.0).unwrap();
    let (rb, sb, s1) = min_ser(&c, &cfg, &env(0.1, 1.0, 1.0), 1_000_000, 106);
    let (ra, sa, s1a) = min_ser(&c, &cfg, &env(1.0, 1.0, 1.0), 1_000_000, 106);
    let pass = (1e-3..=4e-3).contains(&sb)
        && (4e-3..=9e-3).contains(&s1)
        && (2e-2..=4e-2).contains(&sa)
        && (4e-2..=7e-2).contains(&s1a);
    Outcome::new(
        pass,
        format!(
            "σA²=0.1: min SER {sb:.3e} at ρ={rb} ([1,4]e-3), ρ=1 {s1:.3e} ([4,9]e-3); σA²=1: min {sa:.3e} at ρ={ra} ([2,4]e-2), ρ=1 {s1a:.3e} ([4,7]e-2); 1e6 symbols/point"
        ),
    )
}

fn ac7() -> Outcome {
    let c = make_qam(64).unwrap();
    let n = env(0.1, 1.0, 1.0);
    let rhos = grid(0.7, 1.0, 0.02);
    let (mut cd, mut split) = (Vec::new(), Vec::new());
    for i in 0..=14 {
        let db = 20.0 + 0.25 * i as f64;
        let cfg = SystemConfig::new(10f64.powf(db / 10.0), 1.0).unwrap();
        let s = ser_optimal_rho(&c, &cfg, &n, DetectorKind::LowComplexity, 200_000, 107, &rhos).unwrap();
        cd.push(s.curve.last().unwrap().clone());
        split.push(s.curve.iter().find(|r| r.rho == s.rho_star).unwrap().clone());
    }
    match (power_for_target_ser(&cd, 1e-2), power_for_target_ser(&split, 1e-2)) {
        (Some(a), Some(b)) => {
            let gap = a - b;
            Outcome::new(
                (gap - 1.2).abs() <= 0.3,
                format!("SER 1e-2 at {a:.3} dB (ρ=1) vs {b:.3} dB (best ρ): gap {gap:.3} dB (1.2±0.3)"),
            )
        }
        _ => Outcome::new(false, "a curve never crossed SER 1e-2 on the 20–23.5 dB grid".into()),
    }
}

fn ac8() -> Outcome {
    let c = make_psk(8).unwrap();
    let cfg = SystemConfig::new(100.0, 1.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for &(a, cv, r) in &[(1.0, 1.0, 1.0), (0.1, 4.0, 1.0)] {
        let s = ser_optimal_rho(&c, &cfg, &env(a, cv, r), DetectorKind::LowComplexity, 1_000_000, 108, &default_rho_grid())
            .unwrap();
        let at_one = s.curve.last().unwrap();
        pass &= s.rho_star >= 0.95 && at_one.errors > 0;
        parts.push(format!("noise ({a},{cv},{r}): ρ*={} SER(1)={:.3e}", s.rho_star, at_one.ser));
    }
    Outcome::new(pass, format!("{}; grid step 0.05", parts.join("; ")))
}

fn ac9() -> Outcome {
    let mut fails = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            fails.push(name.to_string());
        }
    };
    let rel = |a: f64, b: f64| ((a - b) / b).abs();

    // special functions against 40-digit references
    check("erfc", rel(erfc(0.5).unwrap(), 0.479_500_122_186_953_5) < 1e-10);
    for (x, want) in [
        (1e-8, 17.843_465_267_485_484),
        (0.021, 3.377_086_799_265_675),
        (1.0, 0.596_347_362_323_194_1),
        (5.0, 0.170_422_176_284_732_2),
        (100.0, 0.009_901_942_286_733_018),
    ] {
        check("exp_e1", rel(exp_e1(x).unwrap(), want) < 1e-10);
    }
    for (x, want) in [(0.5, 0.645_035_270_449_150_1), (3.75, 0.214_457_051_230_048_7), (50.0, 0.056_561_626_647_454_19)] {
        check("bessel_i0_scaled", rel(bessel_i0_scaled(x).unwrap(), want) < 1e-10);
    }

    // normalisation
    let one = |v: f64, tol: f64| (v - 1.0).abs() < tol;
    check("emg", one(simpson(|y| emg_pdf(y, 0.5, 1.0, 0.5, 1.0).unwrap(), -15.0, 60.0, 20_000), 1e-8));
    check("ncx2", one(simpson(|r| ncx2_pdf(r, 4.0, 0.5).unwrap(), 0.0, 80.0, 40_000), 1e-6));
    check("rc", one(simpson(|y| rc_pdf(y, 2.0, 0.5, 0.3).unwrap(), -6.0, 40.0, 8_000), 1e-6));
    {
        let cfg = SystemConfig::new(10.0, 0.5).unwrap();
        let n = env(1.0, 1.0, 1.0);
        let x = ComplexValue::new(0.6, 0.5);
        let quad = QuadratureSpec::default();
        let centre = x * (cfg.rho.sqrt() * cfg.amplitude());
        let half = 9.0 * ((cfg.rho * n.sigma_a2 + n.sigma_cov2) / 2.0).sqrt();
        let m = 64;
        let h = 2.0 * half / (m - 1) as f64;
        let hi = (1.0 - cfg.rho) * (x.norm() * cfg.amplitude() + 7.0).powi(2) + 8.0;
        let mut total = 0.0;
        for i in 0..m {
            for j in 0..m {
                let y1 = centre + ComplexValue::new(-half + i as f64 * h, -half + j as f64 * h);
                total += h * h * simpson(|y2| cond_joint_pdf_given_x(y1, y2, x, &cfg, &n, &quad).unwrap(), -8.0, hi, 300);
            }
        }
        check("given_x", one(total, 1e-4));
    }

    // λ = 0 identity
    for &(s, v, a) in &[(0.5, 1.0, 0.2), (5.0, 0.1, 1.0), (50.0, 2.0, 10.0)] {
        for k in 0..=40 {
            let y = -3.0 + k as f64 * (8.0 * s) / 40.0;
            let rc = rc_pdf(y, 0.0, s, v).unwrap();
            let emg = emg_pdf(y, 2.0 * s - a, 1.0, a, v).unwrap();
            check("rc=emg", (rc - emg).abs() <= 1e-4 * emg.max(1e-12));
        }
    }

    // histogram entropies of Gaussians
    let mut rng = RandomStream::new(109, 0);
    let real: Vec<f64> = (0..1_000_000).map(|_| rng.standard_normal()).collect();
    check("h1", (entropy_histogram(&real, 1, 80).unwrap() - 0.5 * (2.0 * PI * E).log2()).abs() < 0.03);
    let cplx: Vec<f64> = (0..1_000_000)
        .flat_map(|_| {
            let z = rng.complex_normal(1.0);
            [z.re, z.im]
        })
        .collect();
    check("h2", (entropy_histogram(&cplx, 2, 80).unwrap() - (PI * E).log2()).abs() < 0.05);

    let pass = fails.is_empty();
    let detail = if pass {
        "special functions (1e-10 rel), emg/ncx2/rc/given-x normalisation, rc↔emg at λ=0 (1e-4), Gaussian histogram entropies".into()
    } else {
        format!("failed: {}", fails.join(", "))
    };
    Outcome::new(pass, detail)
}

fn ac10() -> Outcome {
    let run = || {
        let n = env(0.1, 1.0, 1.0);
        let cfg = SystemConfig::new(50.0, 0.6).unwrap();
        let est = EstimatorConfig::new(20_000, 110).unwrap();
        let c = make_qam(16).unwrap();
        let mut v = Vec::new();
        for m in [MiMethod::Plugin, MiMethod::Histogram] {
            v.push(mi_split_mc(&cfg, &n, &est, m).unwrap().bits);
        }
        v.push(mi_split_mc(&cfg, &n, &est.clone().with_inner_samples(8), MiMethod::Plugin).unwrap().bits);
        v.push(mi_pd_numeric(&cfg, &n, &est).unwrap().bits);
        let g = gain(&cfg, &n, &est, 0.1).unwrap();
        v.extend([g.rho_star, g.mi_at_star]);
        for det in [DetectorKind::LowComplexity, DetectorKind::Ml(QuadratureSpec::default()), DetectorKind::NearestNeighborCd] {
            v.push(ser_monte_carlo(&c, &cfg, &n, det, 10_000, 110).unwrap().ser);
        }
        let s = ser_optimal_rho(&c, &cfg, &n, DetectorKind::LowComplexity, 5_000, 110, &[0.5, 0.8, 1.0]).unwrap();
        v.extend(s.curve.iter().map(|r| r.ser));
        v.into_iter().map(f64::to_bits).collect::<Vec<u64>>()
    };
    let pool = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
    let one = pool(1).install(run);
    let four = pool(4).install(run);
    let pass = one == four;
    Outcome::new(
        pass,
        format!("{} outputs from every Monte-Carlo entry point, 1 vs 4 threads: {}", one.len(), if pass { "bit-identical" } else { "differ" }),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1", "plug-in MI at ρ=1 vs closed form", ac1),
        ("AC2", "approximation vs Monte-Carlo MI", ac2),
        ("AC3", "best split and gain at P=100, σA²=0.01", ac3),
        ("AC4", "high-power limits", ac4),
        ("AC5", "fast vs ML detector agreement", ac5),
        ("AC6", "64-QAM SER at P=200", ac6),
        ("AC7", "power gap at SER 1e-2", ac7),
        ("AC8", "8-PSK best split is ρ=1", ac8),
        ("AC9", "density and special-function suite", ac9),
        ("AC10", "determinism across thread counts", ac10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| id == p) {
            continue;
        }
        let t = Instant::now();
        let out = f();
        println!(
            "{id} {name}: {} [{:.1} s] {}",
            if out.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            out.detail
        );
        for n in out.notes {
            println!("    note: {n}");
        }
        if !out.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
