//! Python bindings. Monte-Carlo entry points release the GIL while they run.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use splitrx::detect::{self as det, DetectorKind, SerResult};
use splitrx::mi::{self, EstimatorConfig, MiEstimate, MiMethod};
use splitrx::model::{self, RandomStream, RxSample};
use splitrx::{densities, specfun, ComplexValue as Complex64, QuadratureSpec};

fn err(e: splitrx::Error) -> PyErr {
    match e {
        splitrx::Error::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        splitrx::Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for splitrx::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn quad(order: usize) -> PyResult<QuadratureSpec> {
    QuadratureSpec::reduced(order).py()
}

#[pyclass(name = "NoiseEnv", module = "splitrx", frozen, from_py_object)]
#[derive(Clone)]
struct PyNoiseEnv(splitrx::NoiseEnv);

#[pymethods]
impl PyNoiseEnv {
    #[new]
    fn new(sigma_a2: f64, sigma_cov2: f64, sigma_rec2: f64) -> PyResult<Self> {
        Ok(Self(splitrx::NoiseEnv::new(sigma_a2, sigma_cov2, sigma_rec2).py()?))
    }

    #[getter]
    fn sigma_a2(&self) -> f64 {
        self.0.sigma_a2
    }

    #[getter]
    fn sigma_cov2(&self) -> f64 {
        self.0.sigma_cov2
    }

    #[getter]
    fn sigma_rec2(&self) -> f64 {
        self.0.sigma_rec2
    }

    fn __repr__(&self) -> String {
        format!("NoiseEnv({}, {}, {})", self.0.sigma_a2, self.0.sigma_cov2, self.0.sigma_rec2)
    }
}

#[pyclass(name = "SystemConfig", module = "splitrx", frozen, from_py_object)]
#[derive(Clone)]
struct PySystemConfig(splitrx::SystemConfig);

#[pymethods]
impl PySystemConfig {
    #[new]
    #[pyo3(signature = (power, rho, h_mag = 1.0, eta = 1.0))]
    fn new(power: f64, rho: f64, h_mag: f64, eta: f64) -> PyResult<Self> {
        Ok(Self(splitrx::SystemConfig::with_channel(power, h_mag, rho, eta).py()?))
    }

    fn with_rho(&self, rho: f64) -> PyResult<Self> {
        Ok(Self(self.0.with_rho(rho).py()?))
    }

    fn with_power(&self, power: f64) -> PyResult<Self> {
        Ok(Self(self.0.with_power(power).py()?))
    }

    #[getter]
    fn power(&self) -> f64 {
        self.0.power
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho
    }

    #[getter]
    fn h_mag(&self) -> f64 {
        self.0.h_mag
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.0.eta
    }

    fn __repr__(&self) -> String {
        format!("SystemConfig(power={}, rho={}, h_mag={})", self.0.power, self.0.rho, self.0.h_mag)
    }
}

#[pyclass(name = "Constellation", module = "splitrx", frozen, from_py_object)]
#[derive(Clone)]
struct PyConstellation(splitrx::Constellation);

#[pymethods]
impl PyConstellation {
    /// Custom point set; normalised to unit average energy.
    #[new]
    #[pyo3(signature = (points, label = "custom".to_string()))]
    fn new(points: Vec<Complex64>, label: String) -> PyResult<Self> {
        Ok(Self(splitrx::Constellation::from_points(points, label, splitrx::Family::Custom).py()?))
    }

    #[staticmethod]
    fn qam(m: usize) -> PyResult<Self> {
        Ok(Self(model::make_qam(m).py()?))
    }

    #[staticmethod]
    fn psk(m: usize) -> PyResult<Self> {
        Ok(Self(model::make_psk(m).py()?))
    }

    #[staticmethod]
    fn apsk32_three_ring() -> PyResult<Self> {
        Ok(Self(model::apsk32_three_ring().py()?))
    }

    #[staticmethod]
    fn apsk32_four_ring() -> PyResult<Self> {
        Ok(Self(model::apsk32_four_ring().py()?))
    }

    #[getter]
    fn points(&self) -> Vec<Complex64> {
        self.0.points().to_vec()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    fn average_energy(&self) -> f64 {
        self.0.average_energy()
    }

    fn min_distance(&self) -> f64 {
        self.0.min_distance()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Constellation('{}', {} points)", self.0.label(), self.0.len())
    }
}

#[pyclass(name = "MiEstimate", module = "splitrx", frozen, get_all)]
struct PyMiEstimate {
    bits: f64,
    std_err: f64,
    method: String,
    warning: Option<String>,
}

impl From<MiEstimate> for PyMiEstimate {
    fn from(e: MiEstimate) -> Self {
        Self {
            bits: e.bits,
            std_err: e.std_err,
            method: e.method.to_string(),
            warning: e.warning,
        }
    }
}

#[pymethods]
impl PyMiEstimate {
    fn __repr__(&self) -> String {
        format!("MiEstimate({:.4} ± {:.4} bits, {})", self.bits, self.std_err, self.method)
    }
}

#[pyclass(name = "GainReport", module = "splitrx", frozen, get_all)]
struct PyGainReport {
    rho_star: f64,
    g_mi: f64,
    g_mi_pct: f64,
    mi_at_0: f64,
    mi_at_1: f64,
    mi_at_star: f64,
    std_err: f64,
    /// `(rho, bits, std_err)` for every evaluated split ratio.
    curve: Vec<(f64, f64, f64)>,
    warnings: Vec<String>,
}

#[pymethods]
impl PyGainReport {
    fn __repr__(&self) -> String {
        format!("GainReport(rho_star={:.3}, g_mi={:.3}, g_mi_pct={:.1})", self.rho_star, self.g_mi, self.g_mi_pct)
    }
}

#[pyclass(name = "SerResult", module = "splitrx", frozen, get_all)]
struct PySerResult {
    ser: f64,
    ci95: f64,
    errors: usize,
    n_symbols: usize,
    rho: f64,
    power: f64,
}

impl From<SerResult> for PySerResult {
    fn from(r: SerResult) -> Self {
        Self {
            ser: r.ser,
            ci95: r.ci95,
            errors: r.errors,
            n_symbols: r.n_symbols,
            rho: r.rho,
            power: r.power,
        }
    }
}

#[pymethods]
impl PySerResult {
    fn __repr__(&self) -> String {
        format!("SerResult(ser={:.4e}, ci95={:.1e}, rho={}, power={})", self.ser, self.ci95, self.rho, self.power)
    }
}

fn estimator(n_samples: usize, seed: u64, bins: usize, inner_samples: usize, quad_order: usize) -> PyResult<EstimatorConfig> {
    Ok(EstimatorConfig::new(n_samples, seed)
        .py()?
        .with_bins(bins)
        .py()?
        .with_inner_samples(inner_samples)
        .with_quad(quad(quad_order)?))
}

fn mi_method(name: &str) -> PyResult<MiMethod> {
    match name {
        "plugin" => Ok(MiMethod::Plugin),
        "histogram" => Ok(MiMethod::Histogram),
        other => Err(PyValueError::new_err(format!("method must be 'plugin' or 'histogram', got '{other}'"))),
    }
}

fn detector(name: &str, quad_order: usize) -> PyResult<DetectorKind> {
    match name {
        "ml" => Ok(DetectorKind::Ml(quad(quad_order)?)),
        "fast" => Ok(DetectorKind::LowComplexity),
        "nn-cd" => Ok(DetectorKind::NearestNeighborCd),
        other => Err(PyValueError::new_err(format!("detector must be 'ml', 'fast' or 'nn-cd', got '{other}'"))),
    }
}

/// `e^x E1(x)` for `x > 0`.
#[pyfunction]
fn exp_e1(x: f64) -> PyResult<f64> {
    specfun::exp_e1(x).py()
}

/// `e^{-x} I0(x)` for `x >= 0`.
#[pyfunction]
fn bessel_i0_scaled(x: f64) -> PyResult<f64> {
    specfun::bessel_i0_scaled(x).py()
}

#[pyfunction]
fn erfc(x: f64) -> PyResult<f64> {
    specfun::erfc(x).py()
}

#[pyfunction]
#[pyo3(signature = (y2, power, sigma_a2, sigma_rec2, h_mag = 1.0))]
fn emg_pdf(y2: f64, power: f64, sigma_a2: f64, sigma_rec2: f64, h_mag: f64) -> PyResult<f64> {
    densities::emg_pdf(y2, power, h_mag, sigma_a2, sigma_rec2).py()
}

#[pyfunction]
fn ncx2_pdf(r: f64, lam: f64, sigma_s2: f64) -> PyResult<f64> {
    densities::ncx2_pdf(r, lam, sigma_s2).py()
}

#[pyfunction]
fn rc_pdf(r_c: f64, lam: f64, sigma_s2: f64, sigma_rec2: f64) -> PyResult<f64> {
    densities::rc_pdf(r_c, lam, sigma_s2, sigma_rec2).py()
}

/// Log density of `(y1, y2)` given symbol `x`, antenna noise integrated out.
#[pyfunction]
#[pyo3(signature = (y1, y2, x, cfg, env, quad_order = QuadratureSpec::DEFAULT_ORDER))]
fn cond_joint_logpdf_given_x(
    y1: Complex64,
    y2: f64,
    x: Complex64,
    cfg: &PySystemConfig,
    env: &PyNoiseEnv,
    quad_order: usize,
) -> PyResult<f64> {
    densities::cond_joint_logpdf_given_x(y1, y2, x, &cfg.0, &env.0, &quad(quad_order)?).py()
}

/// Low-complexity log-likelihood; `y2_scaled` is the power branch over `√P`.
#[pyfunction]
fn lowcomplexity_loglik(y1: Complex64, y2_scaled: f64, x: Complex64, cfg: &PySystemConfig, env: &PyNoiseEnv) -> PyResult<f64> {
    densities::lowcomplexity_loglik(y1, y2_scaled, x, &cfg.0, &env.0).py()
}

#[pyfunction]
fn mi_cd_closed_form(cfg: &PySystemConfig, env: &PyNoiseEnv) -> PyMiEstimate {
    mi::mi_cd_closed_form(&cfg.0, &env.0).into()
}

#[pyfunction]
fn mi_pd_upper_bound(cfg: &PySystemConfig, env: &PyNoiseEnv) -> PyMiEstimate {
    mi::mi_pd_upper_bound(&cfg.0, &env.0).into()
}

#[pyfunction]
fn mi_split_approx(cfg: &PySystemConfig, env: &PyNoiseEnv) -> PyResult<PyMiEstimate> {
    Ok(mi::mi_split_approx(&cfg.0, &env.0).py()?.into())
}

#[pyfunction]
fn mi_split_asymptotic(cfg: &PySystemConfig, env: &PyNoiseEnv) -> PyResult<PyMiEstimate> {
    Ok(mi::mi_split_asymptotic(&cfg.0, &env.0).py()?.into())
}

#[pyfunction]
fn asymptotic_gain(env: &PyNoiseEnv) -> PyResult<f64> {
    mi::asymptotic_gain(&env.0).py()
}

/// Monte-Carlo mutual information under Gaussian input.
#[pyfunction]
#[pyo3(signature = (cfg, env, method = "plugin", n_samples = 100_000, seed = 0, bins = 80, inner_samples = 0, quad_order = QuadratureSpec::DEFAULT_ORDER))]
#[allow(clippy::too_many_arguments)]
fn mi_split_mc(
    py: Python<'_>,
    cfg: &PySystemConfig,
    env: &PyNoiseEnv,
    method: &str,
    n_samples: usize,
    seed: u64,
    bins: usize,
    inner_samples: usize,
    quad_order: usize,
) -> PyResult<PyMiEstimate> {
    let est = estimator(n_samples, seed, bins, inner_samples, quad_order)?;
    let m = mi_method(method)?;
    let (c, e) = (cfg.0, env.0);
    Ok(py.detach(|| mi::mi_split_mc(&c, &e, &est, m)).py()?.into())
}

/// Mutual information of the power-detection-only receiver.
#[pyfunction]
#[pyo3(signature = (cfg, env, n_samples = 100_000, seed = 0))]
fn mi_pd_numeric(py: Python<'_>, cfg: &PySystemConfig, env: &PyNoiseEnv, n_samples: usize, seed: u64) -> PyResult<PyMiEstimate> {
    let est = EstimatorConfig::new(n_samples, seed).py()?;
    let (c, e) = (cfg.0, env.0);
    Ok(py.detach(|| mi::mi_pd_numeric(&c, &e, &est)).py()?.into())
}

/// Best split ratio and its information gain at `cfg.power`.
#[pyfunction]
#[pyo3(signature = (cfg, env, rho_step = 0.02, n_samples = 100_000, seed = 0))]
fn gain(
    py: Python<'_>,
    cfg: &PySystemConfig,
    env: &PyNoiseEnv,
    rho_step: f64,
    n_samples: usize,
    seed: u64,
) -> PyResult<PyGainReport> {
    let est = EstimatorConfig::new(n_samples, seed).py()?;
    let (c, e) = (cfg.0, env.0);
    let r = py.detach(|| mi::gain(&c, &e, &est, rho_step)).py()?;
    Ok(PyGainReport {
        rho_star: r.rho_star,
        g_mi: r.g_mi,
        g_mi_pct: r.g_mi_pct,
        mi_at_0: r.mi_at_0,
        mi_at_1: r.mi_at_1,
        mi_at_star: r.mi_at_star,
        std_err: r.std_err,
        curve: r.curve.iter().map(|(rho, e)| (*rho, e.bits, e.std_err)).collect(),
        warnings: r.warnings,
    })
}

/// Draws `n` uniformly chosen symbols through the channel.
/// Returns `(indices, y1, y2)`.
#[pyfunction]
#[pyo3(signature = (constellation, cfg, env, n, seed = 0))]
fn simulate(
    constellation: &PyConstellation,
    cfg: &PySystemConfig,
    env: &PyNoiseEnv,
    n: usize,
    seed: u64,
) -> (Vec<usize>, Vec<Complex64>, Vec<f64>) {
    let mut rng = RandomStream::new(seed, 0);
    let pts = constellation.0.points();
    let (mut idx, mut y1, mut y2) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let k = rng.index(pts.len());
        let rx = model::sample_channel(pts[k], &cfg.0, &env.0, &mut rng);
        idx.push(k);
        y1.push(rx.y1);
        y2.push(rx.y2);
    }
    (idx, y1, y2)
}

/// Decisions for many received samples with one detector.
#[pyfunction]
#[pyo3(signature = (y1, y2, constellation, cfg, env, detector = "fast", quad_order = QuadratureSpec::DEFAULT_ORDER))]
#[allow(clippy::too_many_arguments)]
fn detect(
    py: Python<'_>,
    y1: Vec<Complex64>,
    y2: Vec<f64>,
    constellation: &PyConstellation,
    cfg: &PySystemConfig,
    env: &PyNoiseEnv,
    detector: &str,
    quad_order: usize,
) -> PyResult<Vec<usize>> {
    if y1.len() != y2.len() {
        return Err(PyValueError::new_err("y1 and y2 must have the same length"));
    }
    let kind = self::detector(detector, quad_order)?;
    let (c, cf, e) = (&constellation.0, cfg.0, env.0);
    py.detach(|| -> splitrx::Result<Vec<usize>> {
        let rx = y1.iter().zip(&y2).map(|(&a, &b)| RxSample { y1: a, y2: b });
        match kind {
            DetectorKind::Ml(q) => {
                let d = det::MlDetector::new(c, &cf, &e, q);
                rx.map(|r| d.detect(&r)).collect()
            }
            DetectorKind::LowComplexity => {
                let d = det::FastDetector::new(c, &cf, &e)?;
                rx.map(|r| d.detect(&model::scale_y2(r, cf.power)?)).collect()
            }
            DetectorKind::NearestNeighborCd => {
                let d = det::NearestNeighborDetector::new(c, &cf);
                rx.map(|r| d.detect(r.y1)).collect()
            }
        }
    })
    .py()
}

#[pyfunction]
#[pyo3(signature = (constellation, cfg, env, detector = "fast", n = 100_000, seed = 0, quad_order = QuadratureSpec::DEFAULT_ORDER))]
#[allow(clippy::too_many_arguments)]
fn ser_monte_carlo(
    py: Python<'_>,
    constellation: &PyConstellation,
    cfg: &PySystemConfig,
    env: &PyNoiseEnv,
    detector: &str,
    n: usize,
    seed: u64,
    quad_order: usize,
) -> PyResult<PySerResult> {
    let kind = self::detector(detector, quad_order)?;
    let (c, cf, e) = (&constellation.0, cfg.0, env.0);
    Ok(py.detach(|| det::ser_monte_carlo(c, &cf, &e, kind, n, seed)).py()?.into())
}

/// SER over a split-ratio grid; returns `(rho_star, ser_min, curve)`.
#[pyfunction]
#[pyo3(signature = (constellation, cfg, env, rho_grid = None, detector = "fast", n = 100_000, seed = 0, quad_order = QuadratureSpec::DEFAULT_ORDER))]
#[allow(clippy::too_many_arguments)]
fn ser_optimal_rho(
    py: Python<'_>,
    constellation: &PyConstellation,
    cfg: &PySystemConfig,
    env: &PyNoiseEnv,
    rho_grid: Option<Vec<f64>>,
    detector: &str,
    n: usize,
    seed: u64,
    quad_order: usize,
) -> PyResult<(f64, f64, Vec<PySerResult>)> {
    let kind = self::detector(detector, quad_order)?;
    let grid = rho_grid.unwrap_or_else(det::default_rho_grid);
    let (c, cf, e) = (&constellation.0, cfg.0, env.0);
    let r = py.detach(|| det::ser_optimal_rho(c, &cf, &e, kind, n, seed, &grid)).py()?;
    Ok((r.rho_star, r.ser_min, r.curve.into_iter().map(Into::into).collect()))
}

#[pymodule]
#[pyo3(name = "splitrx")]
fn splitrx_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyNoiseEnv>()?;
    m.add_class::<PySystemConfig>()?;
    m.add_class::<PyConstellation>()?;
    m.add_class::<PyMiEstimate>()?;
    m.add_class::<PyGainReport>()?;
    m.add_class::<PySerResult>()?;
    m.add_function(wrap_pyfunction!(exp_e1, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i0_scaled, m)?)?;
    m.add_function(wrap_pyfunction!(erfc, m)?)?;
    m.add_function(wrap_pyfunction!(emg_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(ncx2_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(rc_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(cond_joint_logpdf_given_x, m)?)?;
    m.add_function(wrap_pyfunction!(lowcomplexity_loglik, m)?)?;
    m.add_function(wrap_pyfunction!(mi_cd_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(mi_pd_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(mi_split_approx, m)?)?;
    m.add_function(wrap_pyfunction!(mi_split_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_gain, m)?)?;
    m.add_function(wrap_pyfunction!(mi_split_mc, m)?)?;
    m.add_function(wrap_pyfunction!(mi_pd_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(gain, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(ser_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(ser_optimal_rho, m)?)?;
    Ok(())
}
