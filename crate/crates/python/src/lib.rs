//! Python bindings: analytic throughput, channel models, the slot simulator
//! and sweeps.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relay_aloha::analytic;
use relay_aloha::config::ModelConfig;
use relay_aloha::numerics;
use relay_aloha::rf::RfChannelParams;
use relay_aloha::sim::{self, SimConfig};
use relay_aloha::sweep::{self, Engines, SweepParam, SweepSpec};
use relay_aloha::vlc::{db_to_linear, VlcChannel, VlcChannelParams, VlcSnrModel as CoreVlc, VlcSnrParams};
use relay_aloha::Error;

create_exception!(relay_aloha_py, ConfigError, PyValueError);
create_exception!(relay_aloha_py, NumericalError, PyArithmeticError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InsufficientData(_) => ConfigError::new_err(e.to_string()),
        Error::Domain(_) | Error::Convergence { .. } | Error::CheckFailed(_) => NumericalError::new_err(e.to_string()),
        Error::Io { .. } | Error::Csv { .. } => PyOSError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct SystemConfig {
    inner: analytic::SystemConfig,
}

#[pymethods]
impl SystemConfig {
    #[new]
    #[pyo3(signature = (load_g, num_relays, forward_prob = 1.0, eps_vlc = 0.5, eps_rf = 0.0))]
    fn new(load_g: f64, num_relays: u32, forward_prob: f64, eps_vlc: f64, eps_rf: f64) -> PyResult<Self> {
        let inner = analytic::SystemConfig::new(load_g, num_relays, forward_prob, eps_vlc, eps_rf).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn load_g(&self) -> f64 {
        self.inner.load_g
    }

    #[getter]
    fn num_relays(&self) -> u32 {
        self.inner.num_relays
    }

    #[getter]
    fn forward_prob(&self) -> f64 {
        self.inner.forward_prob
    }

    #[getter]
    fn eps_vlc(&self) -> f64 {
        self.inner.eps_vlc
    }

    #[getter]
    fn eps_rf(&self) -> f64 {
        self.inner.eps_rf
    }

    fn with_load(&self, load_g: f64) -> PyResult<Self> {
        let inner = self.inner.with_load(load_g);
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SystemConfig(load_g={}, num_relays={}, forward_prob={}, eps_vlc={}, eps_rf={})",
            c.load_g, c.num_relays, c.forward_prob, c.eps_vlc, c.eps_rf
        )
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Throughput {
    value: f64,
    method: String,
    truncation_u_max: Option<u64>,
    est_abs_error: f64,
}

impl From<analytic::ThroughputResult> for Throughput {
    fn from(r: analytic::ThroughputResult) -> Self {
        Self {
            value: r.value,
            method: r.method.as_str().to_string(),
            truncation_u_max: r.truncation_u_max,
            est_abs_error: r.est_abs_error,
        }
    }
}

#[pymethods]
impl Throughput {
    fn __repr__(&self) -> String {
        format!("Throughput(value={}, method='{}')", self.value, self.method)
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy)]
struct OptimalLoad {
    g_opt: f64,
    s_max: f64,
    unimodal: bool,
}

#[pymethods]
impl OptimalLoad {
    fn __repr__(&self) -> String {
        format!("OptimalLoad(g_opt={}, s_max={}, unimodal={})", self.g_opt, self.s_max, self.unimodal)
    }
}

#[pyfunction]
fn end_to_end_closed_form(cfg: &SystemConfig) -> PyResult<Throughput> {
    analytic::end_to_end_closed_form(&cfg.inner).map(Into::into).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, tail_tol = analytic::DEFAULT_TAIL_TOL))]
fn end_to_end_series(cfg: &SystemConfig, tail_tol: f64) -> PyResult<Throughput> {
    analytic::end_to_end_series(&cfg.inner, tail_tol).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn uplink_throughput(load_g: f64, eps_vlc: f64) -> f64 {
    analytic::uplink_throughput(load_g, eps_vlc)
}

#[pyfunction]
fn ancillary_h(m: usize, x: f64) -> f64 {
    analytic::ancillary_h(m, x)
}

#[pyfunction]
#[pyo3(signature = (cfg, g_lo = 0.0, g_hi = 10.0))]
fn optimal_load(cfg: &SystemConfig, g_lo: f64, g_hi: f64) -> PyResult<OptimalLoad> {
    let o = analytic::optimal_load(&cfg.inner, g_lo, g_hi).map_err(py_err)?;
    Ok(OptimalLoad {
        g_opt: o.g_opt,
        s_max: o.s_max,
        unimodal: o.unimodal,
    })
}

#[pyfunction]
fn gamma_upper_regularized(a: f64, x: f64) -> PyResult<f64> {
    numerics::gamma_upper_regularized(a, x).map_err(py_err)
}

#[pyfunction]
fn gamma_lower_regularized(a: f64, x: f64) -> PyResult<f64> {
    numerics::gamma_lower_regularized(a, x).map_err(py_err)
}

/// Optical hop with the reference receiver optics.
#[pyclass(frozen, skip_from_py_object)]
struct VlcModel {
    inner: CoreVlc,
}

#[pymethods]
impl VlcModel {
    #[new]
    #[pyo3(signature = (half_angle_deg = 45.0, height_m = 2.5, tx_power_w = 1.0))]
    fn new(half_angle_deg: f64, height_m: f64, tx_power_w: f64) -> PyResult<Self> {
        let channel =
            VlcChannel::new(VlcChannelParams::reference_optics(half_angle_deg.to_radians(), height_m)).map_err(py_err)?;
        let inner = CoreVlc::new(channel, VlcSnrParams::reference_receiver(tx_power_w)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn gamma_min(&self) -> f64 {
        self.inner.gamma_min
    }

    #[getter]
    fn gamma_max(&self) -> f64 {
        self.inner.gamma_max
    }

    #[getter]
    fn cell_radius(&self) -> f64 {
        self.inner.channel.derived.cell_radius
    }

    fn snr_at_distance(&self, r: f64) -> f64 {
        self.inner.snr_at_distance(r)
    }

    fn cdf(&self, gamma: f64) -> PyResult<f64> {
        self.inner.cdf(gamma).map_err(py_err)
    }

    fn erasure_prob(&self, gamma_th: f64) -> PyResult<f64> {
        self.inner.erasure_prob(gamma_th).map_err(py_err)
    }

    fn threshold_for_erasure(&self, eps: f64) -> PyResult<f64> {
        self.inner.threshold_for_erasure(eps).map_err(py_err)
    }

    /// SNRs of `n` users placed uniformly in the cell.
    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.inner.sample_user_snr(&mut rng)).collect()
    }
}

#[pyclass(frozen, skip_from_py_object)]
struct RfChannel {
    inner: RfChannelParams,
}

#[pymethods]
impl RfChannel {
    #[new]
    #[pyo3(signature = (m1 = 2.0, mu_rf_db = 10.0))]
    fn new(m1: f64, mu_rf_db: f64) -> PyResult<Self> {
        let inner = RfChannelParams::new(m1, db_to_linear(mu_rf_db)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn m1(&self) -> f64 {
        self.inner.m1
    }

    #[getter]
    fn mu_rf(&self) -> f64 {
        self.inner.mu_rf
    }

    fn cdf(&self, gamma: f64) -> PyResult<f64> {
        self.inner.cdf(gamma).map_err(py_err)
    }

    fn erasure_prob(&self, gamma_th: f64) -> PyResult<f64> {
        self.inner.erasure_prob(gamma_th).map_err(py_err)
    }

    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.inner.sample_snr(&mut rng)).collect()
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy)]
struct SimResult {
    mean: f64,
    stderr: f64,
    uplink_mean: f64,
    uplink_stderr: f64,
    num_slots: u64,
    decode_correlation: Option<f64>,
}

#[pymethods]
impl SimResult {
    fn __repr__(&self) -> String {
        format!("SimResult(mean={}, stderr={}, num_slots={})", self.mean, self.stderr, self.num_slots)
    }
}

/// Slot simulation with independent optical erasures and Bernoulli RF
/// erasures.
#[pyfunction]
#[pyo3(signature = (cfg, num_slots = 1_000_000, seed = 1))]
fn simulate(py: Python<'_>, cfg: &SystemConfig, num_slots: u64, seed: u64) -> PyResult<SimResult> {
    // the RF parameters only matter on the Nakagami erasure path
    let rf = RfChannelParams::new(2.0, 10.0).map_err(py_err)?;
    let sc = SimConfig::iid(cfg.inner, rf, num_slots, seed);
    let report = py.detach(|| sim::simulate(&sc)).map_err(py_err)?;
    Ok(SimResult {
        mean: report.end_to_end.mean,
        stderr: report.end_to_end.stderr,
        uplink_mean: report.uplink.mean,
        uplink_stderr: report.uplink.stderr,
        num_slots: report.end_to_end.num_slots,
        decode_correlation: report.stats.decode_correlation(),
    })
}

fn parse_config(config_toml: &str) -> PyResult<ModelConfig> {
    ModelConfig::from_toml_str(config_toml).map_err(py_err)
}

fn row_dict<'py>(py: Python<'py>, row: &sweep::ResultRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item(row.param.as_str(), row.value)?;
    if let Some((p, v)) = row.group {
        d.set_item(p.as_str(), v)?;
    }
    let i = &row.inputs;
    d.set_item("g", i.load_g)?;
    d.set_item("k", i.num_relays)?;
    d.set_item("delta", i.forward_prob)?;
    d.set_item("eps_vlc", row.eps_vlc)?;
    d.set_item("eps_rf", row.eps_rf)?;
    d.set_item("s_closed", row.s_closed)?;
    d.set_item("s_series", row.s_series)?;
    d.set_item("s_sim", row.sim.map(|s| s.mean))?;
    d.set_item("s_sim_stderr", row.sim.map(|s| s.stderr))?;
    d.set_item("seed", row.sim.map(|s| s.seed))?;
    d.set_item("method", row.method.map(|m| m.as_str()))?;
    d.set_item("error", row.error.as_deref())?;
    Ok(d)
}

/// Evaluates one operating point given as TOML text (empty for defaults).
#[pyfunction]
#[pyo3(signature = (config_toml = "", engines = "closed_form,series"))]
fn analyze<'py>(py: Python<'py>, config_toml: &str, engines: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse_config(config_toml)?;
    let engines: Engines = engines.parse().map_err(py_err)?;
    let row = py.detach(|| sweep::evaluate(&cfg, engines)).map_err(py_err)?;
    row_dict(py, &row)
}

/// Sweeps `param` over `values`; one dict per point, in input order.
#[pyfunction]
#[pyo3(signature = (param, values, config_toml = "", engines = "closed_form,series"))]
fn run_sweep<'py>(
    py: Python<'py>,
    param: &str,
    values: Vec<f64>,
    config_toml: &str,
    engines: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec = SweepSpec {
        param: param.parse::<SweepParam>().map_err(py_err)?,
        values,
        group: None,
        base: parse_config(config_toml)?,
        engines: engines.parse().map_err(py_err)?,
    };
    let rows = py.detach(|| sweep::run_sweep(&spec)).map_err(py_err)?;
    rows.iter().map(|r| row_dict(py, r)).collect()
}

#[pymodule]
fn relay_aloha_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add_class::<SystemConfig>()?;
    m.add_class::<Throughput>()?;
    m.add_class::<OptimalLoad>()?;
    m.add_class::<VlcModel>()?;
    m.add_class::<RfChannel>()?;
    m.add_class::<SimResult>()?;
    m.add_function(wrap_pyfunction!(end_to_end_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(end_to_end_series, m)?)?;
    m.add_function(wrap_pyfunction!(uplink_throughput, m)?)?;
    m.add_function(wrap_pyfunction!(ancillary_h, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_load, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_upper_regularized, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_lower_regularized, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
