//! Closed-form throughput of the two-hop slotted ALOHA chain.
//!
//! Users offer Poisson(G) packets per slot. Each of K relays decodes when
//! exactly one packet survives the optical erasures, forwards it with
//! probability δ, and the sink decodes when exactly one forwarded packet
//! survives the RF erasures.

use crate::error::{Error, Result};
use crate::numerics::{
    gamma_lower_regularized, golden_section_max, ln_gamma, log_binomial, SummationAccumulator,
};

/// Default Poisson tail mass left out of the series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Below this ε_vlc the closed form is abandoned for the series.
pub const EPS_VLC_FLOOR: f64 = 1e-6;
/// Σ|term| / |Σ term| above which the alternating sum is not trusted.
pub const MAX_CANCELLATION_RATIO: f64 = 1e9;
/// Estimated rounding error above which the alternating sum is not trusted.
pub const MAX_CANCELLATION_ERROR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Channel load G, packets per slot.
    pub load_g: f64,
    /// Number of relays K.
    pub num_relays: u32,
    /// Forwarding probability δ.
    pub forward_prob: f64,
    pub eps_vlc: f64,
    pub eps_rf: f64,
    /// Thresholds the erasure probabilities were derived from, if any.
    pub gamma_th_vlc: Option<f64>,
    pub gamma_th_rf: Option<f64>,
}

impl SystemConfig {
    pub fn new(load_g: f64, num_relays: u32, forward_prob: f64, eps_vlc: f64, eps_rf: f64) -> Result<Self> {
        let cfg = Self {
            load_g,
            num_relays,
            forward_prob,
            eps_vlc,
            eps_rf,
            gamma_th_vlc: None,
            gamma_th_rf: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.load_g >= 0.0) || !self.load_g.is_finite() {
            return Err(Error::config(format!("load G must be finite and >= 0, got {}", self.load_g)));
        }
        if self.num_relays == 0 {
            return Err(Error::config("at least one relay is required"));
        }
        for (name, p) in [
            ("forwarding probability", self.forward_prob),
            ("eps_vlc", self.eps_vlc),
            ("eps_rf", self.eps_rf),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn with_load(mut self, load_g: f64) -> Self {
        self.load_g = load_g;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Series,
    ClosedForm,
    /// Closed form was requested but the series was evaluated instead.
    Fallback,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::ClosedForm => "closed_form",
            Method::Fallback => "fallback",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputResult {
    /// End-to-end throughput, packets per slot.
    pub value: f64,
    pub method: Method,
    /// Last Poisson term kept (series only).
    pub truncation_u_max: Option<u64>,
    pub est_abs_error: f64,
}

/// Poisson probability of `u` arrivals at load `g`, evaluated in log space.
pub fn poisson_pmf(u: u64, g: f64) -> f64 {
    if g == 0.0 {
        return if u == 0 { 1.0 } else { 0.0 };
    }
    if u == 0 {
        return (-g).exp();
    }
    let u_f = u as f64;
    (u_f * g.ln() - g - ln_gamma(u_f + 1.0)).exp()
}

/// P(U > n) for U ~ Poisson(g).
fn poisson_tail(n: u64, g: f64) -> Result<f64> {
    if g == 0.0 {
        return Ok(0.0);
    }
    gamma_lower_regularized(n as f64 + 1.0, g)
}

/// Smallest n with P(U > n) < `tail_tol`. The tail is decreasing in n, so
/// an exponential search followed by bisection needs O(log n) evaluations.
fn truncation_point(g: f64, tail_tol: f64) -> Result<u64> {
    if poisson_tail(0, g)? < tail_tol {
        return Ok(0);
    }
    let mut hi = 1u64;
    while poisson_tail(hi, g)? >= tail_tol {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::domain(format!("Poisson tail for G = {g} never drops below {tail_tol}")))?;
    }
    let mut lo = hi / 2;
    // invariant: tail(lo) >= tol > tail(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if poisson_tail(mid, g)? >= tail_tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Probability that a relay sees exactly one unerased packet out of `u`.
/// Uses 0⁰ = 1, so p_1 = 1 − ε even when ε = 0.
pub fn p_u(u: u64, eps_vlc: f64) -> f64 {
    debug_assert!(u >= 1);
    let exp = i32::try_from(u - 1).unwrap_or(i32::MAX);
    u as f64 * (1.0 - eps_vlc) * eps_vlc.powi(exp)
}

/// Probability that one relay decodes, forwards and survives the RF hop.
pub fn q_u(u: u64, cfg: &SystemConfig) -> f64 {
    let q = p_u(u, cfg.eps_vlc) * cfg.forward_prob * (1.0 - cfg.eps_rf);
    debug_assert!((0.0..=1.0).contains(&q));
    q.clamp(0.0, 1.0)
}

/// Probability that exactly one of the K relays delivers a packet.
pub fn z_u(u: u64, cfg: &SystemConfig) -> f64 {
    let q = q_u(u, cfg);
    let k = cfg.num_relays;
    f64::from(k) * q * (1.0 - q).powi(k as i32 - 1)
}

/// Per-relay uplink throughput G(1−ε)e^{−G(1−ε)}.
pub fn uplink_throughput(g: f64, eps_vlc: f64) -> f64 {
    let eff = g * (1.0 - eps_vlc);
    eff * (-eff).exp()
}

/// End-to-end throughput by summing the Poisson mixture directly, truncated
/// once the omitted Poisson mass drops below `tail_tol`.
pub fn end_to_end_series(cfg: &SystemConfig, tail_tol: f64) -> Result<ThroughputResult> {
    cfg.validate()?;
    if !(tail_tol > 0.0) {
        return Err(Error::config(format!("tail tolerance must be positive, got {tail_tol}")));
    }
    let g = cfg.load_g;
    let u_max = truncation_point(g, tail_tol)?;
    let tail = poisson_tail(u_max, g)?;
    let mut acc = SummationAccumulator::new();
    for u in 1..=u_max {
        acc.add(poisson_pmf(u, g) * z_u(u, cfg));
    }
    Ok(ThroughputResult {
        value: acc.sum().clamp(0.0, 1.0),
        method: Method::Series,
        truncation_u_max: Some(u_max),
        est_abs_error: tail + acc.sum_of_abs() * u_max.max(1) as f64 * f64::EPSILON,
    })
}

/// Touchard polynomials T_0..=T_m at `x`, via T_n = x Σ_l C(n−1, l) T_l.
fn touchard_polynomials(m: usize, x: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(m + 1);
    t.push(1.0);
    for n in 1..=m {
        let mut acc = SummationAccumulator::new();
        for (l, &tl) in t.iter().enumerate() {
            let c = log_binomial(n as u64 - 1, l as u64).expect("l <= n-1").exp();
            acc.add(c * tl);
        }
        t.push(x * acc.sum());
    }
    t
}

/// The ancillary function H_m(x): H_0 = e^x, H_m = x Σ_{l<m} C(m−1, l) H_l.
pub fn ancillary_h(m: usize, x: f64) -> f64 {
    touchard_polynomials(m, x)[m] * x.exp()
}

/// Limit of the end-to-end throughput as ε_vlc → 0: only single arrivals
/// can be decoded, so S = G e^{−G} K q (1−q)^{K−1} with q = δ(1−ε_rf).
pub fn end_to_end_zero_erasure_limit(cfg: &SystemConfig) -> f64 {
    let q = cfg.forward_prob * (1.0 - cfg.eps_rf);
    let k = cfg.num_relays;
    cfg.load_g * (-cfg.load_g).exp() * f64::from(k) * q * (1.0 - q).powi(k as i32 - 1)
}

/// End-to-end throughput from the finite alternating sum over i < K.
///
/// Falls back to [`end_to_end_series`] (tagged [`Method::Fallback`]) when
/// `0 < ε_vlc < EPS_VLC_FLOOR` or when cancellation makes the alternating
/// sum untrustworthy. `ε_vlc = 0` is evaluated through its analytic limit.
pub fn end_to_end_closed_form(cfg: &SystemConfig) -> Result<ThroughputResult> {
    cfg.validate()?;
    let eps = cfg.eps_vlc;
    if eps == 0.0 {
        return Ok(ThroughputResult {
            value: end_to_end_zero_erasure_limit(cfg),
            method: Method::ClosedForm,
            truncation_u_max: None,
            est_abs_error: 4.0 * f64::EPSILON,
        });
    }
    if eps < EPS_VLC_FLOOR {
        return fallback(cfg);
    }
    let base = cfg.forward_prob * (1.0 - eps) * (1.0 - cfg.eps_rf) / eps;
    if base == 0.0 || cfg.load_g == 0.0 {
        return Ok(ThroughputResult {
            value: 0.0,
            method: Method::ClosedForm,
            truncation_u_max: None,
            est_abs_error: 0.0,
        });
    }
    let k = cfg.num_relays as u64;
    let g = cfg.load_g;
    let ln_k = (k as f64).ln();
    let ln_base = base.ln();
    let mut acc = SummationAccumulator::new();
    let mut rounding = 0.0;
    for i in 0..k {
        let m = i + 1;
        let x = g * eps.powi(m as i32);
        let t = touchard_polynomials(m as usize, x)[m as usize];
        if t == 0.0 {
            continue;
        }
        // (−1)^i K C(K−1,i) e^{−G} base^{i+1} H_{i+1}(x), with H = e^x T
        let ln_mag = ln_k + log_binomial(k - 1, i)? + m as f64 * ln_base + t.ln() + x - g;
        let mag = ln_mag.exp();
        acc.add(if i % 2 == 0 { mag } else { -mag });
        rounding += mag * (m as f64 + 8.0) * f64::EPSILON;
    }
    let value = acc.sum();
    if acc.cancellation_ratio() > MAX_CANCELLATION_RATIO
        || rounding > MAX_CANCELLATION_ERROR
        || !value.is_finite()
    {
        return fallback(cfg);
    }
    Ok(ThroughputResult {
        value: value.clamp(0.0, 1.0),
        method: Method::ClosedForm,
        truncation_u_max: None,
        est_abs_error: rounding,
    })
}

fn fallback(cfg: &SystemConfig) -> Result<ThroughputResult> {
    let mut r = end_to_end_series(cfg, DEFAULT_TAIL_TOL)?;
    r.method = Method::Fallback;
    Ok(r)
}

/// Throughput-maximising load and the peak throughput.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalLoad {
    pub g_opt: f64,
    pub s_max: f64,
    /// False when the coarse scan was not unimodal and a dense scan was used.
    pub unimodal: bool,
}

const COARSE_POINTS: usize = 65;
const DENSE_POINTS: usize = 10_000;
const LOAD_TOL: f64 = 1e-6;

/// Maximises the end-to-end throughput over `G ∈ [g_lo, g_hi]`; the load
/// stored in `cfg` is ignored.
pub fn optimal_load(cfg: &SystemConfig, g_lo: f64, g_hi: f64) -> Result<OptimalLoad> {
    if !(g_lo >= 0.0 && g_lo < g_hi && g_hi.is_finite()) {
        return Err(Error::config(format!("invalid load range [{g_lo}, {g_hi}]")));
    }
    cfg.with_load(g_lo).validate()?;
    let eval = |g: f64| -> Result<f64> { Ok(end_to_end_closed_form(&cfg.with_load(g))?.value) };

    let grid = |n: usize| -> Result<Vec<(f64, f64)>> {
        (0..n)
            .map(|j| {
                let g = g_lo + (g_hi - g_lo) * j as f64 / (n - 1) as f64;
                Ok((g, eval(g)?))
            })
            .collect()
    };
    let coarse = grid(COARSE_POINTS)?;
    let unimodal = is_unimodal(&coarse);
    let points = if unimodal { coarse } else { grid(DENSE_POINTS)? };
    let best = argmax(&points);
    let lo = points[best.saturating_sub(1)].0;
    let hi = points[(best + 1).min(points.len() - 1)].0;
    let refined = golden_section_max(|g| eval(g).unwrap_or(f64::NEG_INFINITY), lo, hi, LOAD_TOL);
    let (g_opt, s_max) = if refined.value >= points[best].1 {
        (refined.x, refined.value)
    } else {
        points[best]
    };
    Ok(OptimalLoad {
        g_opt,
        s_max,
        unimodal,
    })
}

fn argmax(points: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.1 > points[best].1 {
            best = i;
        }
    }
    best
}

/// Rises (weakly) to a single peak and then falls (weakly).
fn is_unimodal(points: &[(f64, f64)]) -> bool {
    let peak = argmax(points);
    let slack = 1e-14;
    points[..=peak].windows(2).all(|w| w[1].1 >= w[0].1 - slack)
        && points[peak..].windows(2).all(|w| w[1].1 <= w[0].1 + slack)
}

/// Worst disagreement between the series and closed-form engines over
/// [`consistency_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub points: usize,
    pub fallbacks: usize,
    pub max_abs_diff: f64,
    pub worst: Option<SystemConfig>,
}

/// K ∈ 1..=8, G ∈ {0.1, 0.5, 1, 2, 5, 10}, ε_vlc ∈ {0.1, 0.5, 0.9},
/// ε_rf ∈ {0, 0.3, 0.7}, δ ∈ {0.5, 1}.
pub fn consistency_grid() -> Vec<SystemConfig> {
    let mut out = Vec::with_capacity(864);
    for k in 1..=8 {
        for g in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            for ev in [0.1, 0.5, 0.9] {
                for er in [0.0, 0.3, 0.7] {
                    for d in [0.5, 1.0] {
                        out.push(SystemConfig::new(g, k, d, ev, er).expect("grid point is valid"));
                    }
                }
            }
        }
    }
    out
}

/// Evaluates both engines on every grid point.
pub fn check_consistency(grid: &[SystemConfig], tail_tol: f64) -> Result<ConsistencyReport> {
    let mut report = ConsistencyReport {
        points: grid.len(),
        fallbacks: 0,
        max_abs_diff: 0.0,
        worst: None,
    };
    for cfg in grid {
        let series = end_to_end_series(cfg, tail_tol)?;
        let closed = end_to_end_closed_form(cfg)?;
        if closed.method != Method::ClosedForm {
            report.fallbacks += 1;
        }
        let d = (series.value - closed.value).abs();
        if d > report.max_abs_diff || report.worst.is_none() {
            report.max_abs_diff = report.max_abs_diff.max(d);
            report.worst = Some(*cfg);
        }
    }
    Ok(report)
}
