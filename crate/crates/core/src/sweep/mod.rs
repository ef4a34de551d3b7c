//! Parameter sweeps over the analytic and simulation engines.

mod csv;
mod trends;

use std::str::FromStr;

use rayon::prelude::*;

pub use self::csv::{emit_csv, format_sig, read_csv, write_csv, CsvRecord};
pub use trends::{reference_sweeps, reference_trends, report_trends, TrendId, TrendReport, TrendStatus, TrendVerdict};

use crate::analytic::{end_to_end_closed_form, end_to_end_series, Method};
use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::sim::{derive_seed, simulate};

/// Axis a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    LoadG,
    NumRelays,
    HeightL,
    M1,
    EpsVlc,
    EpsRf,
    Delta,
    /// Sets both hop thresholds (dB).
    GammaTh,
    GammaThVlc,
    GammaThRf,
    MuRf,
}

impl SweepParam {
    pub const ALL: [SweepParam; 11] = [
        SweepParam::LoadG,
        SweepParam::NumRelays,
        SweepParam::HeightL,
        SweepParam::M1,
        SweepParam::EpsVlc,
        SweepParam::EpsRf,
        SweepParam::Delta,
        SweepParam::GammaTh,
        SweepParam::GammaThVlc,
        SweepParam::GammaThRf,
        SweepParam::MuRf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::LoadG => "load_g",
            SweepParam::NumRelays => "num_relays",
            SweepParam::HeightL => "height_L",
            SweepParam::M1 => "m1",
            SweepParam::EpsVlc => "eps_vlc",
            SweepParam::EpsRf => "eps_rf",
            SweepParam::Delta => "delta",
            SweepParam::GammaTh => "gamma_th",
            SweepParam::GammaThVlc => "gamma_th_vlc_db",
            SweepParam::GammaThRf => "gamma_th_rf_db",
            SweepParam::MuRf => "mu_rf_db",
        }
    }

    /// Writes `value` into the configuration.
    pub fn apply(self, cfg: &mut ModelConfig, value: f64) -> Result<()> {
        match self {
            SweepParam::LoadG => cfg.traffic.load_g = value,
            SweepParam::NumRelays => {
                if value < 1.0 || value.fract() != 0.0 || value > f64::from(u32::MAX) {
                    return Err(Error::config(format!("num_relays must be a positive integer, got {value}")));
                }
                cfg.traffic.num_relays = value as u32;
            }
            SweepParam::HeightL => cfg.vlc.height_m = value,
            SweepParam::M1 => cfg.rf.m1 = value,
            SweepParam::EpsVlc => cfg.traffic.eps_vlc = Some(value),
            SweepParam::EpsRf => cfg.traffic.eps_rf = Some(value),
            SweepParam::Delta => cfg.traffic.forward_prob = value,
            SweepParam::GammaTh => {
                cfg.vlc.gamma_th_db = value;
                cfg.rf.gamma_th_db = value;
            }
            SweepParam::GammaThVlc => cfg.vlc.gamma_th_db = value,
            SweepParam::GammaThRf => cfg.rf.gamma_th_db = value,
            SweepParam::MuRf => cfg.rf.mu_rf_db = value,
        }
        Ok(())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = match s {
            "g" | "G" => "load_g",
            "k" | "K" => "num_relays",
            "L" | "height" | "height_m" => "height_L",
            "gamma_th_vlc" => "gamma_th_vlc_db",
            "gamma_th_rf" => "gamma_th_rf_db",
            "mu_rf" => "mu_rf_db",
            other => other,
        };
        SweepParam::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown sweep parameter '{s}'")))
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Engines evaluated for each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Engines {
    pub closed_form: bool,
    pub series: bool,
    pub simulation: bool,
}

impl Engines {
    pub const ANALYTIC: Engines = Engines {
        closed_form: true,
        series: true,
        simulation: false,
    };
    pub const ALL: Engines = Engines {
        closed_form: true,
        series: true,
        simulation: true,
    };
}

impl FromStr for Engines {
    type Err = Error;

    /// Comma-separated subset of `closed_form`, `series`, `simulation`
    /// (or `all`).
    fn from_str(s: &str) -> Result<Self> {
        let mut e = Engines {
            closed_form: false,
            series: false,
            simulation: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "closed_form" | "closed" => e.closed_form = true,
                "series" => e.series = true,
                "simulation" | "sim" => e.simulation = true,
                "all" => e = Engines::ALL,
                other => return Err(Error::config(format!("unknown engine '{other}'"))),
            }
        }
        if !(e.closed_form || e.series || e.simulation) {
            return Err(Error::config("no engine selected"));
        }
        Ok(e)
    }
}

/// Values of one axis.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    /// Optional second axis; one curve per value.
    pub group: Option<(SweepParam, Vec<f64>)>,
    pub base: ModelConfig,
    pub engines: Engines,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("sweep has no values"));
        }
        if let Some((g, vals)) = &self.group {
            if vals.is_empty() {
                return Err(Error::config("sweep group has no values"));
            }
            if *g == self.param {
                return Err(Error::config("group axis must differ from the swept axis"));
            }
        }
        Ok(())
    }

    /// `(group value, swept value)` pairs in output order: curve by curve.
    fn points(&self) -> Vec<(Option<f64>, f64)> {
        match &self.group {
            None => self.values.iter().map(|&v| (None, v)).collect(),
            Some((_, groups)) => groups
                .iter()
                .flat_map(|&gv| self.values.iter().map(move |&v| (Some(gv), v)))
                .collect(),
        }
    }
}

/// Input parameters of a sweep point, in user-facing units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub load_g: f64,
    pub num_relays: u32,
    pub forward_prob: f64,
    pub height_m: f64,
    pub half_angle_deg: f64,
    pub m1: f64,
    pub mu_rf_db: f64,
    pub gamma_th_vlc_db: f64,
    pub gamma_th_rf_db: f64,
    pub eps_vlc_override: Option<f64>,
    pub eps_rf_override: Option<f64>,
}

impl PointParams {
    pub fn of(cfg: &ModelConfig) -> Self {
        Self {
            load_g: cfg.traffic.load_g,
            num_relays: cfg.traffic.num_relays,
            forward_prob: cfg.traffic.forward_prob,
            height_m: cfg.vlc.height_m,
            half_angle_deg: cfg.vlc.half_angle_deg,
            m1: cfg.rf.m1,
            mu_rf_db: cfg.rf.mu_rf_db,
            gamma_th_vlc_db: cfg.vlc.gamma_th_db,
            gamma_th_rf_db: cfg.rf.gamma_th_db,
            eps_vlc_override: cfg.traffic.eps_vlc,
            eps_rf_override: cfg.traffic.eps_rf,
        }
    }

    /// Current value of a sweep axis.
    pub fn get(&self, p: SweepParam) -> f64 {
        match p {
            SweepParam::LoadG => self.load_g,
            SweepParam::NumRelays => f64::from(self.num_relays),
            SweepParam::HeightL => self.height_m,
            SweepParam::M1 => self.m1,
            SweepParam::EpsVlc => self.eps_vlc_override.unwrap_or(f64::NAN),
            SweepParam::EpsRf => self.eps_rf_override.unwrap_or(f64::NAN),
            SweepParam::Delta => self.forward_prob,
            SweepParam::GammaTh | SweepParam::GammaThVlc => self.gamma_th_vlc_db,
            SweepParam::GammaThRf => self.gamma_th_rf_db,
            SweepParam::MuRf => self.mu_rf_db,
        }
    }

    /// Bit patterns of every input except the listed axes; two points with
    /// equal keys differ only along those axes.
    pub(crate) fn key_without(&self, axes: &[SweepParam]) -> Vec<u64> {
        let both = axes.contains(&SweepParam::GammaTh);
        let skip = |p: SweepParam| {
            axes.contains(&p) || (both && matches!(p, SweepParam::GammaThVlc | SweepParam::GammaThRf))
        };
        let mut key = Vec::with_capacity(11);
        let mut push = |p: SweepParam, v: f64| {
            if !skip(p) {
                key.push(v.to_bits());
            }
        };
        push(SweepParam::LoadG, self.load_g);
        push(SweepParam::NumRelays, f64::from(self.num_relays));
        push(SweepParam::Delta, self.forward_prob);
        push(SweepParam::HeightL, self.height_m);
        push(SweepParam::M1, self.m1);
        push(SweepParam::MuRf, self.mu_rf_db);
        push(SweepParam::GammaThVlc, self.gamma_th_vlc_db);
        push(SweepParam::GammaThRf, self.gamma_th_rf_db);
        push(SweepParam::EpsVlc, self.eps_vlc_override.unwrap_or(-1.0));
        push(SweepParam::EpsRf, self.eps_rf_override.unwrap_or(-1.0));
        key.push(self.half_angle_deg.to_bits());
        key
    }
}

/// Estimate from the simulation engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimColumn {
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub param: SweepParam,
    pub value: f64,
    pub group: Option<(SweepParam, f64)>,
    pub inputs: PointParams,
    /// Threshold-derived (or overridden) erasure probabilities. NaN if the
    /// point failed before they were computed.
    pub eps_vlc: f64,
    pub eps_rf: f64,
    pub s_closed: Option<f64>,
    pub s_series: Option<f64>,
    pub sim: Option<SimColumn>,
    /// Method tag of the closed-form engine (or `series` when only the
    /// series ran).
    pub method: Option<Method>,
    pub error: Option<String>,
}

impl ResultRow {
    /// Best available throughput: closed form, then series, then simulation.
    pub fn throughput(&self) -> Option<f64> {
        self.s_closed.or(self.s_series).or(self.sim.map(|s| s.mean))
    }
}

fn empty_row(param: SweepParam, value: f64, group: Option<(SweepParam, f64)>, cfg: &ModelConfig) -> ResultRow {
    ResultRow {
        param,
        value,
        group,
        inputs: PointParams::of(cfg),
        eps_vlc: f64::NAN,
        eps_rf: f64::NAN,
        s_closed: None,
        s_series: None,
        sim: None,
        method: None,
        error: None,
    }
}

/// Runs the selected engines on `cfg` and fills in `row`.
fn fill_row(cfg: &ModelConfig, engines: Engines, seed: u64, row: &mut ResultRow) -> Result<()> {
    row.inputs = PointParams::of(cfg);
    let point = cfg.resolve()?;
    row.eps_vlc = point.system.eps_vlc;
    row.eps_rf = point.system.eps_rf;
    if engines.series {
        let r = end_to_end_series(&point.system, cfg.sim.tail_tol)?;
        row.s_series = Some(r.value);
        row.method = Some(r.method);
    }
    if engines.closed_form {
        let r = end_to_end_closed_form(&point.system)?;
        row.s_closed = Some(r.value);
        row.method = Some(r.method);
    }
    if engines.simulation {
        let report = simulate(&cfg.sim_config(&point, seed)?)?;
        row.sim = Some(SimColumn {
            mean: report.end_to_end.mean,
            stderr: report.end_to_end.stderr,
            seed,
        });
    }
    Ok(())
}

/// Evaluates a single configuration, simulating with `cfg.sim.seed`
/// as is. Unlike [`run_sweep`], errors are returned rather than recorded.
pub fn evaluate(cfg: &ModelConfig, engines: Engines) -> Result<ResultRow> {
    let mut row = empty_row(SweepParam::LoadG, cfg.traffic.load_g, None, cfg);
    fill_row(cfg, engines, cfg.sim.seed, &mut row)?;
    Ok(row)
}

fn evaluate_point(spec: &SweepSpec, index: usize, group: Option<f64>, value: f64, master_seed: u64) -> ResultRow {
    let mut cfg = spec.base.clone();
    let group = spec.group.as_ref().zip(group).map(|((p, _), v)| (*p, v));
    let mut row = empty_row(spec.param, value, group, &cfg);
    let outcome = (|| -> Result<()> {
        if let Some((gp, gv)) = group {
            gp.apply(&mut cfg, gv)?;
        }
        spec.param.apply(&mut cfg, value)?;
        fill_row(&cfg, spec.engines, derive_seed(master_seed, index as u64), &mut row)
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

/// Evaluates every point of the sweep (in parallel) and returns the rows in
/// input order. Point `i` simulates with seed `derive_seed(base seed, i)`.
/// A failing point records its error in the row; the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let master = spec.base.sim.seed;
    let points = spec.points();
    Ok(points
        .par_iter()
        .enumerate()
        .map(|(i, &(g, v))| evaluate_point(spec, i, g, v, master))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(param: SweepParam, values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            param,
            values,
            group: None,
            base: ModelConfig::default(),
            engines: Engines::ANALYTIC,
        }
    }

    #[test]
    fn param_names_round_trip() {
        for p in SweepParam::ALL {
            assert_eq!(p.as_str().parse::<SweepParam>().unwrap(), p);
        }
        assert_eq!("K".parse::<SweepParam>().unwrap(), SweepParam::NumRelays);
        assert!("bogus".parse::<SweepParam>().is_err());
    }

    #[test]
    fn engines_parse() {
        assert_eq!("all".parse::<Engines>().unwrap(), Engines::ALL);
        let e: Engines = "closed_form,simulation".parse().unwrap();
        assert!(e.closed_form && e.simulation && !e.series);
        assert!("".parse::<Engines>().is_err());
        assert!("magic".parse::<Engines>().is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn rows_follow_input_order_and_carry_errors() {
        let rows = run_sweep(&spec(SweepParam::Delta, vec![0.5, 1.0, 1.5, 0.25])).unwrap();
        assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![0.5, 1.0, 1.5, 0.25]);
        assert!(rows[2].error.is_some());
        assert!(rows[2].s_closed.is_none());
        assert!(rows[0].error.is_none() && rows[3].error.is_none());
        assert!(rows[1].s_closed.unwrap() > rows[0].s_closed.unwrap());
    }

    #[test]
    fn eps_columns_match_channel_modules() {
        let rows = run_sweep(&spec(SweepParam::HeightL, vec![2.0, 2.5, 3.0])).unwrap();
        for r in rows {
            let mut cfg = ModelConfig::default();
            cfg.vlc.height_m = r.value;
            let p = cfg.resolve().unwrap();
            assert_eq!(r.eps_vlc, p.vlc.erasure_prob(db_to_lin(cfg.vlc.gamma_th_db)).unwrap());
            assert_eq!(r.eps_rf, p.rf.erasure_prob(db_to_lin(cfg.rf.gamma_th_db)).unwrap());
        }
    }

    fn db_to_lin(db: f64) -> f64 {
        crate::vlc::db_to_linear(db)
    }

    #[test]
    fn grouped_sweep_emits_curve_by_curve() {
        let mut s = spec(SweepParam::LoadG, vec![0.5, 1.0]);
        s.group = Some((SweepParam::NumRelays, vec![1.0, 3.0]));
        let rows = run_sweep(&s).unwrap();
        let got: Vec<(u32, f64)> = rows.iter().map(|r| (r.inputs.num_relays, r.inputs.load_g)).collect();
        assert_eq!(got, vec![(1, 0.5), (1, 1.0), (3, 0.5), (3, 1.0)]);
        s.group = Some((SweepParam::LoadG, vec![1.0]));
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn relay_count_has_interior_optimum_at_low_load() {
        let mut s = spec(SweepParam::NumRelays, (1..=12).map(f64::from).collect());
        s.base.traffic.load_g = 0.5;
        let rows = run_sweep(&s).unwrap();
        let tp: Vec<f64> = rows.iter().map(|r| r.s_closed.unwrap()).collect();
        let best = (0..tp.len()).max_by(|&a, &b| tp[a].total_cmp(&tp[b])).unwrap();
        assert!(best > 0 && best < tp.len() - 1, "optimum at K = {}", best + 1);
    }
}
