//! Qualitative checks on sweep output:
//!
//! * T1: at light load (G ≤ 0.5) one relay does at least as well as four.
//! * T2: the throughput-maximising load grows with the number of relays.
//! * T3: the throughput-maximising load grows with the room height.
//! * T4: with two relays, the peak throughput grows with the Nakagami m1.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{linspace, run_sweep, Engines, ResultRow, SweepParam, SweepSpec};
use crate::config::ModelConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrendId {
    T1,
    T2,
    T3,
    T4,
}

impl TrendId {
    pub fn description(self) -> &'static str {
        match self {
            TrendId::T1 => "low-load relay penalty: S(K=1) >= S(K=4) for G <= 0.5",
            TrendId::T2 => "G_opt increasing in K",
            TrendId::T3 => "G_opt increasing in room height L",
            TrendId::T4 => "peak S increasing in m1 at K=2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendStatus {
    Pass,
    Fail,
    /// The rows do not contain the axes this trend needs.
    NotEvaluated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendVerdict {
    pub id: TrendId,
    pub status: TrendStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub verdicts: Vec<TrendVerdict>,
}

impl TrendReport {
    pub fn status(&self, id: TrendId) -> TrendStatus {
        self.verdicts
            .iter()
            .find(|v| v.id == id)
            .map_or(TrendStatus::NotEvaluated, |v| v.status)
    }

    /// No evaluated trend failed.
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != TrendStatus::Fail)
    }

    /// Merges verdicts from several reports; a trend fails if it failed
    /// anywhere and passes if it passed somewhere and never failed.
    pub fn merge(reports: &[TrendReport]) -> TrendReport {
        let mut by_id: BTreeMap<TrendId, TrendVerdict> = BTreeMap::new();
        for v in reports.iter().flat_map(|r| r.verdicts.iter()) {
            let entry = by_id.entry(v.id).or_insert_with(|| v.clone());
            let rank = |s: TrendStatus| match s {
                TrendStatus::NotEvaluated => 0,
                TrendStatus::Pass => 1,
                TrendStatus::Fail => 2,
            };
            if rank(v.status) > rank(entry.status) {
                *entry = v.clone();
            }
        }
        TrendReport {
            verdicts: by_id.into_values().collect(),
        }
    }
}

impl fmt::Display for TrendReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.verdicts.iter().enumerate() {
            let status = match v.status {
                TrendStatus::Pass => "PASS",
                TrendStatus::Fail => "FAIL",
                TrendStatus::NotEvaluated => "SKIP",
            };
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{:?} {status}: {} [{}]", v.id, v.id.description(), v.detail)?;
        }
        Ok(())
    }
}

type Curve = Vec<(f64, f64)>;

/// Groups rows into families of load curves that differ only along `axis`.
/// Each family maps the axis value (as ordered bits) to its curve sorted by G.
fn families(rows: &[ResultRow], axis: SweepParam) -> Vec<BTreeMap<OrdF64, Curve>> {
    let mut fams: HashMap<Vec<u64>, BTreeMap<OrdF64, Curve>> = HashMap::new();
    for row in rows.iter().filter(|r| r.error.is_none()) {
        let Some(s) = row.throughput() else { continue };
        let key = row.inputs.key_without(&[axis, SweepParam::LoadG]);
        fams.entry(key)
            .or_default()
            .entry(OrdF64(row.inputs.get(axis)))
            .or_default()
            .push((row.inputs.load_g, s));
    }
    let mut out: Vec<_> = fams.into_values().collect();
    for fam in &mut out {
        for curve in fam.values_mut() {
            curve.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }
    out.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Grid point with the largest throughput.
pub(crate) fn grid_argmax(curve: &[(f64, f64)]) -> (f64, f64) {
    curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
}

fn usable(fam: &BTreeMap<OrdF64, Curve>) -> bool {
    fam.len() >= 2 && fam.values().all(|c| c.len() >= 3)
}

fn verdict(id: TrendId, checks: Vec<(bool, String)>) -> TrendVerdict {
    if checks.is_empty() {
        return TrendVerdict {
            id,
            status: TrendStatus::NotEvaluated,
            detail: "sweep lacks the required axes".into(),
        };
    }
    let ok = checks.iter().all(|c| c.0);
    let detail = checks.into_iter().map(|c| c.1).collect::<Vec<_>>().join("; ");
    TrendVerdict {
        id,
        status: if ok { TrendStatus::Pass } else { TrendStatus::Fail },
        detail,
    }
}

fn fmt_list(v: &[(f64, f64)]) -> String {
    v.iter().map(|(a, b)| format!("{a}:{b:.4}")).collect::<Vec<_>>().join(", ")
}

/// `G_opt` (or peak S when `use_peak`) strictly increasing along the axis.
fn increasing_along(rows: &[ResultRow], axis: SweepParam, only_k: Option<u32>, use_peak: bool) -> Vec<(bool, String)> {
    let rows: Vec<ResultRow> = rows
        .iter()
        .filter(|r| only_k.is_none_or(|k| r.inputs.num_relays == k))
        .cloned()
        .collect();
    families(&rows, axis)
        .into_iter()
        .filter(usable)
        .map(|fam| {
            let pts: Vec<(f64, f64)> = fam
                .iter()
                .map(|(a, c)| {
                    let (g, s) = grid_argmax(c);
                    (a.0, if use_peak { s } else { g })
                })
                .collect();
            let ok = pts.windows(2).all(|w| w[1].1 > w[0].1);
            let what = if use_peak { "S_max" } else { "G_opt" };
            (ok, format!("{} -> {what} {}", axis.as_str(), fmt_list(&pts)))
        })
        .collect()
}

fn low_load_penalty(rows: &[ResultRow]) -> Vec<(bool, String)> {
    let mut checks = Vec::new();
    for fam in families(rows, SweepParam::NumRelays) {
        let (Some(one), Some(four)) = (fam.get(&OrdF64(1.0)), fam.get(&OrdF64(4.0))) else {
            continue;
        };
        let mut compared = 0;
        let mut worst = f64::INFINITY;
        for &(g, s1) in one.iter().filter(|p| p.0 <= 0.5) {
            if let Some(&(_, s4)) = four.iter().find(|p| p.0 == g) {
                compared += 1;
                worst = worst.min(s1 - s4);
            }
        }
        if compared > 0 {
            checks.push((
                worst >= 0.0,
                format!("{compared} loads <= 0.5, min S(K=1) - S(K=4) = {worst:.3e}"),
            ));
        }
    }
    checks
}

/// Evaluates T1 to T4 on whatever the rows support. Fails with
/// [`Error::InsufficientData`] when none of them can be evaluated.
pub fn report_trends(rows: &[ResultRow]) -> Result<TrendReport> {
    let verdicts = vec![
        verdict(TrendId::T1, low_load_penalty(rows)),
        verdict(TrendId::T2, increasing_along(rows, SweepParam::NumRelays, None, false)),
        verdict(TrendId::T3, increasing_along(rows, SweepParam::HeightL, None, false)),
        verdict(TrendId::T4, increasing_along(rows, SweepParam::M1, Some(2), true)),
    ];
    if verdicts.iter().all(|v| v.status == TrendStatus::NotEvaluated) {
        return Err(Error::InsufficientData(
            "trend checks need load sweeps grouped by num_relays, height_L or m1".into(),
        ));
    }
    Ok(TrendReport { verdicts })
}

/// The load sweeps the trend checks are designed around, on top of `base`:
/// curves over G for K ∈ {1, 2, 4, 8}, for L ∈ {2, 2.5, 3} m at K = 2, and
/// for m1 ∈ {0.5, 1, 2, 4} at K = 2. Closed-form engine only.
pub fn reference_sweeps(base: &ModelConfig) -> Vec<(&'static str, SweepSpec)> {
    let loads = linspace(0.05, 8.0, 160);
    let at_k2 = {
        let mut b = base.clone();
        b.traffic.num_relays = 2;
        b
    };
    let spec = |group: SweepParam, values: Vec<f64>, base: &ModelConfig| SweepSpec {
        param: SweepParam::LoadG,
        values: loads.clone(),
        group: Some((group, values)),
        base: base.clone(),
        engines: Engines {
            closed_form: true,
            series: false,
            simulation: false,
        },
    };
    vec![
        ("load vs relays", spec(SweepParam::NumRelays, vec![1.0, 2.0, 4.0, 8.0], base)),
        ("load vs height", spec(SweepParam::HeightL, vec![2.0, 2.5, 3.0], &at_k2)),
        ("load vs m1", spec(SweepParam::M1, vec![0.5, 1.0, 2.0, 4.0], &at_k2)),
    ]
}

/// Runs [`reference_sweeps`] and merges their verdicts.
pub fn reference_trends(base: &ModelConfig) -> Result<TrendReport> {
    let mut reports = Vec::new();
    for (_, spec) in reference_sweeps(base) {
        let rows = run_sweep(&spec)?;
        if let Some(bad) = rows.iter().find_map(|r| r.error.as_ref()) {
            return Err(Error::Domain(format!("reference sweep point failed: {bad}")));
        }
        reports.push(report_trends(&rows)?);
    }
    Ok(TrendReport::merge(&reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::PointParams;

    fn synthetic(k: u32, curve: &[(f64, f64)]) -> Vec<ResultRow> {
        let base = PointParams::of(&ModelConfig::default());
        curve
            .iter()
            .map(|&(g, s)| ResultRow {
                param: SweepParam::LoadG,
                value: g,
                group: Some((SweepParam::NumRelays, f64::from(k))),
                inputs: PointParams {
                    load_g: g,
                    num_relays: k,
                    ..base
                },
                eps_vlc: 0.5,
                eps_rf: 0.1,
                s_closed: Some(s),
                s_series: None,
                sim: None,
                method: None,
                error: None,
            })
            .collect()
    }

    #[test]
    fn argmax_of_a_synthetic_unimodal_curve() {
        let curve: Vec<(f64, f64)> = (0..50).map(|i| {
            let g = 0.1 * i as f64;
            (g, -(g - 2.3f64).powi(2))
        }).collect();
        let (g, _) = grid_argmax(&curve);
        assert!((g - 2.3).abs() < 1e-9);
    }

    #[test]
    fn synthetic_families_drive_t2() {
        let bump = |peak: f64| -> Vec<(f64, f64)> {
            (0..40).map(|i| {
                let g = 0.25 * i as f64;
                (g, (-(g - peak).powi(2)).exp())
            }).collect()
        };
        let mut rows = synthetic(1, &bump(1.0));
        rows.extend(synthetic(2, &bump(2.0)));
        rows.extend(synthetic(4, &bump(3.5)));
        let report = report_trends(&rows).unwrap();
        assert_eq!(report.status(TrendId::T2), TrendStatus::Pass);
        assert_eq!(report.status(TrendId::T3), TrendStatus::NotEvaluated);

        let mut rows = synthetic(1, &bump(2.0));
        rows.extend(synthetic(2, &bump(1.0)));
        assert_eq!(report_trends(&rows).unwrap().status(TrendId::T2), TrendStatus::Fail);
    }

    #[test]
    fn missing_axes_is_an_error() {
        let spec = SweepSpec {
            param: SweepParam::Delta,
            values: vec![0.5, 1.0],
            group: None,
            base: ModelConfig::default(),
            engines: Engines::ANALYTIC,
        };
        let rows = run_sweep(&spec).unwrap();
        assert!(matches!(report_trends(&rows), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn reference_sweeps_pass_at_defaults() {
        let report = reference_trends(&ModelConfig::default()).unwrap();
        for id in [TrendId::T1, TrendId::T2, TrendId::T3, TrendId::T4] {
            assert_eq!(report.status(id), TrendStatus::Pass, "{report}");
        }
    }

    #[test]
    fn merge_prefers_failures() {
        let pass = TrendReport {
            verdicts: vec![TrendVerdict { id: TrendId::T1, status: TrendStatus::Pass, detail: String::new() }],
        };
        let fail = TrendReport {
            verdicts: vec![TrendVerdict { id: TrendId::T1, status: TrendStatus::Fail, detail: String::new() }],
        };
        let merged = TrendReport::merge(&[pass.clone(), fail]);
        assert_eq!(merged.status(TrendId::T1), TrendStatus::Fail);
        assert!(TrendReport::merge(&[pass]).all_pass());
    }
}
