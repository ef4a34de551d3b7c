//! Side-by-side run of the independent-erasure and geometric modes.
//!
//! The analytic model treats a user's links to different relays as
//! independent. The geometric mode keeps the shared user position, so
//! comparing the two at the same marginal erasure probability shows what
//! that independence assumption costs.

use std::fmt;

use super::{
    simulate, GeometricSetup, RfErasurePath, SimConfig, SimMode, SimReport,
    SlotStreams,
};
use crate::analytic::{end_to_end_closed_form, SystemConfig};
use crate::error::{Error, Result};
use crate::rf::RfChannelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    /// `eps_vlc` is the target marginal erasure probability for both modes.
    pub system: SystemConfig,
    pub geometry: GeometricSetup,
    pub rf: RfChannelParams,
    pub num_slots: u64,
    pub seed: u64,
    /// User positions drawn to calibrate the geometric threshold.
    pub calibration_draws: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub target_eps_vlc: f64,
    /// Optical threshold that gives the geometric mode the target marginal.
    pub calibrated_gamma_th: f64,
    pub analytic: f64,
    pub iid: SimReport,
    pub geometric: SimReport,
}

impl ModeComparison {
    pub fn iid_correlation(&self) -> Option<f64> {
        self.iid.stats.decode_correlation()
    }

    pub fn geometric_correlation(&self) -> Option<f64> {
        self.geometric.stats.decode_correlation()
    }

    /// Difference between the modes in units of their combined standard error.
    pub fn gap_z(&self) -> f64 {
        let a = self.iid.end_to_end;
        let b = self.geometric.end_to_end;
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        (a.mean - b.mean).abs() / se.max(f64::MIN_POSITIVE)
    }
}

impl fmt::Display for ModeComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let corr = |c: Option<f64>| c.map_or("n/a".to_string(), |c| format!("{c:.4}"));
        writeln!(f, "target eps_vlc          {:.6}", self.target_eps_vlc)?;
        writeln!(f, "calibrated gamma_th_vlc {:.6e}", self.calibrated_gamma_th)?;
        writeln!(f, "analytic S              {:.6}", self.analytic)?;
        for (name, r) in [("iid", &self.iid), ("geometric", &self.geometric)] {
            writeln!(
                f,
                "{name:<10} S = {:.6} ± {:.6}  uplink = {:.6} ± {:.6}  decode corr = {}",
                r.end_to_end.mean,
                r.end_to_end.stderr,
                r.uplink.mean,
                r.uplink.stderr,
                corr(r.stats.decode_correlation())
            )?;
        }
        write!(f, "mode gap                {:.2} sigma", self.gap_z())
    }
}

/// Threshold at which a fraction `eps` of (user, relay) links in the
/// geometric setup are erased, from `draws` user positions pooled over all
/// relays.
pub fn calibrate_threshold(geo: &GeometricSetup, eps: f64, draws: u64, seed: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::config(format!("target erasure probability {eps} outside [0, 1]")));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    if eps == 1.0 {
        return Ok(f64::INFINITY);
    }
    if draws == 0 || geo.relay_layout.is_empty() {
        return Err(Error::config("calibration needs at least one draw and one relay"));
    }
    let mut rng = SlotStreams::new(seed).slot(0);
    let mut snrs = Vec::with_capacity(draws as usize * geo.relay_layout.len());
    for _ in 0..draws {
        let (x, y) = geo.room.sample_position(&mut rng);
        snrs.extend(
            geo.relay_layout
                .iter()
                .map(|&(rx, ry)| geo.vlc.snr_at_distance((x - rx).hypot(y - ry))),
        );
    }
    let idx = ((eps * snrs.len() as f64) as usize).min(snrs.len() - 1);
    let (_, th, _) = snrs.select_nth_unstable_by(idx, f64::total_cmp);
    Ok(*th)
}

/// Runs both modes at matched marginal erasure and reports throughput and
/// cross-relay decode correlation for each.
pub fn compare_modes(cfg: &CompareConfig) -> Result<ModeComparison> {
    cfg.system.validate()?;
    let eps = cfg.system.eps_vlc;
    let th = calibrate_threshold(&cfg.geometry, eps, cfg.calibration_draws, super::derive_seed(cfg.seed, 1))?;

    let mut sys = cfg.system;
    sys.gamma_th_vlc = Some(th);
    let base = SimConfig {
        system: sys,
        mode: SimMode::IidErasure,
        geometry: Some(cfg.geometry.clone()),
        rf: cfg.rf,
        rf_path: RfErasurePath::Bernoulli,
        num_slots: cfg.num_slots,
        seed: cfg.seed,
        half_duplex: false,
    };
    let iid = simulate(&base)?;
    let geometric = simulate(&SimConfig {
        mode: SimMode::Geometric,
        ..base.clone()
    })?;
    Ok(ModeComparison {
        target_eps_vlc: eps,
        calibrated_gamma_th: th,
        analytic: end_to_end_closed_form(&cfg.system)?.value,
        iid,
        geometric,
    })
}
