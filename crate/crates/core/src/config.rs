//! Run configuration: reference defaults, a TOML file format, and the
//! resolution of user-facing units (degrees, cm², dB) into model objects.
//!
//! File grammar (TOML subset; every key optional):
//!
//! ```toml
//! [vlc]
//! fov_deg = 90.0
//! area_cm2 = 1.0
//! responsivity = 0.4
//! filter_gain = 1.0
//! refractive_index = 1.5
//! half_angle_deg = 45.0
//! height_m = 2.5
//! tx_power_w = 1.0
//! oe_efficiency = 0.8
//! noise_psd = 1e-21
//! bandwidth_hz = 20e6
//! gamma_th_db = 23.0
//!
//! [rf]
//! m1 = 2.0
//! mu_rf_db = 10.0
//! gamma_th_db = 3.0
//!
//! [traffic]
//! load_g = 1.0
//! num_relays = 2
//! forward_prob = 1.0
//! # eps_vlc = 0.3   # overrides the threshold-derived value
//! # eps_rf = 0.1
//!
//! [sim]
//! slots = 1000000
//! seed = 1
//! mode = "iid"          # or "geometric"
//! rf_path = "bernoulli" # or "nakagami"
//! half_duplex = false
//! room_width_m = 5.0
//! room_depth_m = 5.0
//! tail_tol = 1e-12
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::analytic::{SystemConfig, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::rf::RfChannelParams;
use crate::sim::{grid_layout, CompareConfig, GeometricSetup, RfErasurePath, Room, SimConfig, SimMode};
use crate::vlc::{db_to_linear, VlcChannel, VlcChannelParams, VlcSnrModel, VlcSnrParams};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VlcSection {
    pub fov_deg: f64,
    pub area_cm2: f64,
    pub responsivity: f64,
    pub filter_gain: f64,
    pub refractive_index: f64,
    pub half_angle_deg: f64,
    pub height_m: f64,
    pub tx_power_w: f64,
    pub oe_efficiency: f64,
    pub noise_psd: f64,
    pub bandwidth_hz: f64,
    pub gamma_th_db: f64,
}

impl Default for VlcSection {
    fn default() -> Self {
        Self {
            fov_deg: 90.0,
            area_cm2: 1.0,
            responsivity: 0.4,
            filter_gain: 1.0,
            refractive_index: 1.5,
            half_angle_deg: 45.0,
            height_m: 2.5,
            tx_power_w: 1.0,
            oe_efficiency: 0.8,
            noise_psd: 1e-21,
            bandwidth_hz: 20e6,
            gamma_th_db: 23.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSection {
    pub m1: f64,
    pub mu_rf_db: f64,
    pub gamma_th_db: f64,
}

impl Default for RfSection {
    fn default() -> Self {
        Self {
            m1: 2.0,
            mu_rf_db: 10.0,
            gamma_th_db: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub load_g: f64,
    pub num_relays: u32,
    pub forward_prob: f64,
    pub eps_vlc: Option<f64>,
    pub eps_rf: Option<f64>,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            load_g: 1.0,
            num_relays: 2,
            forward_prob: 1.0,
            eps_vlc: None,
            eps_rf: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub slots: u64,
    pub seed: u64,
    pub mode: String,
    pub rf_path: String,
    pub half_duplex: bool,
    pub room_width_m: f64,
    pub room_depth_m: f64,
    pub tail_tol: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            slots: 1_000_000,
            seed: 1,
            mode: "iid".into(),
            rf_path: "bernoulli".into(),
            half_duplex: false,
            room_width_m: 5.0,
            room_depth_m: 5.0,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

/// Everything needed to evaluate one operating point with any engine.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub vlc: VlcSection,
    pub rf: RfSection,
    pub traffic: TrafficSection,
    pub sim: SimSection,
}

/// A [`ModelConfig`] turned into validated model objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPoint {
    pub system: SystemConfig,
    pub vlc: VlcSnrModel,
    pub rf: RfChannelParams,
}

impl ModelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Reads the optional file, then applies `section.key=value` overrides
    /// on top of it. Override values use TOML syntax; bare words are taken
    /// as strings.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override '{item}' is not key=value")))?;
            let (section, name) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| Error::config(format!("override key '{key}' is not section.key")))?;
            let raw = raw.trim();
            let value = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(sec) = entry else {
                return Err(Error::config(format!("'{section}' is not a section")));
            };
            sec.insert(name.to_string(), value);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.to_string()))
    }

    pub fn vlc_params(&self) -> VlcChannelParams {
        let v = &self.vlc;
        VlcChannelParams {
            fov_psi_max: v.fov_deg.to_radians(),
            area: v.area_cm2 * 1e-4,
            responsivity: v.responsivity,
            filter_gain: v.filter_gain,
            refractive_index: v.refractive_index,
            half_angle: v.half_angle_deg.to_radians(),
            height: v.height_m,
        }
    }

    pub fn resolve(&self) -> Result<ResolvedPoint> {
        let channel = VlcChannel::new(self.vlc_params())?;
        let vlc = VlcSnrModel::new(
            channel,
            VlcSnrParams {
                tx_power: self.vlc.tx_power_w,
                oe_efficiency: self.vlc.oe_efficiency,
                noise_psd: self.vlc.noise_psd,
                bandwidth: self.vlc.bandwidth_hz,
            },
        )?;
        let rf = RfChannelParams::new(self.rf.m1, db_to_linear(self.rf.mu_rf_db))?;
        let th_vlc = db_to_linear(self.vlc.gamma_th_db);
        let th_rf = db_to_linear(self.rf.gamma_th_db);
        let t = &self.traffic;
        let eps_vlc = match t.eps_vlc {
            Some(e) => e,
            None => vlc.erasure_prob(th_vlc)?,
        };
        let eps_rf = match t.eps_rf {
            Some(e) => e,
            None => rf.erasure_prob(th_rf)?,
        };
        let mut system = SystemConfig::new(t.load_g, t.num_relays, t.forward_prob, eps_vlc, eps_rf)?;
        // a directly given erasure probability is not tied to a threshold
        system.gamma_th_vlc = t.eps_vlc.is_none().then_some(th_vlc);
        system.gamma_th_rf = t.eps_rf.is_none().then_some(th_rf);
        Ok(ResolvedPoint { system, vlc, rf })
    }

    /// Simulation configuration for this point. Geometric mode scatters users
    /// over the configured rectangle with relays on a grid.
    pub fn sim_config(&self, point: &ResolvedPoint, seed: u64) -> Result<SimConfig> {
        let mode: SimMode = self.sim.mode.parse()?;
        let rf_path = match self.sim.rf_path.as_str() {
            "bernoulli" => RfErasurePath::Bernoulli,
            "nakagami" => RfErasurePath::Nakagami,
            other => return Err(Error::config(format!("unknown rf_path '{other}'"))),
        };
        let (w, d) = (self.sim.room_width_m, self.sim.room_depth_m);
        let geometry = (mode == SimMode::Geometric).then(|| GeometricSetup {
            vlc: point.vlc,
            room: Room::Rectangle { width: w, depth: d },
            relay_layout: grid_layout(point.system.num_relays as usize, w, d),
        });
        let cfg = SimConfig {
            system: point.system,
            mode,
            geometry,
            rf: point.rf,
            rf_path,
            num_slots: self.sim.slots,
            seed,
            half_duplex: self.sim.half_duplex,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Mode comparison at this point. The target marginal erasure is the
    /// point's `eps_vlc`; the room is the configured rectangle.
    pub fn compare_config(&self, point: &ResolvedPoint, seed: u64, calibration_draws: u64) -> Result<CompareConfig> {
        let mut geometric = self.clone();
        geometric.sim.mode = "geometric".into();
        let sim = geometric.sim_config(point, seed)?;
        Ok(CompareConfig {
            system: point.system,
            geometry: sim.geometry.expect("geometric mode carries a geometry"),
            rf: point.rf,
            num_slots: self.sim.slots,
            seed,
            calibration_draws,
        })
    }
}
