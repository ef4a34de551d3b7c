//! Discrete-slot Monte Carlo simulation of the two-hop protocol.
//!
//! Per slot: Poisson(G) users transmit; each relay decodes iff exactly one
//! packet reaches it unerased; each decoding relay forwards in the next
//! slot with probability δ (no buffering); the sink decodes iff exactly one
//! forwarded packet survives the RF hop. A packet decoded in slot `t` is
//! delivered in slot `t + 1`, and is credited to slot `t`.
//!
//! Every slot draws from its own stream keyed by `(seed, slot)`, so in the
//! default full-duplex relay model slots are independent and batches run
//! in parallel with results identical to a serial run.

mod compare;
mod geometry;
mod rng;

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;

pub use compare::{calibrate_threshold, compare_modes, CompareConfig, ModeComparison};
pub use geometry::{grid_layout, Room};
pub use rng::{derive_seed, SlotStreams};

use crate::analytic::SystemConfig;
use crate::error::{Error, Result};
use crate::rf::RfChannelParams;
use crate::vlc::VlcSnrModel;

/// Largest relay count the simulator supports (relay sets are bitmasks).
pub const MAX_SIM_RELAYS: u32 = 64;

const SLOTS_PER_BATCH: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    /// Every (user, relay) pair is erased independently with probability ε_vlc.
    IidErasure,
    /// Users get floor positions; erasure follows from the geometric SNR, so
    /// a user's links to different relays are correlated.
    Geometric,
}

impl SimMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimMode::IidErasure => "iid_erasure",
            SimMode::Geometric => "geometric",
        }
    }
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" | "iid_erasure" => Ok(SimMode::IidErasure),
            "geometric" => Ok(SimMode::Geometric),
            other => Err(Error::config(format!("unknown simulation mode '{other}'"))),
        }
    }
}

/// How a forwarded packet is erased on the RF hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RfErasurePath {
    /// Bernoulli(ε_rf).
    Bernoulli,
    /// Fresh Nakagami SNR draw compared with γ_th^(2).
    Nakagami,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSetup {
    pub vlc: VlcSnrModel,
    pub room: Room,
    /// Floor projections of the relays.
    pub relay_layout: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub system: SystemConfig,
    pub mode: SimMode,
    /// Required in geometric mode.
    pub geometry: Option<GeometricSetup>,
    pub rf: RfChannelParams,
    pub rf_path: RfErasurePath,
    pub num_slots: u64,
    pub seed: u64,
    /// A relay that forwards in a slot cannot receive in that slot.
    pub half_duplex: bool,
}

impl SimConfig {
    /// iid-erasure configuration with Bernoulli RF erasures.
    pub fn iid(system: SystemConfig, rf: RfChannelParams, num_slots: u64, seed: u64) -> Self {
        Self {
            system,
            mode: SimMode::IidErasure,
            geometry: None,
            rf,
            rf_path: RfErasurePath::Bernoulli,
            num_slots,
            seed,
            half_duplex: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.rf.validate()?;
        if self.num_slots == 0 {
            return Err(Error::config("num_slots must be >= 1"));
        }
        if self.system.num_relays > MAX_SIM_RELAYS {
            return Err(Error::config(format!(
                "the simulator supports at most {MAX_SIM_RELAYS} relays, got {}",
                self.system.num_relays
            )));
        }
        if self.mode == SimMode::Geometric {
            let geo = self
                .geometry
                .as_ref()
                .ok_or_else(|| Error::config("geometric mode needs a room and relay layout"))?;
            geo.room.validate()?;
            if geo.relay_layout.len() != self.system.num_relays as usize {
                return Err(Error::config(format!(
                    "relay layout has {} positions but num_relays = {}",
                    geo.relay_layout.len(),
                    self.system.num_relays
                )));
            }
            if let Some(p) = geo.relay_layout.iter().find(|p| !geo.room.contains(**p)) {
                return Err(Error::config(format!("relay at {p:?} lies outside the room")));
            }
            if self.system.gamma_th_vlc.is_none() {
                return Err(Error::config("geometric mode needs gamma_th_vlc"));
            }
        }
        if self.rf_path == RfErasurePath::Nakagami {
            let th = self
                .system
                .gamma_th_rf
                .ok_or_else(|| Error::config("Nakagami RF erasure path needs gamma_th_rf"))?;
            let eps = self.rf.erasure_prob(th)?;
            if (eps - self.system.eps_rf).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "eps_rf = {} is stale: gamma_th_rf = {th} gives {eps}",
                    self.system.eps_rf
                )));
            }
        }
        Ok(())
    }
}

/// What happened in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlotOutcome {
    /// Number of users that transmitted.
    pub arrivals: u32,
    /// Bit `i` set iff relay `i` decoded a packet.
    pub decoded: u64,
    /// Bit `i` set iff relay `i` forwards its packet in the next slot.
    pub forwarded: u64,
    /// Forwarded packets that survived the RF hop.
    pub delivered: u32,
    pub sink_decoded: bool,
}

impl SlotOutcome {
    pub fn relay_decoded(&self, relay: usize) -> bool {
        self.decoded >> relay & 1 == 1
    }

    pub fn forwarded_count(&self) -> u32 {
        self.forwarded.count_ones()
    }
}

/// Sufficient statistics of a run. Integer-valued, so merging batches in
/// any order gives identical results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimStats {
    pub slots: u64,
    pub arrivals: u64,
    pub decodes: u64,
    /// Σ (decodes in slot)².
    pub decodes_sq: u64,
    pub forwarded: u64,
    pub delivered: u64,
    pub sink_successes: u64,
    pub per_relay_decodes: Vec<u64>,
    /// Row-major K×K counts of slots in which relays i and j both decoded.
    pub pair_decodes: Vec<u64>,
}

impl SimStats {
    fn new(k: usize) -> Self {
        Self {
            slots: 0,
            arrivals: 0,
            decodes: 0,
            decodes_sq: 0,
            forwarded: 0,
            delivered: 0,
            sink_successes: 0,
            per_relay_decodes: vec![0; k],
            pair_decodes: vec![0; k * k],
        }
    }

    fn record(&mut self, o: &SlotOutcome) {
        let k = self.per_relay_decodes.len();
        let c = u64::from(o.decoded.count_ones());
        self.slots += 1;
        self.arrivals += u64::from(o.arrivals);
        self.decodes += c;
        self.decodes_sq += c * c;
        self.forwarded += u64::from(o.forwarded_count());
        self.delivered += u64::from(o.delivered);
        self.sink_successes += u64::from(o.sink_decoded);
        let mut bits = o.decoded;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            self.per_relay_decodes[i] += 1;
            let mut rest = bits;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                self.pair_decodes[i * k + j] += 1;
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.slots += other.slots;
        self.arrivals += other.arrivals;
        self.decodes += other.decodes;
        self.decodes_sq += other.decodes_sq;
        self.forwarded += other.forwarded;
        self.delivered += other.delivered;
        self.sink_successes += other.sink_successes;
        for (a, b) in self.per_relay_decodes.iter_mut().zip(other.per_relay_decodes) {
            *a += b;
        }
        for (a, b) in self.pair_decodes.iter_mut().zip(other.pair_decodes) {
            *a += b;
        }
        self
    }

    /// Mean pairwise Pearson correlation of the relays' per-slot decode
    /// indicators. `None` with fewer than two relays or when every pair has
    /// a constant indicator.
    pub fn decode_correlation(&self) -> Option<f64> {
        let k = self.per_relay_decodes.len();
        let n = self.slots as f64;
        let mut total = 0.0;
        let mut pairs = 0usize;
        for i in 0..k {
            for j in (i + 1)..k {
                let pi = self.per_relay_decodes[i] as f64 / n;
                let pj = self.per_relay_decodes[j] as f64 / n;
                let pij = self.pair_decodes[i * k + j] as f64 / n;
                let var = pi * (1.0 - pi) * pj * (1.0 - pj);
                if var > 0.0 {
                    total += (pij - pi * pj) / var.sqrt();
                    pairs += 1;
                }
            }
        }
        (pairs > 0).then(|| total / pairs as f64)
    }
}

/// Simulated throughput with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    /// Packets per slot.
    pub mean: f64,
    pub stderr: f64,
    pub num_slots: u64,
    pub mode: SimMode,
}

impl ThroughputEstimate {
    /// |value − mean| in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean).abs() / self.stderr.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub end_to_end: ThroughputEstimate,
    /// Per-relay uplink throughput.
    pub uplink: ThroughputEstimate,
    pub stats: SimStats,
}

impl SimReport {
    fn from_stats(stats: SimStats, mode: SimMode, k: u32) -> Self {
        let n = stats.slots as f64;
        let p = stats.sink_successes as f64 / n;
        let end_to_end = ThroughputEstimate {
            mean: p,
            stderr: sample_stderr(stats.sink_successes as f64, stats.sink_successes as f64, n),
            num_slots: stats.slots,
            mode,
        };
        // per-slot value is decodes / K
        let k = f64::from(k);
        let uplink = ThroughputEstimate {
            mean: stats.decodes as f64 / (k * n),
            stderr: sample_stderr(stats.decodes as f64 / k, stats.decodes_sq as f64 / (k * k), n),
            num_slots: stats.slots,
            mode,
        };
        Self {
            end_to_end,
            uplink,
            stats,
        }
    }
}

/// Standard error of a mean from Σx and Σx² over `n` observations.
fn sample_stderr(sum: f64, sum_sq: f64, n: f64) -> f64 {
    if n < 2.0 {
        return 0.0;
    }
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (var / n).sqrt()
}

/// Pre-built per-run state shared by all slots.
struct Engine<'a> {
    cfg: &'a SimConfig,
    k: usize,
    arrivals: Option<Poisson<f64>>,
    rf_snr: Gamma<f64>,
    gamma_th_vlc: f64,
    gamma_th_rf: f64,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.system.load_g;
        let arrivals = if g > 0.0 {
            Some(Poisson::new(g).map_err(|e| Error::config(format!("Poisson load {g}: {e}")))?)
        } else {
            None
        };
        Ok(Self {
            cfg,
            k: cfg.system.num_relays as usize,
            arrivals,
            rf_snr: cfg.rf.snr_distribution(),
            gamma_th_vlc: cfg.system.gamma_th_vlc.unwrap_or(f64::NAN),
            gamma_th_rf: cfg.system.gamma_th_rf.unwrap_or(f64::NAN),
        })
    }

    /// Simulates one slot. Relays set in `deaf` receive nothing.
    fn run_slot(&self, rng: &mut ChaCha8Rng, deaf: u64, positions: &mut Vec<(f64, f64)>) -> SlotOutcome {
        let sys = &self.cfg.system;
        let u = match &self.arrivals {
            Some(p) => p.sample(rng) as u32,
            None => 0,
        };

        let mut decoded = 0u64;
        match self.cfg.mode {
            SimMode::IidErasure => {
                for relay in 0..self.k {
                    if deaf >> relay & 1 == 1 {
                        continue;
                    }
                    let mut unerased = 0;
                    for _ in 0..u {
                        if rng.random::<f64>() >= sys.eps_vlc {
                            unerased += 1;
                            if unerased > 1 {
                                break;
                            }
                        }
                    }
                    if unerased == 1 {
                        decoded |= 1 << relay;
                    }
                }
            }
            SimMode::Geometric => {
                let geo = self.cfg.geometry.as_ref().expect("validated geometric setup");
                positions.clear();
                positions.extend((0..u).map(|_| geo.room.sample_position(rng)));
                for (relay, &(rx, ry)) in geo.relay_layout.iter().enumerate() {
                    if deaf >> relay & 1 == 1 {
                        continue;
                    }
                    let mut unerased = 0;
                    for &(x, y) in positions.iter() {
                        if geo.vlc.snr_at_distance((x - rx).hypot(y - ry)) >= self.gamma_th_vlc {
                            unerased += 1;
                            if unerased > 1 {
                                break;
                            }
                        }
                    }
                    if unerased == 1 {
                        decoded |= 1 << relay;
                    }
                }
            }
        }

        let mut forwarded = 0u64;
        let mut bits = decoded;
        while bits != 0 {
            let relay = bits.trailing_zeros();
            bits &= bits - 1;
            if rng.random::<f64>() < sys.forward_prob {
                forwarded |= 1 << relay;
            }
        }

        let mut delivered = 0;
        for _ in 0..forwarded.count_ones() {
            let survives = match self.cfg.rf_path {
                RfErasurePath::Bernoulli => rng.random::<f64>() >= sys.eps_rf,
                RfErasurePath::Nakagami => self.rf_snr.sample(rng) >= self.gamma_th_rf,
            };
            delivered += u32::from(survives);
        }

        SlotOutcome {
            arrivals: u,
            decoded,
            forwarded,
            delivered,
            sink_decoded: delivered == 1,
        }
    }

    fn run_range(&self, streams: &SlotStreams, range: std::ops::Range<u64>, mut deaf: u64) -> SimStats {
        let mut stats = SimStats::new(self.k);
        let mut positions = Vec::new();
        for slot in range {
            let o = self.run_slot(&mut streams.slot(slot), deaf, &mut positions);
            if self.cfg.half_duplex {
                deaf = o.forwarded;
            }
            stats.record(&o);
        }
        stats
    }
}

/// Runs the simulation, in parallel slot batches when the relay model
/// allows it. Deterministic given the seed.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    let engine = Engine::new(cfg)?;
    let streams = SlotStreams::new(cfg.seed);
    let stats = if cfg.half_duplex {
        engine.run_range(&streams, 0..cfg.num_slots, 0)
    } else {
        let batches = cfg.num_slots.div_ceil(SLOTS_PER_BATCH);
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let start = b * SLOTS_PER_BATCH;
                let end = (start + SLOTS_PER_BATCH).min(cfg.num_slots);
                engine.run_range(&streams, start..end, 0)
            })
            .reduce(|| SimStats::new(engine.k), SimStats::merge)
    };
    Ok(SimReport::from_stats(stats, cfg.mode, cfg.system.num_relays))
}

/// Same result as [`simulate`], computed on the calling thread.
pub fn simulate_serial(cfg: &SimConfig) -> Result<SimReport> {
    let engine = Engine::new(cfg)?;
    let stats = engine.run_range(&SlotStreams::new(cfg.seed), 0..cfg.num_slots, 0);
    Ok(SimReport::from_stats(stats, cfg.mode, cfg.system.num_relays))
}

/// Per-slot outcomes in slot order.
pub fn slot_outcomes(cfg: &SimConfig) -> Result<Vec<SlotOutcome>> {
    let engine = Engine::new(cfg)?;
    let streams = SlotStreams::new(cfg.seed);
    let mut positions = Vec::new();
    let mut deaf = 0u64;
    let mut out = Vec::with_capacity(cfg.num_slots.min(1 << 20) as usize);
    for slot in 0..cfg.num_slots {
        let o = engine.run_slot(&mut streams.slot(slot), deaf, &mut positions);
        if cfg.half_duplex {
            deaf = o.forwarded;
        }
        out.push(o);
    }
    Ok(out)
}

/// Writes the per-slot trace as CSV (`slot,arrivals,decoded,forwarded,delivered,sink_decoded`,
/// relay sets as bit strings with relay 0 first).
pub fn write_trace_csv(cfg: &SimConfig, path: &Path) -> Result<()> {
    let outcomes = slot_outcomes(cfg)?;
    let k = cfg.system.num_relays as usize;
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    let bits = |mask: u64| -> String { (0..k).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect() };
    writeln!(w, "slot,arrivals,decoded,forwarded,delivered,sink_decoded").map_err(io_err)?;
    for (slot, o) in outcomes.iter().enumerate() {
        writeln!(
            w,
            "{slot},{},{},{},{},{}",
            o.arrivals,
            bits(o.decoded),
            bits(o.forwarded),
            o.delivered,
            u8::from(o.sink_decoded)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Empirical optical erasure probability at relay 0 of a geometric setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureEstimate {
    pub probability: f64,
    pub stderr: f64,
    pub draws: u64,
}

/// Fraction of `draws` uniformly placed users whose SNR at relay 0 falls
/// below `gamma_th`. With a single relay at the centre of a disk room of
/// radius r_m this estimates the closed-form optical erasure probability.
pub fn estimate_eps_vlc_geometric(geo: &GeometricSetup, gamma_th: f64, draws: u64, seed: u64) -> Result<ErasureEstimate> {
    geo.room.validate()?;
    let &(rx, ry) = geo
        .relay_layout
        .first()
        .ok_or_else(|| Error::config("geometric setup has no relays"))?;
    if draws == 0 {
        return Err(Error::config("draws must be >= 1"));
    }
    let mut rng = SlotStreams::new(seed).slot(0);
    let erased = (0..draws)
        .filter(|_| {
            let (x, y) = geo.room.sample_position(&mut rng);
            geo.vlc.snr_at_distance((x - rx).hypot(y - ry)) < gamma_th
        })
        .count() as f64;
    let n = draws as f64;
    let p = erased / n;
    Ok(ErasureEstimate {
        probability: p,
        stderr: (p * (1.0 - p) / n).sqrt(),
        draws,
    })
}
