//! Scenario files: a JSON description of who transmits where, over which
//! channel, next to which interferers, and what to measure.
//!
//! A minimal file:
//!
//! ```json
//! {
//!   "name": "single-498",
//!   "users": [
//!     { "bandwidth_khz": 498, "center_offsets_hz": [0.0], "modulation": "QPSK", "waveform": "Ref-OFDM" }
//!   ],
//!   "channel_scenario": "ENR",
//!   "snr_grid_db": [0, 5, 10],
//!   "seeds": [1],
//!   "outputs": "out/single-498"
//! }
//! ```
//!
//! Optional sections (`dme`, `ggi`, `channel_override`, `monte_carlo`, `psd`,
//! `interference`, `async_offset_max_samples`) fall back to defaults.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use refofdm::channel::{build_channel, ChannelProfile, Scenario, DEFAULT_CARRIER_HZ};
use refofdm::interference::{DmeSignalParams, GgiParams, DME_ALPHA, DME_DEFAULT_RATE_PPS, DME_DELTA_T};
use refofdm::phy::{Modulation, Waveform};
use refofdm::{Bandwidth, BASE_SAMPLE_RATE_HZ, OUTPUT_SAMPLE_RATE_HZ};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Spectral guard kept clear on each side of every band.
pub const GUARD_HZ: f64 = 25e3;

/// Largest DFT filter bank searched when placing multi-band centres.
pub const MAX_BRANCHES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub bandwidth_khz: u32,
    /// One entry per band; more than one makes a multi-band user.
    pub center_offsets_hz: Vec<f64>,
    pub modulation: Modulation,
    pub waveform: Waveform,
}

impl UserSpec {
    pub fn label(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("user{index}"))
    }
}

/// DME interferer. `center_offset_hz` is absolute (same axis as the user
/// centres). With `sir_db` set, the amplitude is rescaled so the first
/// user's signal sits `sir_db` above the DME mean power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmeSpec {
    pub center_offset_hz: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "default_rate")]
    pub pulse_pair_rate_pps: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_delta_t")]
    pub delta_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sir_db: Option<f64>,
}

impl DmeSpec {
    pub fn params(&self) -> DmeSignalParams {
        DmeSignalParams {
            alpha: self.alpha,
            delta_t: self.delta_t,
            amplitude: self.amplitude,
            center_offset_hz: self.center_offset_hz,
            pulse_pair_rate_pps: self.pulse_pair_rate_pps,
        }
    }
}

/// Replaces parts of the tabulated channel profile. Tap powers are
/// normalized to unit sum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tap_delays_samples: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tap_powers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rician_k_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    /// Errors per user and SNR point (summed over seeds) before stopping.
    pub target_errors: u64,
    /// Bit budget per user and SNR point (summed over seeds).
    pub max_bits: u64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self { target_errors: 100, max_bits: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdSpec {
    pub segment_length: usize,
    pub overlap: f64,
    /// Samples of transmitted signal analysed per user.
    pub samples: usize,
}

impl Default for PsdSpec {
    fn default() -> Self {
        Self { segment_length: 1024, overlap: 0.5, samples: 1 << 18 }
    }
}

/// DME receivers probed at `bandwidth/2 + m·r` above each user's upper
/// band centre, each integrating `±r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceSpec {
    pub r_hz: f64,
    pub multiples: Vec<u32>,
}

impl Default for InterferenceSpec {
    fn default() -> Self {
        Self { r_hz: 50e3, multiples: vec![1, 2, 3, 4, 5, 6] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub users: Vec<UserSpec>,
    pub channel_scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_override: Option<ChannelOverride>,
    #[serde(default)]
    pub dme: Option<DmeSpec>,
    /// `power` is relative to the first user's signal power.
    #[serde(default)]
    pub ggi: Option<GgiParams>,
    pub snr_grid_db: Vec<f64>,
    pub seeds: Vec<u64>,
    pub outputs: PathBuf,
    #[serde(default)]
    pub monte_carlo: MonteCarloSpec,
    #[serde(default)]
    pub psd: PsdSpec,
    #[serde(default)]
    pub interference: InterferenceSpec,
    /// Users start their frames at independent uniform offsets in
    /// `0..async_offset_max_samples` (output-rate samples).
    #[serde(default = "default_async")]
    pub async_offset_max_samples: usize,
}

fn one() -> f64 {
    1.0
}
fn default_rate() -> f64 {
    DME_DEFAULT_RATE_PPS
}
fn default_alpha() -> f64 {
    DME_ALPHA
}
fn default_delta_t() -> f64 {
    DME_DELTA_T
}
fn default_name() -> String {
    "scenario".into()
}
fn default_async() -> usize {
    256
}

/// A band occupied by one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupancy {
    pub user: usize,
    pub center_hz: f64,
    pub bandwidth_hz: f64,
}

impl Occupancy {
    fn guarded(&self) -> (f64, f64) {
        let half = self.bandwidth_hz / 2.0 + GUARD_HZ;
        (self.center_hz - half, self.center_hz + half)
    }
}

/// Smallest DFT filter bank whose branch grid contains every centre, with
/// the matching branch indices.
pub fn branch_plan(centers_hz: &[f64]) -> Option<(usize, BTreeSet<usize>)> {
    let nyquist = BASE_SAMPLE_RATE_HZ / 2.0;
    'outer: for k_b in 1..=MAX_BRANCHES {
        let mut set = BTreeSet::new();
        for &c in centers_hz {
            let x = (c / nyquist + 1.0) * k_b as f64 / 2.0;
            let k = x.round();
            if (x - k).abs() > 1e-9 || k < 0.0 || k as usize >= k_b {
                continue 'outer;
            }
            set.insert(k as usize);
        }
        if set.len() == centers_hz.len() {
            return Some((k_b, set));
        }
    }
    None
}

impl ScenarioSpec {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ScenarioSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let inner = e.into_inner();
            HarnessError::Parse {
                path: origin.to_path_buf(),
                line: inner.line(),
                column: inner.column(),
                key,
                message: inner.to_string(),
            }
        })?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Every band of every user, in user order.
    pub fn occupancy(&self) -> Vec<Occupancy> {
        self.users
            .iter()
            .enumerate()
            .flat_map(|(i, u)| {
                u.center_offsets_hz
                    .iter()
                    .map(move |&c| Occupancy { user: i, center_hz: c, bandwidth_hz: u.bandwidth_khz as f64 * 1e3 })
            })
            .collect()
    }

    /// The channel profile at the output rate, with any override applied.
    pub fn channel_profile(&self) -> ChannelProfile {
        let mut p = build_channel(self.channel_scenario, OUTPUT_SAMPLE_RATE_HZ, DEFAULT_CARRIER_HZ);
        if let Some(o) = &self.channel_override {
            if let Some(d) = &o.tap_delays_samples {
                p.tap_delays_samples = d.clone();
                p.tap_count = d.len();
                if o.tap_powers.is_none() {
                    p.tap_powers = refofdm::channel::exponential_profile(d.len());
                }
            }
            if let Some(w) = &o.tap_powers {
                let total: f64 = w.iter().sum();
                p.tap_powers = w.iter().map(|v| v / total).collect();
            }
            if let Some(k) = o.rician_k_db {
                p.rician_k_db = k;
            }
            if let Some(fd) = o.doppler_hz {
                p.doppler_hz = fd;
            }
        }
        p
    }

    /// Collects every problem rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.users.is_empty() {
            errs.push("users: at least one user is required".to_string());
        }
        let nyquist = BASE_SAMPLE_RATE_HZ / 2.0;
        for (i, u) in self.users.iter().enumerate() {
            let at = format!("users[{i}] ({})", u.label(i));
            if Bandwidth::from_khz(u.bandwidth_khz).is_err() {
                errs.push(format!("{at}.bandwidth_khz: {} kHz is not one of 186, 264, 342, 420, 498, 576, 654, 732", u.bandwidth_khz));
            }
            if u.center_offsets_hz.is_empty() {
                errs.push(format!("{at}.center_offsets_hz: at least one band centre is required"));
            }
            for (j, &c) in u.center_offsets_hz.iter().enumerate() {
                let edge = c.abs() + u.bandwidth_khz as f64 * 5e2;
                if !c.is_finite() || edge > nyquist {
                    errs.push(format!("{at}.center_offsets_hz[{j}]: band at {c} Hz extends beyond ±{nyquist} Hz"));
                }
            }
            if u.center_offsets_hz.len() > 1 && u.waveform == Waveform::RefOfdm && branch_plan(&u.center_offsets_hz).is_none() {
                errs.push(format!("{at}.center_offsets_hz: centres do not fit a DFT filter bank of at most {MAX_BRANCHES} branches"));
            }
        }

        let bands = self.occupancy();
        for (a, ba) in bands.iter().enumerate() {
            for bb in &bands[a + 1..] {
                let (lo_a, hi_a) = ba.guarded();
                let (lo_b, hi_b) = bb.guarded();
                if lo_a < hi_b && lo_b < hi_a {
                    let (ua, ub) = (&self.users[ba.user], &self.users[bb.user]);
                    let who = if ba.user == bb.user {
                        format!("users[{}] ({}) overlaps itself", ba.user, ua.label(ba.user))
                    } else {
                        format!(
                            "users[{}] ({}) and users[{}] ({}) overlap",
                            ba.user,
                            ua.label(ba.user),
                            bb.user,
                            ub.label(bb.user)
                        )
                    };
                    errs.push(format!(
                        "{who}: bands at {} Hz and {} Hz are closer than their half-widths plus {GUARD_HZ} Hz guards",
                        ba.center_hz, bb.center_hz
                    ));
                }
            }
        }

        if self.snr_grid_db.is_empty() {
            errs.push("snr_grid_db: at least one SNR point is required".into());
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            errs.push("snr_grid_db: NaN entries are not allowed".into());
        }
        if self.seeds.is_empty() {
            errs.push("seeds: at least one seed is required".into());
        }
        if let Some(d) = &self.dme {
            if let Err(e) = d.params().validate() {
                errs.push(format!("dme: {e}"));
            }
        }
        if let Some(g) = &self.ggi {
            if let Err(e) = g.on_samples() {
                errs.push(format!("ggi: {e}"));
            }
            if !(g.power >= 0.0) {
                errs.push("ggi.power: must be non-negative".into());
            }
        }
        if let Some(o) = &self.channel_override {
            let p = self.channel_profile();
            if p.tap_delays_samples.len() != p.tap_powers.len() || p.tap_powers.is_empty() {
                errs.push("channel_override: tap_delays_samples and tap_powers must have the same non-zero length".into());
            }
            if o.tap_powers.as_ref().is_some_and(|w| w.iter().any(|&v| v < 0.0) || w.iter().sum::<f64>() <= 0.0) {
                errs.push("channel_override.tap_powers: must be non-negative with a positive sum".into());
            }
        }
        if self.monte_carlo.max_bits == 0 {
            errs.push("monte_carlo.max_bits: must be positive".into());
        }
        if self.psd.segment_length < 2 || self.psd.samples < self.psd.segment_length {
            errs.push("psd: need 2 ≤ segment_length ≤ samples".into());
        }
        if !(0.0..1.0).contains(&self.psd.overlap) {
            errs.push("psd.overlap: must lie in [0, 1)".into());
        }
        if !(self.interference.r_hz > 0.0) {
            errs.push("interference.r_hz: must be positive".into());
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Validation(errs))
        }
    }
}

/// Reads, parses and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let spec = ScenarioSpec::from_json(&text, path)?;
    spec.validate()?;
    Ok(spec)
}
