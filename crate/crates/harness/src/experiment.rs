//! Scenario execution: every user transmits its own frames, each through an
//! independent channel realization and timing offset; the superposition
//! (plus DME and GGI) is received once per user with that user's noise.

use std::collections::BTreeSet;

use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use refofdm::analysis::ber::{mix_seed, BATCH};
use refofdm::analysis::complexity::{complexity_report, ComplexityWaveform};
use refofdm::analysis::psd::{estimate_psd, interference_at, SpectrumGrid};
use refofdm::analysis::theory::{theoretical_ber, DmeTheory, TheoryConfig};
use refofdm::analysis::BerCurve;
use refofdm::channel::{add_noise, propagate, realize_fading, ChannelProfile};
use refofdm::interference::{generate_dme_stream, generate_ggi, GgiParams};
use refofdm::phy::{receive, transmit, ReceiverOptions, TxConfig, Waveform};
use refofdm::{Bandwidth, Complex, ComplexSignal, BASE_SAMPLE_RATE_HZ, OUTPUT_SAMPLE_RATE_HZ};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::scenario::{branch_plan, ScenarioSpec, UserSpec};

/// Silence before the earliest frame start, output-rate samples.
pub const LEAD_IN: usize = 64;
/// Silence after the latest frame end.
pub const TAIL: usize = 256;
/// Band counts tabulated in the complexity report.
pub const COMPLEXITY_BANDS: [usize; 3] = [1, 2, 4];
/// Subcarriers assumed by the complexity report.
pub const COMPLEXITY_SUBCARRIERS: usize = 128;

/// Where the numbers came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub scenario: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub version: String,
}

impl Provenance {
    /// The hash covers everything that shapes the results; the output
    /// directory does not, so it is blanked first.
    pub fn for_spec(spec: &ScenarioSpec) -> Self {
        let hashed = ScenarioSpec { outputs: Default::default(), ..spec.clone() };
        Self {
            scenario: spec.name.clone(),
            config_sha256: hex::encode(Sha256::digest(hashed.to_json().as_bytes())),
            seeds: spec.seeds.clone(),
            version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserReport {
    pub name: String,
    pub bandwidth_khz: u32,
    pub waveform: Waveform,
    pub center_offsets_hz: Vec<f64>,
    pub ber: Option<BerCurve>,
    /// Mean data-cell EVM per SNR point (dB), over decoded frames.
    pub mean_evm_db: Vec<f64>,
    /// Frames that could not be located or equalized (scored at BER ½).
    pub lost_frames: u64,
    /// Why this user produced no results, if it failed.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceRow {
    pub user: String,
    /// DME centre relative to the user's upper band centre.
    pub offset_hz: f64,
    /// Power inside `offset ± r`, relative to the user's total power (dB).
    pub interference_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub waveform: ComplexityWaveform,
    pub k_bands: usize,
    pub mults: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRow {
    pub user: String,
    pub curve: BerCurve,
    pub warnings: Vec<String>,
}

/// Results of one invocation; sections a subcommand did not compute stay
/// empty and are not written.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub users: Vec<UserReport>,
    pub snr_grid_db: Vec<f64>,
    #[serde(skip)]
    pub spectrum: Option<SpectrumGrid>,
    pub interference: Vec<InterferenceRow>,
    pub complexity: Vec<ComplexityRow>,
    pub theory: Vec<TheoryRow>,
}

impl RunReport {
    pub fn empty(spec: &ScenarioSpec) -> Self {
        Self {
            provenance: Provenance::for_spec(spec),
            users: Vec::new(),
            snr_grid_db: spec.snr_grid_db.clone(),
            spectrum: None,
            interference: Vec::new(),
            complexity: Vec::new(),
            theory: Vec::new(),
        }
    }
}

/// One transmitter of a user: a configuration and the frequency shift
/// applied after it.
#[derive(Debug, Clone)]
pub struct Link {
    pub tx: TxConfig,
    pub shift_hz: f64,
}

/// The transmitters realizing `user`. Multi-band Ref-OFDM users get one
/// DFT filter bank; plain OFDM has no filter, so each band is its own
/// shifted frame.
pub fn user_links(user: &UserSpec) -> Result<Vec<Link>> {
    let bw = Bandwidth::from_khz(user.bandwidth_khz)?;
    if user.waveform == Waveform::RefOfdm && user.center_offsets_hz.len() > 1 {
        let (branches, active) = branch_plan(&user.center_offsets_hz)
            .ok_or_else(|| HarnessError::Runtime("band centres do not fit a DFT filter bank".into()))?;
        let tx = TxConfig::multiband(bw, user.modulation, branches, &active)?;
        return Ok(vec![Link { tx, shift_hz: 0.0 }]);
    }
    user.center_offsets_hz
        .iter()
        .map(|&c| Ok(Link { tx: TxConfig::new(bw, user.modulation, user.waveform)?, shift_hz: c }))
        .collect()
}

/// One frame of `user_index`: the output-rate IQ (all bands) and the
/// payload of each link. Depends only on this user's links and the seed,
/// so other users never change it.
pub fn user_transmission(links: &[Link], seed: u64, user_index: usize, frame: u64) -> Result<(ComplexSignal, Vec<Vec<u8>>)> {
    let mut out: Option<ComplexSignal> = None;
    let mut payloads = Vec::with_capacity(links.len());
    for (l, link) in links.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, user_index as u64, frame, l as u64]));
        let payload: Vec<u8> = (0..link.tx.payload_bits()).map(|_| rng.random_range(0..2u8)).collect();
        let mut sig = transmit(&link.tx, &payload)?;
        if link.shift_hz != 0.0 {
            sig.frequency_shift(link.shift_hz, 0);
        }
        match &mut out {
            None => out = Some(sig),
            Some(acc) => {
                if acc.len() < sig.len() {
                    acc.samples.resize(sig.len(), Complex::new(0.0, 0.0));
                }
                acc.add_at(&sig.samples, 0);
            }
        }
        payloads.push(payload);
    }
    let sig = out.ok_or_else(|| HarnessError::Runtime("user has no bands".into()))?;
    Ok((sig, payloads))
}

struct Prepared {
    links: Vec<Link>,
    bits_per_symbol: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    errors: u64,
    bits: u64,
    evm_lin: f64,
    evm_frames: u64,
    lost: u64,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.errors += o.errors;
        self.bits += o.bits;
        self.evm_lin += o.evm_lin;
        self.evm_frames += o.evm_frames;
        self.lost += o.lost;
    }
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64 + a.len().abs_diff(b.len()) as u64
}

fn mean_evm_lin(evm_db: &[f64]) -> Option<f64> {
    let v: Vec<f64> = evm_db.iter().filter(|x| x.is_finite()).map(|d| 10f64.powf(d / 10.0)).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

struct Context<'a> {
    spec: &'a ScenarioSpec,
    users: Vec<std::result::Result<Prepared, String>>,
    profile: ChannelProfile,
}

impl Context<'_> {
    /// Simulates one frame at one SNR point; the result per user is its
    /// tally or a hard failure.
    fn frame(&self, seed: u64, point: usize, snr_db: f64, frame: u64) -> Vec<std::result::Result<Tally, String>> {
        let fs = OUTPUT_SAMPLE_RATE_HZ;
        // Transmit, delay and fade every user independently.
        let mut placed: Vec<Option<(ComplexSignal, Vec<Vec<u8>>, usize)>> = Vec::with_capacity(self.users.len());
        let mut user_err: Vec<Option<String>> = vec![None; self.users.len()];
        for (u, prep) in self.users.iter().enumerate() {
            match prep {
                Err(e) => {
                    user_err[u] = Some(e.clone());
                    placed.push(None);
                }
                Ok(p) => match user_transmission(&p.links, seed, u, frame) {
                    Ok((sig, payloads)) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, u as u64, frame, 0xA5]));
                        let offset = LEAD_IN + rng.random_range(0..self.spec.async_offset_max_samples.max(1));
                        placed.push(Some((sig, payloads, offset)));
                    }
                    Err(e) => {
                        user_err[u] = Some(e.to_string());
                        placed.push(None);
                    }
                },
            }
        }
        let total = placed.iter().flatten().map(|(s, _, o)| o + s.len()).max().unwrap_or(LEAD_IN) + TAIL;
        let mut composite = ComplexSignal::zeros(total, fs);
        let mut reference_power = None;
        for (u, slot) in placed.iter().enumerate() {
            let Some((sig, _, offset)) = slot else { continue };
            reference_power.get_or_insert(sig.mean_power());
            let mut x = ComplexSignal::zeros(total, fs);
            x.add_at(&sig.samples, *offset);
            let faded = realize_fading(&self.profile, total, mix_seed(&[seed, u as u64, frame, 0xC4])).and_then(|r| propagate(&x, &r));
            match faded {
                Ok(y) => composite.add_at(&y.samples, 0),
                Err(e) => user_err[u] = Some(e.to_string()),
            }
        }
        let reference_power = reference_power.unwrap_or(1.0);

        let mut shared_err = None;
        if let Some(dme) = &self.spec.dme {
            let mut params = dme.params();
            if let Some(sir) = dme.sir_db {
                params = params.with_mean_power(reference_power / 10f64.powf(sir / 10.0));
            }
            let stream = generate_dme_stream(&params, total as f64 / fs, fs, mix_seed(&[seed, frame, 0xD3])).and_then(|mut s| {
                s.samples.resize(total, Complex::new(0.0, 0.0));
                let r = realize_fading(&self.profile, total, mix_seed(&[seed, frame, 0xD4]))?;
                propagate(&s, &r)
            });
            match stream {
                Ok(s) => composite.add_at(&s.samples, 0),
                Err(e) => shared_err = Some(format!("DME: {e}")),
            }
        }
        if let Some(ggi) = &self.spec.ggi {
            let scaled = GgiParams { power: ggi.power * reference_power, ..*ggi };
            match generate_ggi(&scaled, total, mix_seed(&[seed, frame, 0x66])) {
                Ok(g) => composite.add_at(&g, 0),
                Err(e) => shared_err = Some(format!("GGI: {e}")),
            }
        }

        // Receive each user against its own noise level.
        self.users
            .iter()
            .enumerate()
            .map(|(u, prep)| {
                if let Some(e) = user_err[u].take().or_else(|| shared_err.clone()) {
                    return Err(e);
                }
                let p = prep.as_ref().expect("prepared users only");
                let (_, payloads, _) = placed[u].as_ref().expect("placed users only");
                let noisy = if snr_db.is_finite() {
                    let up = fs / BASE_SAMPLE_RATE_HZ;
                    let k = p.links[0].tx.frame_spec.fft_size as f64;
                    let var = up / (k * p.bits_per_symbol as f64 * 10f64.powf(snr_db / 10.0));
                    add_noise(&composite, var, mix_seed(&[seed, u as u64, frame, point as u64, 0x4E]))
                } else {
                    composite.clone()
                };
                let mut t = Tally::default();
                for (link, payload) in p.links.iter().zip(payloads) {
                    let input = if link.shift_hz != 0.0 { noisy.shifted(-link.shift_hz) } else { noisy.clone() };
                    let bits = payload.len() as u64;
                    t.bits += bits;
                    match receive(&link.tx, &input, &ReceiverOptions::default()) {
                        Ok(rx) => {
                            t.errors += count_errors(payload, &rx.decoded_bits);
                            if let Some(e) = mean_evm_lin(&rx.per_subcarrier_evm_db) {
                                t.evm_lin += e;
                                t.evm_frames += 1;
                            }
                        }
                        Err(
                            refofdm::Error::SyncNotFound { .. }
                            | refofdm::Error::TooShort { .. }
                            | refofdm::Error::EstimationFailure,
                        ) => {
                            t.errors += bits / 2;
                            t.lost += 1;
                        }
                        Err(e) => return Err(e.to_string()),
                    }
                }
                Ok(t)
            })
            .collect()
    }
}

/// Per-user Monte Carlo over the SNR grid and seeds.
pub fn run_ber(spec: &ScenarioSpec) -> Vec<UserReport> {
    let ctx = Context {
        spec,
        users: spec
            .users
            .iter()
            .map(|u| {
                user_links(u)
                    .map(|links| Prepared { links, bits_per_symbol: u.modulation.bits_per_symbol() })
                    .map_err(|e| e.to_string())
            })
            .collect(),
        profile: spec.channel_profile(),
    };
    let n_users = spec.users.len();
    let n_seeds = spec.seeds.len() as u64;
    let target = spec.monte_carlo.target_errors.div_ceil(n_seeds);
    let budget = spec.monte_carlo.max_bits.div_ceil(n_seeds);

    // (point) → per-user (tally, failure)
    let per_point: Vec<Vec<(Tally, Option<String>)>> = spec
        .snr_grid_db
        .par_iter()
        .enumerate()
        .map(|(point, &snr)| {
            let mut acc = vec![(Tally::default(), None::<String>); n_users];
            for &seed in &spec.seeds {
                let mut seed_acc = vec![Tally::default(); n_users];
                let mut done: Vec<bool> = ctx.users.iter().map(|p| p.is_err()).collect();
                let mut frame = 0u64;
                while done.iter().any(|d| !d) {
                    let batch: Vec<_> =
                        (frame..frame + BATCH as u64).into_par_iter().map(|f| ctx.frame(seed, point, snr, f)).collect();
                    for outcome in batch {
                        for (u, r) in outcome.into_iter().enumerate() {
                            if done[u] {
                                continue;
                            }
                            match r {
                                Ok(t) => seed_acc[u].add(&t),
                                Err(e) => {
                                    warn!("user {u} failed at {snr} dB (seed {seed}): {e}");
                                    acc[u].1.get_or_insert(e);
                                    done[u] = true;
                                }
                            }
                            if seed_acc[u].errors >= target || seed_acc[u].bits >= budget {
                                done[u] = true;
                            }
                        }
                    }
                    frame += BATCH as u64;
                }
                for (a, s) in acc.iter_mut().zip(&seed_acc) {
                    a.0.add(s);
                }
            }
            debug!("point {snr} dB done");
            acc
        })
        .collect();

    spec.users
        .iter()
        .enumerate()
        .map(|(u, user)| {
            let prep_failure = ctx.users[u].as_ref().err().cloned();
            let failure = prep_failure.or_else(|| per_point.iter().find_map(|p| p[u].1.clone()));
            let counts: Vec<(u64, u64)> = per_point.iter().map(|p| (p[u].0.errors, p[u].0.bits)).collect();
            UserReport {
                name: user.label(u),
                bandwidth_khz: user.bandwidth_khz,
                waveform: user.waveform,
                center_offsets_hz: user.center_offsets_hz.clone(),
                ber: failure.is_none().then(|| BerCurve::from_counts(&spec.snr_grid_db, &counts)),
                mean_evm_db: per_point
                    .iter()
                    .map(|p| {
                        let t = &p[u].0;
                        if t.evm_frames == 0 {
                            f64::NAN
                        } else {
                            10.0 * (t.evm_lin / t.evm_frames as f64).log10()
                        }
                    })
                    .collect(),
                lost_frames: per_point.iter().map(|p| p[u].0.lost).sum(),
                failure,
            }
        })
        .collect()
}

/// A continuous stream of at least `samples` samples of `user`'s frames.
pub fn user_stream(user: &UserSpec, index: usize, seed: u64, samples: usize) -> Result<ComplexSignal> {
    let links = user_links(user)?;
    let mut out = Vec::with_capacity(samples);
    let mut frame = 0;
    while out.len() < samples {
        let (sig, _) = user_transmission(&links, seed, index, frame)?;
        out.extend(sig.samples);
        frame += 1;
    }
    Ok(ComplexSignal::new(out, OUTPUT_SAMPLE_RATE_HZ))
}

fn normalized(mut s: ComplexSignal) -> ComplexSignal {
    let p = s.mean_power();
    if p > 0.0 {
        let g = 1.0 / p.sqrt();
        s.samples.iter_mut().for_each(|v| *v *= g);
    }
    s
}

/// The composite transmitted spectrum (unit total power) and, per user,
/// the fraction of its power falling into DME receivers at the configured
/// offsets.
pub fn run_psd(spec: &ScenarioSpec) -> Result<(SpectrumGrid, Vec<InterferenceRow>)> {
    let seed = spec.seeds[0];
    let streams: Vec<ComplexSignal> = spec
        .users
        .iter()
        .enumerate()
        .map(|(u, user)| user_stream(user, u, seed, spec.psd.samples))
        .collect::<Result<_>>()?;
    let mut composite = ComplexSignal::zeros(spec.psd.samples, OUTPUT_SAMPLE_RATE_HZ);
    for s in &streams {
        composite.add_at(&s.samples[..spec.psd.samples], 0);
    }
    let composite = estimate_psd(&normalized(composite), spec.psd.segment_length, spec.psd.overlap)?;

    let r = spec.interference.r_hz;
    let mut rows = Vec::new();
    for ((u, user), stream) in spec.users.iter().enumerate().zip(streams) {
        let mut s = stream;
        s.samples.truncate(spec.psd.samples);
        let psd = estimate_psd(&normalized(s), spec.psd.segment_length, spec.psd.overlap)?;
        let top = user.center_offsets_hz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for &m in &spec.interference.multiples {
            let offset = user.bandwidth_khz as f64 * 5e2 + m as f64 * r;
            let f = top + offset;
            match interference_at(&psd, f - r, f + r) {
                Ok(db) => rows.push(InterferenceRow { user: user.label(u), offset_hz: offset, interference_db: db }),
                Err(e) => info!("skipping DME offset {offset} Hz for {}: {e}", user.label(u)),
            }
        }
    }
    Ok((composite, rows))
}

/// Multiplication counts per waveform for 1, 2 and 4 bands, plus the
/// largest band count any user needs.
pub fn run_complexity(spec: Option<&ScenarioSpec>) -> Result<Vec<ComplexityRow>> {
    let mut bands: BTreeSet<usize> = COMPLEXITY_BANDS.into_iter().collect();
    if let Some(s) = spec {
        bands.extend(s.users.iter().map(|u| u.center_offsets_hz.len().max(1)));
    }
    let mut rows = Vec::new();
    for w in ComplexityWaveform::ALL {
        for &k in &bands {
            let r = complexity_report(w, COMPLEXITY_SUBCARRIERS, k)?;
            rows.push(ComplexityRow { waveform: w, k_bands: k, mults: r.total() });
        }
    }
    Ok(rows)
}

/// Analytical BER per user: Rayleigh fading of unit mean power, the
/// user's filter response, and the scenario's DME (if any) folded in.
pub fn run_theory(spec: &ScenarioSpec) -> Result<Vec<TheoryRow>> {
    spec.users
        .iter()
        .enumerate()
        .map(|(u, user)| {
            let links = user_links(user)?;
            let tx = &links[0].tx;
            let n = tx.frame_spec.fft_size;
            let response: Vec<f64> = match tx.band_filter() {
                None => vec![1.0; tx.frame_spec.used_indices().len()],
                Some(f) => tx
                    .frame_spec
                    .used_indices()
                    .iter()
                    .map(|&k| {
                        let w = 2.0 * std::f64::consts::PI * (k as f64 - (n / 2) as f64) / n as f64;
                        refofdm::filterbank::response::zero_phase_amplitude(&f.taps, w).abs()
                    })
                    .collect(),
            };
            let half = user.bandwidth_khz as f64 * 5e2;
            let dme = spec.dme.as_ref().map(|d| {
                let mut p = d.params();
                if let Some(sir) = d.sir_db {
                    p = p.with_mean_power(1.0 / 10f64.powf(sir / 10.0));
                }
                let c = user.center_offsets_hz[0];
                p.center_offset_hz -= c;
                DmeTheory::from_band(&p, -half, half, Some(1.0))
            });
            let cfg = TheoryConfig {
                filter_response: response,
                dme,
                ..TheoryConfig::rayleigh(user.modulation, spec.snr_grid_db.clone(), 1)
            };
            let r = theoretical_ber(&cfg)?;
            Ok(TheoryRow { user: user.label(u), curve: r.curve, warnings: r.warnings })
        })
        .collect()
}

/// Runs everything the scenario describes.
pub fn run_experiment(spec: &ScenarioSpec) -> Result<RunReport> {
    spec.validate()?;
    let mut report = RunReport::empty(spec);
    info!("{}: BER over {} SNR points, {} users", spec.name, spec.snr_grid_db.len(), spec.users.len());
    report.users = run_ber(spec);
    let (grid, rows) = run_psd(spec)?;
    report.spectrum = Some(grid);
    report.interference = rows;
    report.complexity = run_complexity(Some(spec))?;
    Ok(report)
}
