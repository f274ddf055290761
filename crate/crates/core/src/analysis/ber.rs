//! Monte-Carlo bit-error-rate estimation.
//!
//! SNR points are `E_b/N_0` per modulated (channel) bit in dB. For OFDM
//! links the noise variance per input sample is
//! `σ² = r / (K · log₂M · E_b/N_0)`, where `r` is the input rate over the
//! 1.25 MHz base rate and `K = 128`; this makes every subcarrier see the
//! stated `E_b/N_0` after the receiver DFT.
//!
//! Each SNR point runs frames in fixed-size parallel batches until the
//! error target or the bit budget is reached. Every frame draws from its
//! own seed derived from `(seed, point, frame)`, so results are independent
//! of thread count and identical across waveforms for common random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::Bandwidth;
use crate::channel::{add_noise, propagate, realize_fading, ChannelProfile};
use crate::error::{Error, Result};
use crate::framing::{build_frame_spec, map_symbols, CellKind};
use crate::interference::{generate_dme_stream, generate_ggi, DmeSignalParams, GgiParams};
use crate::phy::chain::{receive, transmit, ReceiverOptions, TxConfig};
use crate::phy::modulation::{demodulate, modulate, Modulation};
use crate::phy::ofdm::{ofdm_demodulate, ofdm_modulate};
use crate::signal::ComplexSignal;
use crate::{Complex, BASE_SAMPLE_RATE_HZ};

/// Width of the reported confidence intervals, in standard deviations.
pub const WILSON_Z: f64 = 3.0;
/// Frames simulated per parallel batch (fixed for determinism).
pub const BATCH: usize = 8;
/// Bits per pseudo-frame for the symbol-level links.
const SYMBOL_LINK_BITS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub snr_db_points: Vec<f64>,
    pub ber: Vec<f64>,
    pub bit_count_per_point: Vec<u64>,
    pub error_count_per_point: Vec<u64>,
    /// Half-width of the Wilson interval at [`WILSON_Z`].
    pub confidence_halfwidth: Vec<f64>,
}

/// Wilson score interval for `errors` successes in `bits` trials.
pub fn wilson_interval(errors: u64, bits: u64, z: f64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 1.0);
    }
    let n = bits as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl BerCurve {
    pub fn from_counts(snr_db: &[f64], counts: &[(u64, u64)]) -> Self {
        let mut curve = BerCurve {
            snr_db_points: snr_db.to_vec(),
            ber: Vec::new(),
            bit_count_per_point: Vec::new(),
            error_count_per_point: Vec::new(),
            confidence_halfwidth: Vec::new(),
        };
        for &(errors, bits) in counts {
            let (lo, hi) = wilson_interval(errors, bits, WILSON_Z);
            curve.ber.push(if bits == 0 { 0.0 } else { errors as f64 / bits as f64 });
            curve.bit_count_per_point.push(bits);
            curve.error_count_per_point.push(errors);
            curve.confidence_halfwidth.push((hi - lo) / 2.0);
        }
        curve
    }

    /// Wilson interval of point `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        wilson_interval(self.error_count_per_point[i], self.bit_count_per_point[i], WILSON_Z)
    }

    /// Whether `value` lies inside point `i`'s interval.
    pub fn covers(&self, i: usize, value: f64) -> bool {
        let (lo, hi) = self.interval(i);
        (lo..=hi).contains(&value)
    }
}

/// Channel, interference and offsets applied between TX and RX.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Impairments {
    pub channel: Option<ChannelProfile>,
    /// DME stream; its `center_offset_hz` is absolute (same frame as
    /// `center_offset_hz` below) and its amplitude is set from `dme_sir_db`.
    pub dme: Option<DmeSignalParams>,
    /// Signal-to-DME mean power ratio (dB).
    pub dme_sir_db: Option<f64>,
    /// Gated Gaussian interference; `power` is relative to the signal.
    pub ggi: Option<GgiParams>,
    pub cfo_hz: f64,
    /// Carrier of this link in the absolute frame (interferers are placed
    /// relative to it).
    pub center_offset_hz: f64,
    /// Samples of silence before the frame.
    pub lead_in: usize,
    /// Samples of silence after the frame.
    pub tail: usize,
}

/// The full coded chain over impairments.
#[derive(Debug, Clone)]
pub struct ChainLink {
    pub tx: TxConfig,
    pub impairments: Impairments,
    pub receiver: ReceiverOptions,
    /// Genie timing and CFO instead of synchronization.
    pub ideal_sync: bool,
}

#[derive(Debug, Clone)]
pub enum BerLink {
    /// Uncoded symbols over AWGN.
    Awgn { modulation: Modulation },
    /// Uncoded plain-OFDM frames with time-domain AWGN; ideal sync and CSI.
    OfdmAwgn { modulation: Modulation, bandwidth: Bandwidth },
    /// Uncoded symbols, each through an independent Rayleigh gain of mean
    /// power `mean_fading_power`, perfect CSI.
    Rayleigh { modulation: Modulation, mean_fading_power: f64 },
    Chain(Box<ChainLink>),
}

/// SplitMix64 finalizer for seed derivation.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

fn cgauss(rng: &mut ChaCha8Rng) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64 + a.len().abs_diff(b.len()) as u64
}

fn ebn0(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn symbol_frame(modulation: Modulation, fading: Option<f64>, snr_db: f64, seed: u64) -> Result<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bps = modulation.bits_per_symbol();
    let n = SYMBOL_LINK_BITS / bps * bps;
    let bits = random_bits(n, &mut rng);
    let tx = modulate(&bits, modulation)?;
    let n0 = 1.0 / (bps as f64 * ebn0(snr_db));
    let rx: Vec<Complex> = tx
        .iter()
        .map(|&x| {
            let h = fading.map(|m| cgauss(&mut rng) * m.sqrt());
            let noise = cgauss(&mut rng) * n0.sqrt();
            match h {
                Some(h) => (h * x + noise) / h,
                None => x + noise,
            }
        })
        .collect();
    Ok((count_errors(&bits, &demodulate(&rx, modulation)), n as u64))
}

fn ofdm_frame(modulation: Modulation, bandwidth: Bandwidth, snr_db: f64, seed: u64) -> Result<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = build_frame_spec(bandwidth.khz())?;
    let bps = modulation.bits_per_symbol();
    let bits = random_bits(spec.data_capacity() * bps, &mut rng);
    let grid = map_symbols(&spec, &modulate(&bits, modulation)?, seed)?;
    let cp = crate::phy::chain::DEFAULT_CP;
    let sig = ofdm_modulate(&grid, cp)?;
    let var = 1.0 / (spec.fft_size as f64 * bps as f64 * ebn0(snr_db));
    let noisy = add_noise(&sig, var, rng.random());
    let cells = ofdm_demodulate(&noisy.samples, cp, cp, &spec)?;
    let data: Vec<Complex> = cells.iter().zip(&grid.kinds).filter(|(_, &k)| k == CellKind::Data).map(|(&c, _)| c).collect();
    Ok((count_errors(&bits, &demodulate(&data, modulation)), bits.len() as u64))
}

/// Builds the received signal for one chain frame: TX → (channel) → + DME
/// (own channel) + GGI + noise, with CFO. Returns the signal and payload.
pub fn chain_received(link: &ChainLink, snr_db: f64, seed: u64) -> Result<(ComplexSignal, Vec<u8>)> {
    let tx_cfg = &link.tx;
    let imp = &link.impairments;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payload = random_bits(tx_cfg.payload_bits(), &mut rng);
    let tx = transmit(tx_cfg, &payload)?;
    let signal_power = tx.mean_power();
    let fs = tx.sample_rate_hz;
    let total = imp.lead_in + tx.len() + imp.tail;
    let mut sig = ComplexSignal::zeros(total, fs);
    sig.add_at(&tx.samples, imp.lead_in);

    let seeds: Vec<u64> = (0..6).map(|i| mix_seed(&[seed, i])).collect();
    if let Some(profile) = &imp.channel {
        let real = realize_fading(profile, total, seeds[0])?;
        sig = propagate(&sig, &real)?;
    }
    if let Some(dme) = &imp.dme {
        let mut params = *dme;
        params.center_offset_hz = dme.center_offset_hz - imp.center_offset_hz;
        if let Some(sir) = imp.dme_sir_db {
            params = params.with_mean_power(signal_power / 10f64.powf(sir / 10.0));
        }
        let mut stream = generate_dme_stream(&params, total as f64 / fs, fs, seeds[1])?;
        stream.samples.resize(total, Complex::new(0.0, 0.0));
        if let Some(profile) = &imp.channel {
            let real = realize_fading(profile, total, seeds[2])?;
            stream = propagate(&stream, &real)?;
        }
        sig.add_at(&stream.samples, 0);
    }
    if let Some(ggi) = &imp.ggi {
        let scaled = GgiParams { power: ggi.power * signal_power, ..*ggi };
        sig.add_at(&generate_ggi(&scaled, total, seeds[3])?, 0);
    }
    if imp.cfo_hz != 0.0 {
        sig.frequency_shift(imp.cfo_hz, 0);
    }
    if snr_db.is_finite() {
        let up = fs / BASE_SAMPLE_RATE_HZ;
        let var = up / (tx_cfg.frame_spec.fft_size as f64 * tx_cfg.modulation.bits_per_symbol() as f64 * ebn0(snr_db));
        sig = add_noise(&sig, var, seeds[4]);
    }
    sig.group_delay_samples = tx.group_delay_samples;
    Ok((sig, payload))
}

fn chain_frame(link: &ChainLink, snr_db: f64, seed: u64) -> Result<(u64, u64)> {
    let (sig, payload) = chain_received(link, snr_db, seed)?;
    let opts = if link.ideal_sync {
        ReceiverOptions {
            known_timing: Some(link.impairments.lead_in),
            known_cfo_hz: Some(link.impairments.cfo_hz),
            ..link.receiver.clone()
        }
    } else {
        link.receiver.clone()
    };
    let bits = payload.len() as u64;
    match receive(&link.tx, &sig, &opts) {
        Ok(rx) => Ok((count_errors(&payload, &rx.decoded_bits), bits)),
        // A lost frame is scored as a coin toss per bit.
        Err(Error::SyncNotFound { .. }) | Err(Error::TooShort { .. }) | Err(Error::EstimationFailure) => Ok((bits / 2, bits)),
        Err(e) => Err(e),
    }
}

fn run_frame(link: &BerLink, snr_db: f64, seed: u64) -> Result<(u64, u64)> {
    match link {
        BerLink::Awgn { modulation } => symbol_frame(*modulation, None, snr_db, seed),
        BerLink::Rayleigh { modulation, mean_fading_power } => symbol_frame(*modulation, Some(*mean_fading_power), snr_db, seed),
        BerLink::OfdmAwgn { modulation, bandwidth } => ofdm_frame(*modulation, *bandwidth, snr_db, seed),
        BerLink::Chain(c) => chain_frame(c, snr_db, seed),
    }
}

/// Runs each SNR point until `target_errors` errors or `max_bits` bits.
pub fn run_ber_monte_carlo(link: &BerLink, snr_grid: &[f64], target_errors: u64, max_bits: u64, seed: u64) -> Result<BerCurve> {
    if snr_grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let counts = snr_grid
        .par_iter()
        .enumerate()
        .map(|(point, &snr)| {
            let (mut errors, mut bits) = (0u64, 0u64);
            let mut frame = 0u64;
            while errors < target_errors && bits < max_bits {
                let batch: Vec<Result<(u64, u64)>> = (frame..frame + BATCH as u64)
                    .into_par_iter()
                    .map(|f| run_frame(link, snr, mix_seed(&[seed, point as u64, f])))
                    .collect();
                for r in batch {
                    let (e, b) = r?;
                    if errors >= target_errors || bits >= max_bits {
                        break;
                    }
                    errors += e;
                    bits += b;
                }
                frame += BATCH as u64;
            }
            Ok((errors, bits))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve::from_counts(snr_grid, &counts))
}
