//! End-to-end transmitter and receiver.
//!
//! TX: randomize → RS/CC encode → helical interleave → QAM map → frame
//! mapping → 128-point IFFT + prefix → optional (multiband) Ref-OFDM
//! filtering at 1.25 MHz → ×2 halfband interpolation to 2.5 MHz.
//!
//! RX: ×2 decimation (both phases tried) → matched filter → sync and CFO
//! correction → pulse blanking → FFT → pilot-aided ZF → demap with
//! erasures → deinterleave → Viterbi/RS decode → derandomize.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::blanking::pulse_blank;
use super::equalizer::equalize;
use super::fec::{fec_decode, fec_encode, FecGeometry};
use super::interleaver::Interleaver;
use super::modulation::{demodulate, demodulate_with_erasures, modulate, Modulation};
use super::ofdm::{ofdm_demodulate, ofdm_modulate};
use super::randomizer::randomize;
use super::sync::{correct_cfo, synchronize, SyncResult};
use crate::bandwidth::Bandwidth;
use crate::dsp;
use crate::error::{Error, Result};
use crate::filterbank::response::zero_phase_amplitude;
use crate::filterbank::{build_dftfb, ldacs_prototype, MultibandFilterBank, ReconfigFilter};
use crate::framing::{build_frame_spec, map_symbols, reference_grid, CellKind, FrameSpec};
use crate::signal::ComplexSignal;
use crate::{Complex, BASE_SAMPLE_RATE_HZ};

/// Cyclic prefix at the OFDM base rate (17.6 µs).
pub const DEFAULT_CP: usize = 22;
pub const DEFAULT_RANDOMIZER_SEED: u64 = 0;
pub const DEFAULT_PILOT_SEED: u64 = 0x5A5A;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Waveform {
    #[serde(rename = "OFDM")]
    Ofdm,
    #[serde(rename = "Ref-OFDM")]
    RefOfdm,
}

impl std::fmt::Display for Waveform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Waveform::Ofdm => "OFDM",
            Waveform::RefOfdm => "Ref-OFDM",
        })
    }
}

/// Transmit-side filtering.
#[derive(Debug, Clone)]
pub enum TxFilter {
    None,
    Single(Box<ReconfigFilter>),
    /// One frame per active band, combined through a DFT filter bank.
    Multiband(Box<MultibandFilterBank>),
}

#[derive(Debug, Clone)]
pub struct TxConfig {
    pub frame_spec: FrameSpec,
    pub modulation: Modulation,
    pub waveform: Waveform,
    pub filter: TxFilter,
    pub cp_length_samples: usize,
    pub randomizer_seed: u64,
    pub pilot_seed: u64,
    /// 1 (output at 1.25 MHz) or 2 (output at 2.5 MHz).
    pub upsample_factor: usize,
    pub fec: FecGeometry,
    pub interleaver: Interleaver,
}

impl TxConfig {
    pub fn new(bandwidth: Bandwidth, modulation: Modulation, waveform: Waveform) -> Result<Self> {
        let filter = match waveform {
            Waveform::Ofdm => TxFilter::None,
            Waveform::RefOfdm => TxFilter::Single(Box::new(ReconfigFilter::for_bandwidth(ldacs_prototype(), bandwidth)?)),
        };
        Self::with_filter(bandwidth, modulation, waveform, filter)
    }

    /// A multiband Ref-OFDM transmitter: `active` bands of a `branches`-way
    /// DFT filter bank built on the filter for `bandwidth`.
    pub fn multiband(bandwidth: Bandwidth, modulation: Modulation, branches: usize, active: &BTreeSet<usize>) -> Result<Self> {
        let base = ReconfigFilter::for_bandwidth(ldacs_prototype(), bandwidth)?;
        let bank = build_dftfb(base, branches, active)?;
        Self::with_filter(bandwidth, modulation, Waveform::RefOfdm, TxFilter::Multiband(Box::new(bank)))
    }

    pub fn with_filter(bandwidth: Bandwidth, modulation: Modulation, waveform: Waveform, filter: TxFilter) -> Result<Self> {
        let frame_spec = build_frame_spec(bandwidth.khz())?;
        let frame_bits = frame_spec.data_capacity() * modulation.bits_per_symbol();
        Ok(Self {
            fec: FecGeometry::for_frame(frame_bits)?,
            interleaver: Interleaver::for_length(frame_bits)?,
            frame_spec,
            modulation,
            waveform,
            filter,
            cp_length_samples: DEFAULT_CP,
            randomizer_seed: DEFAULT_RANDOMIZER_SEED,
            pilot_seed: DEFAULT_PILOT_SEED,
            upsample_factor: 2,
        })
    }

    /// Number of parallel frames (active bands).
    pub fn band_count(&self) -> usize {
        match &self.filter {
            TxFilter::Multiband(b) => b.active_bands.len(),
            _ => 1,
        }
    }

    /// Payload bits carried by one call to [`transmit`].
    pub fn payload_bits(&self) -> usize {
        self.fec.payload_bits() * self.band_count()
    }

    /// Coded bits per band and frame.
    pub fn frame_bits(&self) -> usize {
        self.fec.frame_bits
    }

    /// Samples per frame at the base rate.
    pub fn frame_len(&self) -> usize {
        self.frame_spec.symbols_per_frame * (self.frame_spec.fft_size + self.cp_length_samples)
    }

    /// Real lowpass applied per band, if any.
    pub fn band_filter(&self) -> Option<&ReconfigFilter> {
        match &self.filter {
            TxFilter::None => None,
            TxFilter::Single(f) => Some(f),
            TxFilter::Multiband(b) => Some(&b.base),
        }
    }

    /// Delay of the transmit filter at the base rate.
    pub fn filter_delay(&self) -> usize {
        self.band_filter().map_or(0, ReconfigFilter::group_delay)
    }

    pub fn output_rate_hz(&self) -> f64 {
        BASE_SAMPLE_RATE_HZ * self.upsample_factor as f64
    }

    /// Centre frequencies (Hz) of the transmitted bands.
    pub fn band_centers_hz(&self) -> Vec<f64> {
        match &self.filter {
            TxFilter::Multiband(b) => b.centers().iter().map(|c| c * BASE_SAMPLE_RATE_HZ / 2.0).collect(),
            _ => vec![0.0],
        }
    }

    /// Combined TX·RX zero-phase amplitude on each grid subcarrier.
    pub fn combined_amplitude(&self) -> Vec<f64> {
        let n = self.frame_spec.fft_size;
        match self.band_filter() {
            None => vec![1.0; n],
            Some(f) => (0..n)
                .map(|k| {
                    let a = zero_phase_amplitude(&f.taps, 2.0 * PI * (k as f64 - (n / 2) as f64) / n as f64);
                    a * a
                })
                .collect(),
        }
    }

    fn check(&self) -> Result<()> {
        if !(1..=2).contains(&self.upsample_factor) {
            return Err(Error::InvalidParameter(format!("upsample factor {} (expected 1 or 2)", self.upsample_factor)));
        }
        if self.interleaver.block_size() != self.fec.frame_bits {
            return Err(Error::BlockLength { length: self.fec.frame_bits, block: self.interleaver.block_size() });
        }
        Ok(())
    }
}

/// Base-rate, unfiltered OFDM frame for one band's payload.
pub fn ofdm_frame(cfg: &TxConfig, payload: &[u8]) -> Result<ComplexSignal> {
    if payload.len() != cfg.fec.payload_bits() {
        return Err(Error::CapacityMismatch { expected: cfg.fec.payload_bits(), actual: payload.len() });
    }
    let scrambled = randomize(payload, cfg.randomizer_seed);
    let coded = fec_encode(&cfg.fec, &scrambled)?;
    let interleaved = cfg.interleaver.interleave(&coded)?;
    let symbols = modulate(&interleaved, cfg.modulation)?;
    let grid = map_symbols(&cfg.frame_spec, &symbols, cfg.pilot_seed)?;
    ofdm_modulate(&grid, cfg.cp_length_samples)
}

/// Produces one frame (one per active band) at the configured output rate.
pub fn transmit(cfg: &TxConfig, payload: &[u8]) -> Result<ComplexSignal> {
    cfg.check()?;
    if payload.len() != cfg.payload_bits() {
        return Err(Error::CapacityMismatch { expected: cfg.payload_bits(), actual: payload.len() });
    }
    let per_band = cfg.fec.payload_bits();
    let (samples, delay) = match &cfg.filter {
        TxFilter::None => (ofdm_frame(cfg, payload)?.samples, 0),
        TxFilter::Single(f) => {
            let x = ofdm_frame(cfg, payload)?;
            (dsp::convolve_real(&x.samples, &f.taps), f.group_delay())
        }
        TxFilter::Multiband(bank) => {
            let mut sum = vec![Complex::new(0.0, 0.0); cfg.frame_len()];
            for (chunk, center) in payload.chunks(per_band).zip(bank.centers()) {
                let x = ofdm_frame(cfg, chunk)?;
                for (n, (acc, v)) in sum.iter_mut().zip(&x.samples).enumerate() {
                    *acc += v * Complex::from_polar(1.0, PI * center * n as f64);
                }
            }
            (dsp::convolve(&sum, bank.composite_taps()), bank.group_delay())
        }
    };
    let (samples, delay) = if cfg.upsample_factor == 2 {
        (dsp::interpolate2(&samples), 2 * delay)
    } else {
        (samples, delay)
    };
    Ok(ComplexSignal { samples, sample_rate_hz: cfg.output_rate_hz(), group_delay_samples: delay })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverOptions {
    /// Pulse-blanking factor over the rolling median magnitude; `None`
    /// disables blanking.
    pub blanking_threshold: Option<f64>,
    /// FFT window advance into the cyclic prefix, in base-rate samples.
    pub fft_backoff: usize,
    /// Genie frame start in input samples (skips synchronization).
    pub known_timing: Option<usize>,
    /// Genie carrier offset in Hz (skips CFO estimation).
    pub known_cfo_hz: Option<f64>,
}

impl Default for ReceiverOptions {
    fn default() -> Self {
        Self { blanking_threshold: Some(5.0), fft_backoff: 6, known_timing: None, known_cfo_hz: None }
    }
}

impl ReceiverOptions {
    /// Genie timing and zero CFO.
    pub fn ideal_sync(frame_start: usize) -> Self {
        Self { known_timing: Some(frame_start), known_cfo_hz: Some(0.0), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RxReport {
    pub decoded_bits: Vec<u8>,
    /// Estimated frame start in input samples, filter delays removed.
    pub timing_offset: i64,
    pub cfo_hz: f64,
    pub sync_metric: f64,
    /// Time-averaged channel estimate per used subcarrier (all bands).
    pub channel_estimate: Vec<Complex>,
    /// EVM (dB) per used subcarrier over its data cells.
    pub per_subcarrier_evm_db: Vec<f64>,
    pub blanked_samples: usize,
    pub erased_cells: usize,
    pub rs_block_failures: Vec<bool>,
}

/// Decodes every band of one frame from `signal`.
pub fn receive(cfg: &TxConfig, signal: &ComplexSignal, opts: &ReceiverOptions) -> Result<RxReport> {
    cfg.check()?;
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    let up = (signal.sample_rate_hz / BASE_SAMPLE_RATE_HZ).round() as usize;
    if !(1..=2).contains(&up) || (signal.sample_rate_hz - up as f64 * BASE_SAMPLE_RATE_HZ).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!("unsupported input rate {} Hz", signal.sample_rate_hz)));
    }
    let mut merged: Option<RxReport> = None;
    for center in cfg.band_centers_hz() {
        let band = if center == 0.0 { signal.clone() } else { signal.shifted(-center) };
        let r = receive_band(cfg, &band, up, opts)?;
        merged = Some(match merged {
            None => r,
            Some(mut m) => {
                m.decoded_bits.extend(r.decoded_bits);
                m.channel_estimate.extend(r.channel_estimate);
                m.per_subcarrier_evm_db.extend(r.per_subcarrier_evm_db);
                m.blanked_samples += r.blanked_samples;
                m.erased_cells += r.erased_cells;
                m.rs_block_failures.extend(r.rs_block_failures);
                m
            }
        });
    }
    Ok(merged.expect("at least one band"))
}

fn receive_band(cfg: &TxConfig, signal: &ComplexSignal, up: usize, opts: &ReceiverOptions) -> Result<RxReport> {
    let spec = &cfg.frame_spec;
    let n = spec.fft_size;
    let cp = cfg.cp_length_samples;
    let rx_taps = cfg.band_filter().map(|f| f.taps.as_slice());
    let delay = 2 * cfg.filter_delay();

    let matched = |x: Vec<Complex>| match rx_taps {
        Some(h) => dsp::convolve_real(&x, h),
        None => x,
    };
    let base_signal = |y: Vec<Complex>| ComplexSignal::new(y, BASE_SAMPLE_RATE_HZ);
    // Strong pulses would otherwise capture the correlator; the copy used
    // for synchronization is blanked over its whole length.
    let for_sync = |y: &ComplexSignal| match opts.blanking_threshold {
        Some(factor) => base_signal(pulse_blank(&y.samples, factor).0),
        None => y.clone(),
    };

    // Choose the decimation phase and locate the frame.
    let (mut y, phase, sync) = match opts.known_timing {
        Some(t) => {
            let phase = t % up;
            let y = if up == 2 {
                let f = dsp::filter_same(&signal.samples, dsp::halfband_taps());
                matched(f.into_iter().skip(phase).step_by(2).collect())
            } else {
                matched(signal.samples.clone())
            };
            let sync = SyncResult { timing: t / up + delay, cfo_hz: 0.0, metric: 1.0 };
            (y, phase, sync)
        }
        None => {
            if up == 2 {
                let f = dsp::filter_same(&signal.samples, dsp::halfband_taps());
                let mut best: Option<(Vec<Complex>, usize, SyncResult)> = None;
                let mut last_err = None;
                for phase in 0..2 {
                    let y = matched(f.iter().copied().skip(phase).step_by(2).collect());
                    let ys = base_signal(y);
                    match synchronize(&for_sync(&ys), spec, cp, cfg.pilot_seed) {
                        Ok(s) if best.as_ref().map_or(true, |b| s.metric > b.2.metric) => best = Some((ys.samples, phase, s)),
                        Ok(_) => {}
                        Err(e) => last_err = Some(e),
                    }
                }
                best.ok_or_else(|| last_err.expect("a failed phase records its error"))?
            } else {
                let ys = base_signal(matched(signal.samples.clone()));
                let s = synchronize(&for_sync(&ys), spec, cp, cfg.pilot_seed)?;
                (ys.samples, 0, s)
            }
        }
    };
    let cfo_hz = opts.known_cfo_hz.unwrap_or(sync.cfo_hz);
    if cfo_hz != 0.0 {
        correct_cfo(&mut y, cfo_hz, BASE_SAMPLE_RATE_HZ);
    }

    let t0 = sync.timing;
    let frame_len = cfg.frame_len();
    if y.len() < t0 + frame_len {
        return Err(Error::TooShort { needed: t0 + frame_len, actual: y.len() });
    }
    let mut blanked_samples = 0;
    if let Some(factor) = opts.blanking_threshold {
        let (clean, mask) = pulse_blank(&y[t0..t0 + frame_len], factor);
        blanked_samples = mask.iter().filter(|&&b| b).count();
        y[t0..t0 + frame_len].copy_from_slice(&clean);
    }

    let backoff = opts.fft_backoff.min(cp);
    let cells = ofdm_demodulate(&y, t0 + cp - backoff, cp, spec)?;
    let reference = reference_grid(spec, cfg.pilot_seed);
    let amplitude = cfg.combined_amplitude();
    let eq = equalize(&cells, &reference, &amplitude)?;

    let hard = demodulate_with_erasures(&eq.symbols, &eq.erased, cfg.modulation);
    let coded = cfg.interleaver.deinterleave(&hard)?;
    let (scrambled, rs_block_failures) = fec_decode(&cfg.fec, &coded)?;
    let decoded_bits = randomize(&scrambled, cfg.randomizer_seed);

    // Diagnostics.
    let used = spec.used_indices();
    let symbols = spec.symbols_per_frame;
    let channel_estimate = used
        .iter()
        .map(|&k| (0..symbols).map(|s| eq.channel[s * n + k]).sum::<Complex>() / symbols as f64)
        .collect();
    let decisions = modulate(&demodulate(&eq.symbols, cfg.modulation), cfg.modulation)?;
    let mut err = vec![(0.0, 0usize); n];
    let mut d = 0;
    for (idx, kind) in reference.kinds.iter().enumerate() {
        if *kind == CellKind::Data {
            if !eq.erased[d] {
                let e = &mut err[idx % n];
                e.0 += (eq.symbols[d] - decisions[d]).norm_sqr();
                e.1 += 1;
            }
            d += 1;
        }
    }
    let per_subcarrier_evm_db = used
        .iter()
        .map(|&k| if err[k].1 == 0 { f64::NAN } else { 10.0 * (err[k].0 / err[k].1 as f64).max(1e-30).log10() })
        .collect();

    Ok(RxReport {
        decoded_bits,
        timing_offset: (t0 as i64 - delay as i64) * up as i64 + phase as i64,
        cfo_hz,
        sync_metric: sync.metric,
        channel_estimate,
        per_subcarrier_evm_db,
        blanked_samples,
        erased_cells: eq.erased.iter().filter(|&&e| e).count(),
        rs_block_failures,
    })
}
