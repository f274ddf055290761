//! Coefficient decimation: every supported bandwidth realized from the one
//! prototype by keeping every D-th coefficient (CDM), optionally with
//! alternating signs and a complement stage (MCDM).
//!
//! Decimation is centre-aligned: the retained taps are those whose distance
//! from the prototype's centre tap is a multiple of D. For orders divisible
//! by 2D this is exactly `h_0, h_D, h_2D, …`; otherwise the first retained
//! index is `(N/2) mod D`. Centre alignment keeps every realized filter
//! symmetric with an integer group delay, so the MCDM complement needs no
//! fractional delay.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::prototype::PrototypeFilter;
use super::response::{dtft, zero_phase_amplitude};
use crate::bandwidth::Bandwidth;
use crate::error::{Error, Result};
use crate::Complex;

pub const MAX_DECIMATION: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecimationMethod {
    #[serde(rename = "CDM")]
    Cdm,
    #[serde(rename = "MCDM")]
    Mcdm,
}

impl std::fmt::Display for DecimationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecimationMethod::Cdm => "CDM",
            DecimationMethod::Mcdm => "MCDM",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecimationConfig {
    pub factor: usize,
    pub method: DecimationMethod,
    /// Delay of the direct path the MCDM branch is subtracted from; the
    /// integer group delay of the compacted branch. Zero for CDM.
    pub complement_delay: usize,
}

/// Table lookup: bandwidth → (D, method).
pub fn select_config(bandwidth_khz: u32) -> Result<DecimationConfig> {
    let bw = Bandwidth::from_khz(bandwidth_khz)?;
    let (factor, method) = table_row(bw);
    Ok(DecimationConfig { factor, method, complement_delay: 0 })
}

fn table_row(bw: Bandwidth) -> (usize, DecimationMethod) {
    use DecimationMethod::*;
    match bw {
        Bandwidth::Khz186 => (7, Mcdm),
        Bandwidth::Khz264 => (2, Cdm),
        Bandwidth::Khz342 => (6, Mcdm),
        Bandwidth::Khz420 => (3, Cdm),
        Bandwidth::Khz498 => (5, Mcdm),
        Bandwidth::Khz576 => (4, Cdm),
        Bandwidth::Khz654 => (4, Mcdm),
        Bandwidth::Khz732 => (5, Cdm),
    }
}

/// A realized filter derived from the prototype.
#[derive(Debug, Clone)]
pub struct ReconfigFilter {
    pub source: Arc<PrototypeFilter>,
    pub config: DecimationConfig,
    /// Compacted retained coefficients, `±h_{p+mD}` (sign alternates for MCDM).
    pub realized_coefficients: Vec<f64>,
    /// Scale applied to the compacted branch so the passband gain is unity.
    pub branch_gain: f64,
    pub target_bandwidth: Option<Bandwidth>,
    /// Impulse response actually applied to signals.
    pub taps: Vec<f64>,
    response_128: OnceLock<Vec<Complex>>,
}

/// First retained prototype index for centre-aligned decimation.
pub fn decimation_phase(order: usize, factor: usize) -> usize {
    (order / 2) % factor
}

fn check_factor(factor: usize) -> Result<()> {
    if (1..=MAX_DECIMATION).contains(&factor) {
        Ok(())
    } else {
        Err(Error::UnsupportedDecimation { factor })
    }
}

fn retained(proto: &PrototypeFilter, factor: usize, alternate: bool) -> Vec<f64> {
    let p = decimation_phase(proto.order, factor);
    proto.coefficients[p..]
        .iter()
        .step_by(factor)
        .enumerate()
        .map(|(m, &c)| if alternate && m % 2 == 1 { -c } else { c })
        .collect()
}

/// CDM: keep every D-th coefficient and compact.
pub fn apply_cdm(proto: Arc<PrototypeFilter>, factor: usize) -> Result<ReconfigFilter> {
    check_factor(factor)?;
    let realized = retained(&proto, factor, false);
    let gain = 1.0 / realized.iter().sum::<f64>();
    let taps = realized.iter().map(|c| c * gain).collect();
    Ok(ReconfigFilter {
        source: proto,
        config: DecimationConfig { factor, method: DecimationMethod::Cdm, complement_delay: 0 },
        realized_coefficients: realized,
        branch_gain: gain,
        target_bandwidth: None,
        taps,
        response_128: OnceLock::new(),
    })
}

/// MCDM: keep every D-th coefficient with alternating signs (a bandstop
/// centred on π), then subtract it from the delayed input.
pub fn apply_mcdm(proto: Arc<PrototypeFilter>, factor: usize) -> Result<ReconfigFilter> {
    check_factor(factor)?;
    let realized = retained(&proto, factor, true);
    let len = realized.len();
    debug_assert!(len % 2 == 1, "centre-aligned decimation keeps an odd count");
    let delay = (len - 1) / 2;
    // Normalize so the branch's zero-phase amplitude is exactly 1 at ω = π;
    // the linear-phase term e^{−jπ·delay} contributes a sign.
    let at_pi: f64 = realized.iter().enumerate().map(|(m, c)| if m % 2 == 0 { *c } else { -*c }).sum();
    let gain = if delay % 2 == 0 { 1.0 } else { -1.0 } / at_pi;
    let mut taps: Vec<f64> = realized.iter().map(|c| -c * gain).collect();
    taps[delay] += 1.0;
    Ok(ReconfigFilter {
        source: proto,
        config: DecimationConfig { factor, method: DecimationMethod::Mcdm, complement_delay: delay },
        realized_coefficients: realized,
        branch_gain: gain,
        target_bandwidth: None,
        taps,
        response_128: OnceLock::new(),
    })
}

impl ReconfigFilter {
    /// The realized filter for one of the eight table bandwidths.
    pub fn for_bandwidth(proto: Arc<PrototypeFilter>, bw: Bandwidth) -> Result<Self> {
        let (factor, method) = table_row(bw);
        let mut f = match method {
            DecimationMethod::Cdm => apply_cdm(proto, factor)?,
            DecimationMethod::Mcdm => apply_mcdm(proto, factor)?,
        };
        f.target_bandwidth = Some(bw);
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// The compacted branch, scaled: for MCDM this is the bandstop `B`.
    pub fn branch(&self) -> Vec<f64> {
        self.realized_coefficients.iter().map(|c| c * self.branch_gain).collect()
    }

    /// Nominal passband edge (Nyquist = 1) predicted from the prototype.
    pub fn nominal_passband_edge(&self) -> f64 {
        let d = self.config.factor as f64;
        let spec = &self.source.design_spec;
        match self.config.method {
            DecimationMethod::Cdm => d * spec.passband_edge(),
            DecimationMethod::Mcdm => 1.0 - d * spec.stopband_edge(),
        }
    }

    /// Nominal stopband edge (Nyquist = 1) predicted from the prototype.
    pub fn nominal_stopband_edge(&self) -> f64 {
        let d = self.config.factor as f64;
        let spec = &self.source.design_spec;
        match self.config.method {
            DecimationMethod::Cdm => d * spec.stopband_edge(),
            DecimationMethod::Mcdm => 1.0 - d * spec.passband_edge(),
        }
    }

    /// Nominal −6 dB-style bandwidth `D·ω_c` (CDM) or `1 − D·ω_c` (MCDM).
    pub fn nominal_bandwidth(&self) -> f64 {
        let d = self.config.factor as f64;
        match self.config.method {
            DecimationMethod::Cdm => d * self.source.passband_edge,
            DecimationMethod::Mcdm => 1.0 - d * self.source.passband_edge,
        }
    }

    /// Zero-phase amplitude at normalized angular frequency `omega`.
    pub fn amplitude(&self, omega: f64) -> f64 {
        zero_phase_amplitude(&self.taps, omega)
    }

    /// DFT of the zero-padded taps on a K-point grid; the 128-point grid
    /// is cached.
    pub fn realized_response(&self, k_points: usize) -> Vec<Complex> {
        let compute = || {
            (0..k_points)
                .map(|k| dtft(&self.taps, 2.0 * PI * k as f64 / k_points as f64))
                .collect::<Vec<_>>()
        };
        if k_points == 128 {
            self.response_128.get_or_init(compute).clone()
        } else {
            compute()
        }
    }

    /// The uncompacted, zero-interleaved (and for MCDM sign-alternated)
    /// length-(N+1) sequence.
    pub fn zero_interleaved(&self) -> Vec<f64> {
        let alternate = self.config.method == DecimationMethod::Mcdm;
        let phase = decimation_phase(self.source.order, self.config.factor);
        let mask = masking_sequence(self.config.factor, self.source.coefficients.len(), phase, alternate);
        self.source.coefficients.iter().zip(mask).map(|(h, b)| h * b).collect()
    }
}

/// The masking sequence `b[n]`: 1 where `(n − phase) mod D = 0`, else 0;
/// retained entries alternate in sign when `alternate` is set.
pub fn masking_sequence(factor: usize, len: usize, phase: usize, alternate: bool) -> Vec<f64> {
    (0..len)
        .map(|n| {
            if n < phase || (n - phase) % factor != 0 {
                0.0
            } else if alternate && ((n - phase) / factor) % 2 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

/// Fourier coefficients `B(i) = Σ_{n<D} b[n] e^{-j2πin/D}` of one period of
/// the phase-0 CDM masking sequence.
pub fn masking_fourier_coefficients(factor: usize) -> Vec<Complex> {
    let b = masking_sequence(factor, factor, 0, false);
    (0..factor)
        .map(|i| {
            b.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(n, &v)| v * Complex::from_polar(1.0, -2.0 * PI * (i * n) as f64 / factor as f64))
                .sum()
        })
        .collect()
}

/// Right-hand side of the CDM image theorem for a mask of phase `phase`:
/// `(1/D)·Σ_i e^{-j2πi·p/D}·H(ω − 2πi/D)`. With `p = 0` this is the plain
/// image sum.
pub fn cdm_image_sum(h: &[f64], factor: usize, phase: usize, omega: f64) -> Complex {
    let d = factor as f64;
    (0..factor)
        .map(|i| {
            let shift = 2.0 * PI * i as f64 / d;
            Complex::from_polar(1.0, -shift * phase as f64) * dtft(h, omega - shift)
        })
        .sum::<Complex>()
        / d
}

/// Right-hand side of the MCDM shift theorem: images at odd multiples of π/D.
pub fn mcdm_image_sum(h: &[f64], factor: usize, phase: usize, omega: f64) -> Complex {
    let d = factor as f64;
    (0..factor)
        .map(|i| {
            let shift = PI * (2 * i + 1) as f64 / d;
            Complex::from_polar(1.0, -shift * phase as f64) * dtft(h, omega - shift)
        })
        .sum::<Complex>()
        / d
}
