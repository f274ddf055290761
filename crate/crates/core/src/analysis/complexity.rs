//! Real-multiplication counts per transmitted OFDM symbol.
//!
//! * IFFT: radix-2, `(K/2)·log₂K` butterflies, each one complex multiply
//!   counted as 4 real multiplies (trivial twiddles are not special-cased):
//!   `4·(K/2)·log₂K`.
//! * Filtering: a real-coefficient FIR on complex samples costs `2·L` real
//!   multiplies per sample for `L` taps, over `K + cp` samples per symbol.
//! * F-OFDM runs one such filter per band. Ref-OFDM runs a single
//!   fixed-coefficient filter and a `K_b`-point DFT per sample (radix-2,
//!   `K_b = next_pow2(K_bands)`), so its filtering term does not depend on
//!   the number of bands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex;

/// Prototype length `N + 1` used for both filtered waveforms.
pub const DEFAULT_FILTER_TAPS: usize = 241;
pub const DEFAULT_CP: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComplexityWaveform {
    #[serde(rename = "OFDM")]
    Ofdm,
    #[serde(rename = "F-OFDM")]
    FOfdm,
    #[serde(rename = "Ref-OFDM")]
    RefOfdm,
}

impl ComplexityWaveform {
    pub const ALL: [ComplexityWaveform; 3] = [ComplexityWaveform::Ofdm, ComplexityWaveform::FOfdm, ComplexityWaveform::RefOfdm];
}

impl std::fmt::Display for ComplexityWaveform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ComplexityWaveform::Ofdm => "OFDM",
            ComplexityWaveform::FOfdm => "F-OFDM",
            ComplexityWaveform::RefOfdm => "Ref-OFDM",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub waveform: ComplexityWaveform,
    pub n_subcarriers: usize,
    pub k_bands: usize,
    pub ifft_mults: u64,
    /// FIR multiplications (excluding the bank DFT).
    pub filter_mults: u64,
    pub dft_mults: u64,
}

impl ComplexityReport {
    pub fn total(&self) -> u64 {
        self.ifft_mults + self.filter_mults + self.dft_mults
    }
}

/// `4·(n/2)·log₂n` for a power of two `n` (0 for `n = 1`).
pub fn radix2_mults(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    4 * (n as u64 / 2) * u64::from(n.trailing_zeros())
}

pub fn complexity_report(waveform: ComplexityWaveform, n_subcarriers: usize, k_bands: usize) -> Result<ComplexityReport> {
    complexity_report_with(waveform, n_subcarriers, k_bands, DEFAULT_FILTER_TAPS, DEFAULT_CP)
}

pub fn complexity_report_with(
    waveform: ComplexityWaveform,
    n_subcarriers: usize,
    k_bands: usize,
    filter_taps: usize,
    cp: usize,
) -> Result<ComplexityReport> {
    if !n_subcarriers.is_power_of_two() || n_subcarriers < 2 {
        return Err(Error::InvalidParameter(format!("{n_subcarriers} subcarriers is not a power of two")));
    }
    if k_bands == 0 {
        return Err(Error::EmptyBandSet);
    }
    let samples = (n_subcarriers + cp) as u64;
    let fir = 2 * filter_taps as u64 * samples;
    let (filter_mults, dft_mults) = match waveform {
        ComplexityWaveform::Ofdm => (0, 0),
        ComplexityWaveform::FOfdm => (k_bands as u64 * fir, 0),
        ComplexityWaveform::RefOfdm => (fir, radix2_mults(k_bands.next_power_of_two()) * samples),
    };
    Ok(ComplexityReport { waveform, n_subcarriers, k_bands, ifft_mults: radix2_mults(n_subcarriers), filter_mults, dft_mults })
}

/// Radix-2 decimation-in-time inverse DFT (unscaled) that counts its real
/// multiplications; used to audit [`radix2_mults`].
pub fn counting_ifft(x: &[Complex]) -> (Vec<Complex>, u64) {
    let n = x.len();
    assert!(n.is_power_of_two(), "radix-2 needs a power of two");
    let bits = n.trailing_zeros();
    let mut a: Vec<Complex> = (0..n)
        .map(|i| x[if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }])
        .collect();
    let mut mults = 0u64;
    let mut len = 2;
    while len <= n {
        let step = 2.0 * std::f64::consts::PI / len as f64;
        for start in (0..n).step_by(len) {
            for j in 0..len / 2 {
                let w = Complex::from_polar(1.0, step * j as f64);
                let t = w * a[start + j + len / 2];
                mults += 4;
                let u = a[start + j];
                a[start + j] = u + t;
                a[start + j + len / 2] = u - t;
            }
        }
        len *= 2;
    }
    (a, mults)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ofdm_128_is_ifft_only() {
        let r = complexity_report(ComplexityWaveform::Ofdm, 128, 1).unwrap();
        assert_eq!(r.total(), 4 * 64 * 7);
        let x: Vec<Complex> = (0..128).map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let (y, count) = counting_ifft(&x);
        assert_eq!(count, r.ifft_mults);
        let mut reference = x.clone();
        crate::dsp::ifft_in_place(&mut reference);
        assert!(y.iter().zip(&reference).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    fn single_band_filtered_waveforms_agree() {
        let f = complexity_report(ComplexityWaveform::FOfdm, 128, 1).unwrap();
        let r = complexity_report(ComplexityWaveform::RefOfdm, 128, 1).unwrap();
        assert_eq!(f.total(), r.total());
    }
}
