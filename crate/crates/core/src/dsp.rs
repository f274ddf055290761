//! Convolution, DFT helpers and the ×2 halfband resampler.

use std::sync::OnceLock;

use rustfft::FftPlanner;

use crate::filterbank::remez::{remez, RemezBand};
use crate::Complex;

/// Inputs longer than this are convolved with overlap-save.
pub const FFT_CONVOLUTION_THRESHOLD: usize = 4096;

const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

/// Full linear convolution, output length `x.len() + h.len() - 1`.
///
/// Uses direct summation for short inputs and FFT overlap-save otherwise.
/// Returns an empty vector if either operand is empty.
pub fn convolve(x: &[Complex], h: &[Complex]) -> Vec<Complex> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    if x.len() <= FFT_CONVOLUTION_THRESHOLD || h.len() < 16 {
        convolve_direct(x, h)
    } else {
        convolve_overlap_save(x, h)
    }
}

/// Convolution with real taps (the common case for the filters here).
pub fn convolve_real(x: &[Complex], h: &[f64]) -> Vec<Complex> {
    let hc: Vec<Complex> = h.iter().map(|&v| Complex::new(v, 0.0)).collect();
    convolve(x, &hc)
}

/// Brute-force `O(N·M)` convolution.
pub fn convolve_direct(x: &[Complex], h: &[Complex]) -> Vec<Complex> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut y = vec![ZERO; x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi == ZERO {
            continue;
        }
        for (yk, &hk) in y[i..].iter_mut().zip(h) {
            *yk += xi * hk;
        }
    }
    y
}

/// Overlap-save FFT convolution.
pub fn convolve_overlap_save(x: &[Complex], h: &[Complex]) -> Vec<Complex> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let taps = h.len();
    let n_fft = (4 * taps).max(1024).next_power_of_two();
    let step = n_fft - taps + 1;
    let out_len = x.len() + taps - 1;

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n_fft);
    let inv = planner.plan_fft_inverse(n_fft);

    let mut h_freq = vec![ZERO; n_fft];
    h_freq[..taps].copy_from_slice(h);
    fwd.process(&mut h_freq);

    let scale = 1.0 / n_fft as f64;
    let mut y = Vec::with_capacity(out_len + step);
    let mut buf = vec![ZERO; n_fft];
    let mut start = 0usize;
    // Padded input index m maps to x[m - (taps - 1)].
    while y.len() < out_len {
        for (i, b) in buf.iter_mut().enumerate() {
            let m = start + i;
            *b = if m >= taps - 1 && m - (taps - 1) < x.len() {
                x[m - (taps - 1)]
            } else {
                ZERO
            };
        }
        fwd.process(&mut buf);
        for (b, hf) in buf.iter_mut().zip(&h_freq) {
            *b *= hf;
        }
        inv.process(&mut buf);
        y.extend(buf[taps - 1..].iter().map(|v| v * scale));
        start += step;
    }
    y.truncate(out_len);
    y
}

/// "Same"-mode convolution with a symmetric odd-length filter: the output is
/// aligned with the input (the filter's group delay is removed) and has the
/// same length.
pub fn filter_same(x: &[Complex], h: &[f64]) -> Vec<Complex> {
    debug_assert!(h.len() % 2 == 1);
    let delay = (h.len() - 1) / 2;
    let full = convolve_real(x, h);
    full[delay..delay + x.len()].to_vec()
}

/// In-place forward DFT (no scaling).
pub fn fft_in_place(buf: &mut [Complex]) {
    FftPlanner::<f64>::new().plan_fft_forward(buf.len()).process(buf);
}

/// In-place inverse DFT (no scaling).
pub fn ifft_in_place(buf: &mut [Complex]) {
    FftPlanner::<f64>::new().plan_fft_inverse(buf.len()).process(buf);
}

/// Halfband lowpass used by the ×2 interpolator and decimator.
///
/// 119 taps, passband edge 0.45, stopband edge 0.55 (Nyquist = 1 at the
/// high rate), equal weights.
pub fn halfband_taps() -> &'static [f64] {
    static TAPS: OnceLock<Vec<f64>> = OnceLock::new();
    TAPS.get_or_init(|| {
        let bands = [
            RemezBand { lower: 0.0, upper: 0.45, desired: 1.0, weight: 1.0 },
            RemezBand { lower: 0.55, upper: 1.0, desired: 0.0, weight: 1.0 },
        ];
        remez(119, &bands, 16).expect("halfband design is a fixed, known-good problem")
    })
}

/// ×2 interpolation (zero-stuffing plus halfband lowpass), delay-compensated
/// so that output sample `2n` corresponds to input sample `n`. Output length
/// is exactly twice the input length.
pub fn interpolate2(x: &[Complex]) -> Vec<Complex> {
    let mut up = vec![ZERO; 2 * x.len()];
    for (i, &v) in x.iter().enumerate() {
        up[2 * i] = v * 2.0;
    }
    filter_same(&up, halfband_taps())
}

/// ×2 decimation after halfband lowpass; keeps samples `phase, phase+2, …`.
pub fn decimate2(x: &[Complex], phase: usize) -> Vec<Complex> {
    let filtered = filter_same(x, halfband_taps());
    filtered.into_iter().skip(phase % 2).step_by(2).collect()
}
