//! 128-point OFDM synthesis and analysis.
//!
//! Grid index `k` (DC at 64) is subcarrier frequency `(k − 64)·Δf`, i.e.
//! DFT bin `(k + 64) mod 128`. Synthesis uses the `1/K` inverse-DFT
//! scaling; analysis is the plain forward DFT, so the pair is exact.

use crate::error::{Error, Result};
use crate::framing::{FrameSpec, ResourceGrid};
use crate::signal::ComplexSignal;
use crate::{Complex, BASE_SAMPLE_RATE_HZ};

fn bin(k: usize, n: usize) -> usize {
    (k + n / 2) % n
}

/// IDFT each symbol, prepend the last `cp` samples, concatenate.
pub fn ofdm_modulate(grid: &ResourceGrid, cp: usize) -> Result<ComplexSignal> {
    let n = grid.spec.fft_size;
    if cp >= n {
        return Err(Error::InvalidParameter(format!("cyclic prefix {cp} must be shorter than {n}")));
    }
    let mut out = Vec::with_capacity(grid.spec.symbols_per_frame * (n + cp));
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut planner = rustfft::FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;
    for s in 0..grid.spec.symbols_per_frame {
        for (k, &x) in grid.symbol(s).iter().enumerate() {
            buf[bin(k, n)] = x * scale;
        }
        ifft.process(&mut buf);
        out.extend_from_slice(&buf[n - cp..]);
        out.extend_from_slice(&buf);
    }
    Ok(ComplexSignal::new(out, BASE_SAMPLE_RATE_HZ))
}

/// Forward DFT of one useful symbol period starting at `start`, returned
/// in grid order.
pub fn demodulate_symbol(samples: &[Complex], start: usize, n: usize) -> Vec<Complex> {
    let mut buf: Vec<Complex> = samples[start..start + n].to_vec();
    crate::dsp::fft_in_place(&mut buf);
    (0..n).map(|k| buf[bin(k, n)]).collect()
}

/// Received cells (symbol-major) for a frame whose useful part of symbol
/// `s` begins at `first_useful + s·(n + cp)`.
pub fn ofdm_demodulate(samples: &[Complex], first_useful: usize, cp: usize, spec: &FrameSpec) -> Result<Vec<Complex>> {
    let n = spec.fft_size;
    let needed = first_useful + (spec.symbols_per_frame - 1) * (n + cp) + n;
    if samples.len() < needed {
        return Err(Error::TooShort { needed, actual: samples.len() });
    }
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut cells = Vec::with_capacity(n * spec.symbols_per_frame);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for s in 0..spec.symbols_per_frame {
        let start = first_useful + s * (n + cp);
        buf.copy_from_slice(&samples[start..start + n]);
        fft.process(&mut buf);
        cells.extend((0..n).map(|k| buf[bin(k, n)]));
    }
    Ok(cells)
}
