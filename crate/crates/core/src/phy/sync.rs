//! Frame synchronization.
//!
//! 1. Coarse timing from the autocorrelation of the four-fold repeated
//!    first sync symbol (lag 32, window 96): the start of the plateau.
//! 2. Fine timing from cross-correlation with the known second sync symbol.
//! 3. CFO from the angle of the cyclic-prefix correlation summed over all
//!    symbols, unambiguous within ±Δf/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::framing::{reference_grid, FrameSpec};
use crate::phy::ofdm::ofdm_modulate;
use crate::signal::ComplexSignal;
use crate::Complex;

/// Minimum normalized coarse metric accepted as a frame.
pub const COARSE_THRESHOLD: f64 = 0.6;
/// Minimum normalized cross-correlation accepted at the fine stage.
pub const FINE_THRESHOLD: f64 = 0.3;

const LAG: usize = 32;
const WINDOW: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    /// Index of the first sample of the frame (start of symbol 0's prefix).
    pub timing: usize,
    pub cfo_hz: f64,
    /// Normalized fine-correlation peak in [0, 1].
    pub metric: f64,
}

/// Time-domain reference of the full-band sync symbol (useful part only).
pub fn sync_reference(spec: &FrameSpec, cp: usize, pilot_seed: u64) -> Result<Vec<Complex>> {
    let grid = reference_grid(spec, pilot_seed);
    let sig = ofdm_modulate(&grid, cp)?;
    let n = spec.fft_size;
    let start = (n + cp) + cp;
    Ok(sig.samples[start..start + n].to_vec())
}

/// Coarse metric `|P(d)| / E(d)` for every start `d` in `0..=last`.
fn coarse_metric(r: &[Complex], last: usize) -> Vec<f64> {
    let floor = 1e-12 * r.iter().map(|v| v.norm_sqr()).sum::<f64>().max(1e-300) / r.len() as f64 * WINDOW as f64;
    let mut p = Complex::new(0.0, 0.0);
    let mut e = 0.0;
    for n in 0..WINDOW {
        p += r[n].conj() * r[n + LAG];
        e += 0.5 * (r[n].norm_sqr() + r[n + LAG].norm_sqr());
    }
    let mut out = Vec::with_capacity(last + 1);
    for d in 0..=last {
        out.push(p.norm() / (e + floor));
        if d < last {
            p += r[d + WINDOW].conj() * r[d + WINDOW + LAG] - r[d].conj() * r[d + LAG];
            e += 0.5 * (r[d + WINDOW].norm_sqr() + r[d + WINDOW + LAG].norm_sqr() - r[d].norm_sqr() - r[d + LAG].norm_sqr());
        }
    }
    out
}

/// Locates a frame in `signal` (at the OFDM base rate).
pub fn synchronize(signal: &ComplexSignal, spec: &FrameSpec, cp: usize, pilot_seed: u64) -> Result<SyncResult> {
    let n = spec.fft_size;
    let sym = n + cp;
    let frame = spec.symbols_per_frame * sym;
    let r = &signal.samples;
    if r.len() < frame {
        return Err(Error::TooShort { needed: frame, actual: r.len() });
    }
    let last = r.len() - frame;

    // Coarse: the plateau of the repetition metric.
    let m = coarse_metric(r, last);
    let (best, &peak) = m.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    if !(peak >= COARSE_THRESHOLD) {
        return Err(Error::SyncNotFound { best_metric: peak });
    }
    let mut coarse = best;
    while coarse > 0 && m[coarse - 1] >= 0.9 * peak && best - coarse < sym {
        coarse -= 1;
    }

    // Fine: cross-correlate with the second sync symbol around its
    // expected position.
    let reference = sync_reference(spec, cp, pilot_seed)?;
    let ref_energy: f64 = reference.iter().map(|v| v.norm_sqr()).sum();
    let expected = coarse + sym + cp;
    let span = cp + sym / 4;
    let lo = expected.saturating_sub(span).max(sym + cp);
    let hi = (expected + span).min(last + sym + cp);
    let mut best_tau = lo;
    let mut best_val = -1.0;
    let mut best_norm = 0.0;
    for tau in lo..=hi {
        let seg = &r[tau..tau + n];
        let c: Complex = seg.iter().zip(&reference).map(|(x, y)| x * y.conj()).sum();
        let v = c.norm();
        if v > best_val {
            best_val = v;
            best_tau = tau;
            let seg_energy: f64 = seg.iter().map(|v| v.norm_sqr()).sum();
            best_norm = v / (ref_energy * seg_energy).sqrt().max(1e-300);
        }
    }
    if !(best_norm >= FINE_THRESHOLD) {
        return Err(Error::SyncNotFound { best_metric: best_norm });
    }
    let timing = best_tau - sym - cp;

    // CFO from the cyclic prefixes.
    let mut acc = Complex::new(0.0, 0.0);
    for s in 0..spec.symbols_per_frame {
        let start = timing + s * sym;
        for i in 0..cp {
            acc += r[start + i].conj() * r[start + i + n];
        }
    }
    let cfo_hz = acc.arg() * signal.sample_rate_hz / (2.0 * PI * n as f64);
    Ok(SyncResult { timing, cfo_hz, metric: best_norm })
}

/// Removes a carrier offset: multiplies sample `n` by `exp(−j2π f n/fs)`.
pub fn correct_cfo(samples: &mut [Complex], cfo_hz: f64, sample_rate_hz: f64) {
    let w = -2.0 * PI * cfo_hz / sample_rate_hz;
    for (n, s) in samples.iter_mut().enumerate() {
        *s *= Complex::from_polar(1.0, w * n as f64);
    }
}
