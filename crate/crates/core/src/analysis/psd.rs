//! Welch PSD estimation and band-power integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::Complex;

/// dB value reported for zero power.
pub const DB_FLOOR: f64 = -400.0;
pub const DEFAULT_SEGMENT: usize = 1024;
pub const DEFAULT_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    /// Strictly increasing, centred on DC.
    pub frequencies_hz: Vec<f64>,
    pub psd_db_per_hz: Vec<f64>,
    pub resolution_hz: f64,
}

pub fn to_db(p: f64) -> f64 {
    if p > 0.0 {
        10.0 * p.log10()
    } else {
        DB_FLOOR
    }
}

fn from_db(d: f64) -> f64 {
    if d <= DB_FLOOR {
        0.0
    } else {
        10f64.powf(d / 10.0)
    }
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()).collect()
}

/// Averaged periodogram with a periodic Hann window. Scaled so that
/// `Σ psd·Δf` equals the mean power of the analysed samples.
pub fn estimate_psd(signal: &ComplexSignal, segment_length: usize, overlap_fraction: f64) -> Result<SpectrumGrid> {
    let n = signal.len();
    if segment_length == 0 || segment_length > n {
        return Err(Error::TooShort { needed: segment_length.max(1), actual: n });
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::InvalidParameter(format!("overlap fraction {overlap_fraction} outside [0, 1)")));
    }
    let l = segment_length;
    let step = ((l as f64 * (1.0 - overlap_fraction)).round() as usize).max(1);
    let w = hann(l);
    let u: f64 = w.iter().map(|v| v * v).sum();
    let fft = rustfft::FftPlanner::new().plan_fft_forward(l);
    let mut acc = vec![0.0; l];
    let mut segments = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let mut start = 0;
    while start + l <= n {
        for (b, (x, wi)) in buf.iter_mut().zip(signal.samples[start..start + l].iter().zip(&w)) {
            *b = x * wi;
        }
        fft.process(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let fs = signal.sample_rate_hz;
    let scale = 1.0 / (fs * u * segments as f64);
    let half = l / 2;
    let frequencies_hz = (0..l).map(|i| (i as f64 - half as f64) * fs / l as f64).collect();
    let psd_db_per_hz = (0..l).map(|i| to_db(acc[(i + l - half) % l] * scale)).collect();
    Ok(SpectrumGrid { frequencies_hz, psd_db_per_hz, resolution_hz: fs / l as f64 })
}

impl SpectrumGrid {
    /// Linear PSD linearly interpolated at `f` (inside the span).
    fn linear_at(&self, f: f64) -> f64 {
        let fr = &self.frequencies_hz;
        let i = fr.partition_point(|&x| x <= f).clamp(1, fr.len() - 1);
        let (f0, f1) = (fr[i - 1], fr[i]);
        let (p0, p1) = (from_db(self.psd_db_per_hz[i - 1]), from_db(self.psd_db_per_hz[i]));
        p0 + (p1 - p0) * (f - f0) / (f1 - f0)
    }

    /// Total power, `Σ psd·Δf`.
    pub fn total_power(&self) -> f64 {
        self.psd_db_per_hz.iter().map(|&d| from_db(d)).sum::<f64>() * self.resolution_hz
    }

    /// Trapezoidal integral of the linear PSD over `[f1, f2]`.
    pub fn band_power(&self, f1: f64, f2: f64) -> Result<f64> {
        let fr = &self.frequencies_hz;
        let (lo, hi) = (fr[0], *fr.last().unwrap());
        if fr.len() < 2 || f1 < lo || f2 > hi || f1 > f2 {
            return Err(Error::OutOfSpan { f1, f2, lo, hi });
        }
        if f1 == f2 {
            return Ok(0.0);
        }
        let mut pts = vec![(f1, self.linear_at(f1))];
        for (i, &f) in fr.iter().enumerate() {
            if f > f1 && f < f2 {
                pts.push((f, from_db(self.psd_db_per_hz[i])));
            }
        }
        pts.push((f2, self.linear_at(f2)));
        Ok(pts.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum())
    }
}

/// Integrated PSD over `[f1, f2]` in dB.
pub fn interference_at(psd: &SpectrumGrid, f1: f64, f2: f64) -> Result<f64> {
    Ok(to_db(psd.band_power(f1, f2)?))
}
