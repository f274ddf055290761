//! Uniformly sampled complex baseband signals and their on-disk format.
//!
//! IQ files are interleaved little-endian `f64` pairs; a JSON sidecar with
//! the same stem and a `.json` extension carries the metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex;

/// Complex baseband samples plus the metadata the receiver needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    pub samples: Vec<Complex>,
    pub sample_rate_hz: f64,
    /// Accumulated linear-phase delay of every filter applied so far.
    pub group_delay_samples: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    sample_rate_hz: f64,
    group_delay_samples: usize,
    sample_count: usize,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex>, sample_rate_hz: f64) -> Self {
        assert!(sample_rate_hz > 0.0, "sample rate must be positive");
        Self {
            samples,
            sample_rate_hz,
            group_delay_samples: 0,
        }
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self::new(vec![Complex::new(0.0, 0.0); len], sample_rate_hz)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean power `E|x|²`; zero for an empty signal.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Multiplies by `exp(j2π f n / fs)`, with `n` counted from `start_index`.
    pub fn frequency_shift(&mut self, offset_hz: f64, start_index: usize) {
        let w = 2.0 * std::f64::consts::PI * offset_hz / self.sample_rate_hz;
        for (n, s) in self.samples.iter_mut().enumerate() {
            *s *= Complex::from_polar(1.0, w * (n + start_index) as f64);
        }
    }

    /// Returns a copy shifted by `offset_hz`.
    pub fn shifted(&self, offset_hz: f64) -> Self {
        let mut out = self.clone();
        out.frequency_shift(offset_hz, 0);
        out
    }

    /// Adds `other` into `self`, starting at sample `at`, growing as needed.
    pub fn add_at(&mut self, other: &[Complex], at: usize) {
        if self.samples.len() < at + other.len() {
            self.samples.resize(at + other.len(), Complex::new(0.0, 0.0));
        }
        for (dst, src) in self.samples[at..].iter_mut().zip(other) {
            *dst += *src;
        }
    }

    pub fn write_iq(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.samples.len() * 16);
        for s in &self.samples {
            bytes.extend_from_slice(&s.re.to_le_bytes());
            bytes.extend_from_slice(&s.im.to_le_bytes());
        }
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
        let sidecar = Sidecar {
            sample_rate_hz: self.sample_rate_hz,
            group_delay_samples: self.group_delay_samples,
            sample_count: self.samples.len(),
        };
        let side_path = path.with_extension("json");
        let text = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(&side_path, text).map_err(|e| Error::io(&side_path, e))
    }

    pub fn read_iq(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() % 16 != 0 {
            return Err(Error::Parse(format!(
                "{}: {} bytes is not a whole number of complex f64 samples",
                path.display(),
                bytes.len()
            )));
        }
        let side_path = path.with_extension("json");
        let text = std::fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
        let sidecar: Sidecar = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", side_path.display())))?;
        let samples: Vec<Complex> = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex::new(re, im)
            })
            .collect();
        if samples.len() != sidecar.sample_count {
            return Err(Error::LengthMismatch(format!(
                "{} holds {} samples, sidecar says {}",
                path.display(),
                samples.len(),
                sidecar.sample_count
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz: sidecar.sample_rate_hz,
            group_delay_samples: sidecar.group_delay_samples,
        })
    }
}

/// Reads a raw bit file: one ASCII `0`/`1` per bit, whitespace ignored.
pub fn read_bits(path: &Path) -> Result<Vec<u8>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Parse(format!("{}: invalid bit character {other:?}", path.display()))),
        })
        .collect()
}

pub fn write_bits(path: &Path, bits: &[u8]) -> Result<()> {
    let mut text: String = bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
