//! Gray-mapped square QAM with unit average energy.
//!
//! Each axis carries `m` bits: the first selects the sign (`0` → positive),
//! the rest Gray-index the magnitude `1, 3, 5, …`. In-phase bits come
//! first. QPSK therefore maps `00 → (1 + j)/√2`.

use serde::{Deserialize, Serialize};

use super::convolutional::ERASED;
use crate::error::{Error, Result};
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "QAM16")]
    Qam16,
    #[serde(rename = "QAM64")]
    Qam64,
}

impl Modulation {
    pub const ALL: [Modulation; 3] = [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    /// Constellation size M.
    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    fn axis_bits(self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// `1/√(2(M−1)/3)`: scale giving unit average energy.
    fn scale(self) -> f64 {
        (1.5 / (self.order() as f64 - 1.0)).sqrt()
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "QAM16",
            Modulation::Qam64 => "QAM64",
        })
    }
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

fn gray_encode(b: usize) -> usize {
    b ^ (b >> 1)
}

fn axis_level(bits: &[u8]) -> f64 {
    let sign = if bits[0] == 0 { 1.0 } else { -1.0 };
    let g = bits[1..].iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
    sign * (2 * gray_decode(g) + 1) as f64
}

fn axis_bits(v: f64, m: usize, out: &mut Vec<u8>) {
    out.push(u8::from(v < 0.0));
    if m == 1 {
        return;
    }
    let max = (1usize << (m - 1)) - 1;
    let idx = (((v.abs() - 1.0) / 2.0).round().max(0.0) as usize).min(max);
    let g = gray_encode(idx);
    for i in (0..m - 1).rev() {
        out.push(((g >> i) & 1) as u8);
    }
}

pub fn modulate(bits: &[u8], scheme: Modulation) -> Result<Vec<Complex>> {
    let bps = scheme.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(Error::BlockLength { length: bits.len(), block: bps });
    }
    let m = scheme.axis_bits();
    let s = scheme.scale();
    Ok(bits
        .chunks_exact(bps)
        .map(|c| Complex::new(axis_level(&c[..m]), axis_level(&c[m..])) * s)
        .collect())
}

/// Hard nearest-neighbour demapping.
pub fn demodulate(symbols: &[Complex], scheme: Modulation) -> Vec<u8> {
    let m = scheme.axis_bits();
    let inv = 1.0 / scheme.scale();
    let mut out = Vec::with_capacity(symbols.len() * scheme.bits_per_symbol());
    for z in symbols {
        axis_bits(z.re * inv, m, &mut out);
        axis_bits(z.im * inv, m, &mut out);
    }
    out
}

/// As [`demodulate`], but every bit of an erased symbol becomes [`ERASED`].
pub fn demodulate_with_erasures(symbols: &[Complex], erased: &[bool], scheme: Modulation) -> Vec<u8> {
    let bps = scheme.bits_per_symbol();
    let mut bits = demodulate(symbols, scheme);
    for (i, &e) in erased.iter().enumerate() {
        if e {
            bits[i * bps..(i + 1) * bps].iter_mut().for_each(|b| *b = ERASED);
        }
    }
    bits
}
