//! Concatenated outer Reed–Solomon (rate ≈ 0.9) and inner rate-1/2
//! convolutional code, dimensioned per frame.
//!
//! Given `C` coded bits available in a frame, the largest whole number of
//! RS bytes `n_total` with `2·(8·n_total + 6) ≤ C` is split into
//! `⌈n_total/255⌉` codewords of near-equal length; each codeword's `k` is
//! the integer closest to `0.9·n`. Leftover coded bits are zero padding.

use serde::{Deserialize, Serialize};

use super::convolutional::{cc_encode, viterbi_decode, TAIL_BITS};
use super::reed_solomon::ReedSolomon;
use crate::error::{Error, Result};

pub const OUTER_RATE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FecGeometry {
    /// `(n, k)` per RS codeword.
    pub blocks: Vec<(usize, usize)>,
    /// Coded bits the frame offers.
    pub frame_bits: usize,
}

impl FecGeometry {
    pub fn for_frame(frame_bits: usize) -> Result<Self> {
        if frame_bits < 2 * (8 * 3 + TAIL_BITS) {
            return Err(Error::InvalidParameter(format!("{frame_bits} coded bits cannot hold an RS codeword")));
        }
        let n_total = (frame_bits / 2 - TAIL_BITS) / 8;
        let count = n_total.div_ceil(255);
        let base = n_total / count;
        let extra = n_total % count;
        let blocks = (0..count)
            .map(|i| {
                let n = base + usize::from(i < extra);
                let k = ((OUTER_RATE * n as f64).round() as usize).clamp(1, n - 1);
                (n, k)
            })
            .collect();
        Ok(Self { blocks, frame_bits })
    }

    pub fn payload_bits(&self) -> usize {
        8 * self.blocks.iter().map(|b| b.1).sum::<usize>()
    }

    pub fn rs_bits(&self) -> usize {
        8 * self.blocks.iter().map(|b| b.0).sum::<usize>()
    }

    /// Coded bits before padding.
    pub fn coded_bits(&self) -> usize {
        2 * (self.rs_bits() + TAIL_BITS)
    }

    pub fn rate(&self) -> f64 {
        self.payload_bits() as f64 / self.frame_bits as f64
    }
}

fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1))).collect()
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1)).collect()
}

/// RS → CC encode, padded with zeros to the frame size.
pub fn fec_encode(geometry: &FecGeometry, bits: &[u8]) -> Result<Vec<u8>> {
    if bits.len() != geometry.payload_bits() {
        return Err(Error::CapacityMismatch { expected: geometry.payload_bits(), actual: bits.len() });
    }
    let bytes = bits_to_bytes(bits);
    let mut rs_out = Vec::with_capacity(geometry.rs_bits() / 8);
    let mut at = 0;
    for &(n, k) in &geometry.blocks {
        rs_out.extend(ReedSolomon::new(n, k)?.encode(&bytes[at..at + k]));
        at += k;
    }
    let mut coded = cc_encode(&bytes_to_bits(&rs_out));
    coded.resize(geometry.frame_bits, 0);
    Ok(coded)
}

/// Viterbi → RS decode. Returns payload bits and a failure flag per RS
/// codeword (flagged blocks still emit their uncorrected message bytes).
pub fn fec_decode(geometry: &FecGeometry, coded: &[u8]) -> Result<(Vec<u8>, Vec<bool>)> {
    if coded.len() != geometry.frame_bits {
        return Err(Error::CapacityMismatch { expected: geometry.frame_bits, actual: coded.len() });
    }
    let decoded = viterbi_decode(&coded[..geometry.coded_bits()]);
    let bytes = bits_to_bytes(&decoded);
    let mut payload = Vec::with_capacity(geometry.payload_bits() / 8);
    let mut failed = Vec::with_capacity(geometry.blocks.len());
    let mut at = 0;
    for &(n, k) in &geometry.blocks {
        let (msg, ok) = ReedSolomon::new(n, k)?.decode(&bytes[at..at + n]);
        payload.extend(msg);
        failed.push(!ok);
        at += n;
    }
    Ok((bytes_to_bits(&payload), failed))
}
