//! Rate-1/2, constraint-length 7 convolutional code, generators (133, 171)
//! octal, zero-tail terminated, with hard-decision Viterbi decoding.
//!
//! Decoder inputs are hard bits (`0`/`1`) or [`ERASED`]; erased positions
//! contribute no branch metric.

pub const CONSTRAINT_LENGTH: usize = 7;
pub const TAIL_BITS: usize = CONSTRAINT_LENGTH - 1;
// The register holds the newest input in its least significant bit, so the
// generator masks are applied bit-reversed: tap 0 of 133 (MSB) sees the
// current input.
const G0: u32 = reverse7(0o133);
const G1: u32 = reverse7(0o171);
const STATES: usize = 1 << TAIL_BITS;

/// Marker for an erased (unknown) coded bit.
pub const ERASED: u8 = 0xFF;

const fn reverse7(g: u32) -> u32 {
    let mut r = 0;
    let mut i = 0;
    while i < 7 {
        r |= ((g >> i) & 1) << (6 - i);
        i += 1;
    }
    r
}

fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Encodes `bits` and appends the 6-bit zero tail: output length is
/// `2·(bits.len() + 6)`.
pub fn cc_encode(bits: &[u8]) -> Vec<u8> {
    let mut reg = 0u32;
    let mut out = Vec::with_capacity(2 * (bits.len() + TAIL_BITS));
    for &b in bits.iter().chain(std::iter::repeat(&0).take(TAIL_BITS)) {
        reg = ((reg << 1) | u32::from(b & 1)) & 0x7F;
        out.push(parity(reg & G0));
        out.push(parity(reg & G1));
    }
    out
}

/// Viterbi decoding of a zero-tail terminated stream; returns the
/// information bits (tail removed).
pub fn viterbi_decode(coded: &[u8]) -> Vec<u8> {
    assert!(coded.len() % 2 == 0, "coded stream must hold bit pairs");
    let steps = coded.len() / 2;
    if steps == 0 {
        return Vec::new();
    }
    // Precompute outputs for (state, input): register = state<<1 | input
    // where `state` holds the 6 most recent inputs.
    let mut outputs = [[(0u8, 0u8); 2]; STATES];
    for (s, row) in outputs.iter_mut().enumerate() {
        for (input, o) in row.iter_mut().enumerate() {
            let reg = ((s as u32) << 1) | input as u32;
            *o = (parity(reg & G0), parity(reg & G1));
        }
    }

    const INF: u32 = u32::MAX / 2;
    let mut metric = vec![INF; STATES];
    metric[0] = 0;
    // decisions[t][next_state] = predecessor state
    let mut decisions = vec![[0u8; STATES]; steps];
    let mut next = vec![INF; STATES];
    for (t, pair) in coded.chunks_exact(2).enumerate() {
        next.iter_mut().for_each(|m| *m = INF);
        for s in 0..STATES {
            let m = metric[s];
            if m >= INF {
                continue;
            }
            for input in 0..2 {
                let (o0, o1) = outputs[s][input];
                let mut bm = 0;
                if pair[0] != ERASED && pair[0] != o0 {
                    bm += 1;
                }
                if pair[1] != ERASED && pair[1] != o1 {
                    bm += 1;
                }
                let ns = ((s << 1) | input) & (STATES - 1);
                let cand = m + bm;
                if cand < next[ns] {
                    next[ns] = cand;
                    decisions[t][ns] = s as u8;
                }
            }
        }
        std::mem::swap(&mut metric, &mut next);
    }

    // Zero tail: trace back from state 0.
    let mut state = 0usize;
    let mut bits = vec![0u8; steps];
    for t in (0..steps).rev() {
        bits[t] = (state & 1) as u8;
        state = decisions[t][state] as usize;
    }
    bits.truncate(steps.saturating_sub(TAIL_BITS));
    bits
}
