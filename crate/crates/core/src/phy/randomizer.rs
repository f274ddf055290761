//! Data randomizer: XOR with the PRBS `1 + x^14 + x^15`.

/// Initial register used when the seed's low 15 bits are all zero (an
/// all-zero register would lock the generator).
pub const DEFAULT_SEED: u16 = 0b100_1010_1000_0000;

/// Randomizer stream of `len` bits.
pub fn randomizer_stream(len: usize, seed: u64) -> Vec<u8> {
    let mut state = (seed & 0x7FFF) as u16;
    if state == 0 {
        state = DEFAULT_SEED;
    }
    (0..len)
        .map(|_| {
            let b = ((state >> 13) ^ (state >> 14)) & 1;
            state = ((state << 1) | b) & 0x7FFF;
            b as u8
        })
        .collect()
}

/// XORs `bits` with the randomizer stream. Applying it twice is the identity.
pub fn randomize(bits: &[u8], seed: u64) -> Vec<u8> {
    bits.iter().zip(randomizer_stream(bits.len(), seed)).map(|(b, r)| b ^ r).collect()
}
