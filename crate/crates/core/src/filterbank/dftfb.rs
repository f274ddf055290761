//! Polyphase DFT filter bank: one realized filter, K_b modulated branches.

use std::collections::BTreeSet;

use super::reconfig::ReconfigFilter;
use crate::error::{Error, Result};
use crate::Complex;

#[derive(Debug, Clone)]
pub struct MultibandFilterBank {
    pub base: ReconfigFilter,
    /// DFT order K_b.
    pub branches: usize,
    pub active_bands: BTreeSet<usize>,
    /// `p_q[m] = (−1)^n f[n]` at `n = mK_b + q`, zero-padded to a multiple
    /// of K_b.
    pub polyphase_components: Vec<Vec<f64>>,
    composite: Vec<Complex>,
}

/// Centre of branch `k` on the normalized `[−1, 1)` axis.
pub fn branch_center(k: usize, branches: usize) -> f64 {
    2.0 * k as f64 / branches as f64 - 1.0
}

/// Builds the bank. Any `K_b ≥ 1` is accepted (band centres such as
/// ±200 kHz at 1.25 MHz need K_b = 50, which is not a power of two).
pub fn build_dftfb(filter: ReconfigFilter, branches: usize, active: &BTreeSet<usize>) -> Result<MultibandFilterBank> {
    if branches == 0 {
        return Err(Error::InvalidParameter("DFT filter bank needs at least one branch".into()));
    }
    if active.is_empty() {
        return Err(Error::EmptyBandSet);
    }
    if let Some(&bad) = active.iter().find(|&&k| k >= branches) {
        return Err(Error::InvalidParameter(format!("band {bad} outside 0..{branches}")));
    }

    let len = filter.taps.len();
    let padded = len.div_ceil(branches) * branches;
    let per_branch = padded / branches;
    let mut polyphase = vec![vec![0.0; per_branch]; branches];
    for (n, &c) in filter.taps.iter().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        polyphase[n % branches][n / branches] = sign * c;
    }

    // W_q = Σ_{k∈A} e^{j2πkq/K_b}: an unscaled inverse DFT of the band mask.
    let mut weights = vec![Complex::new(0.0, 0.0); branches];
    for &k in active {
        weights[k] = Complex::new(1.0, 0.0);
    }
    crate::dsp::ifft_in_place(&mut weights);

    let composite = (0..len)
        .map(|n| weights[n % branches] * polyphase[n % branches][n / branches])
        .collect();

    Ok(MultibandFilterBank {
        base: filter,
        branches,
        active_bands: active.clone(),
        polyphase_components: polyphase,
        composite,
    })
}

impl MultibandFilterBank {
    /// Impulse response of the sum of the active branches.
    pub fn composite_taps(&self) -> &[Complex] {
        &self.composite
    }

    pub fn centers(&self) -> Vec<f64> {
        self.active_bands.iter().map(|&k| branch_center(k, self.branches)).collect()
    }

    pub fn group_delay(&self) -> usize {
        self.base.group_delay()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::prototype::ldacs_prototype;
    use crate::Bandwidth;

    #[test]
    fn four_branch_centres() {
        let c: Vec<f64> = (0..4).map(|k| branch_center(k, 4)).collect();
        assert_eq!(c, vec![-1.0, -0.5, 0.0, 0.5]);
    }

    #[test]
    fn polyphase_lengths_sum_to_padded_length() {
        let f = ReconfigFilter::for_bandwidth(ldacs_prototype(), Bandwidth::Khz498).unwrap();
        let len = f.taps.len();
        for kb in [1, 2, 4, 8, 16, 50] {
            let bank = build_dftfb(f.clone(), kb, &BTreeSet::from([0])).unwrap();
            let total: usize = bank.polyphase_components.iter().map(Vec::len).sum();
            assert_eq!(total, len.div_ceil(kb) * kb);
        }
    }

    #[test]
    fn empty_active_set_rejected() {
        let f = ReconfigFilter::for_bandwidth(ldacs_prototype(), Bandwidth::Khz186).unwrap();
        assert_eq!(build_dftfb(f, 4, &BTreeSet::new()).unwrap_err(), Error::EmptyBandSet);
    }
}
