//! Helical block interleaver.
//!
//! Bits are written row-wise into an `R × C` array and read column by
//! column, each column starting one row further down than the previous one
//! (the helix). Two bits adjacent on the channel therefore sit at least
//! `C − 1` positions apart before interleaving, and any burst shorter than
//! `R` touches each row at most once.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interleaver {
    pub rows: usize,
    pub cols: usize,
}

/// Smallest row count used by [`Interleaver::for_length`].
pub const MIN_ROWS: usize = 9;

impl Interleaver {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("interleaver needs at least one row and column".into()));
        }
        Ok(Self { rows, cols })
    }

    /// A geometry for a block of exactly `len` bits: the smallest divisor
    /// `R ≥ 9` of `len` with `len/R ≥ R + 1`.
    pub fn for_length(len: usize) -> Result<Self> {
        if len == 1 {
            return Self::new(1, 1);
        }
        (MIN_ROWS..)
            .take_while(|r| r * (r + 1) <= len)
            .find(|r| len % r == 0)
            .map(|r| Self { rows: r, cols: len / r })
            .ok_or_else(|| Error::InvalidParameter(format!("no helical interleaver geometry for {len} bits")))
    }

    pub fn block_size(&self) -> usize {
        self.rows * self.cols
    }

    /// Longest burst guaranteed to be fully dispersed.
    pub fn depth(&self) -> usize {
        self.rows.saturating_sub(1).max(1)
    }

    /// Source index (row-major write order) of output position `t`.
    fn source(&self, t: usize) -> usize {
        let q = t / self.rows;
        let r = (t % self.rows + q) % self.rows;
        r * self.cols + q
    }

    fn check(&self, len: usize) -> Result<()> {
        if len % self.block_size() != 0 {
            Err(Error::BlockLength { length: len, block: self.block_size() })
        } else {
            Ok(())
        }
    }

    pub fn interleave<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.check(data.len())?;
        let b = self.block_size();
        Ok(data
            .chunks_exact(b)
            .flat_map(|blk| (0..b).map(move |t| blk[self.source(t)]))
            .collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, data: &[T]) -> Result<Vec<T>> {
        self.check(data.len())?;
        let b = self.block_size();
        let mut out = vec![T::default(); data.len()];
        for (blk_in, blk_out) in data.chunks_exact(b).zip(out.chunks_exact_mut(b)) {
            for (t, &v) in blk_in.iter().enumerate() {
                blk_out[self.source(t)] = v;
            }
        }
        Ok(out)
    }
}
