//! Shortened systematic Reed–Solomon codes over GF(256).
//!
//! Generator roots are `α^1 … α^(n−k)`; decoding is bounded-distance
//! (Berlekamp–Massey, Chien search, Forney).

use super::gf256::{div, mul, pow_alpha};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReedSolomon {
    pub n: usize,
    pub k: usize,
    generator: Vec<u8>,
}

impl ReedSolomon {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if !(k >= 1 && k < n && n <= 255) {
            return Err(Error::InvalidParameter(format!("invalid RS({n}, {k})")));
        }
        // g(x) = Π (x − α^i), coefficients highest degree first.
        let mut g = vec![1u8];
        for i in 1..=(n - k) {
            let root = pow_alpha(i as i64);
            let mut next = vec![0u8; g.len() + 1];
            for (j, &c) in g.iter().enumerate() {
                next[j] ^= c;
                next[j + 1] ^= mul(c, root);
            }
            g = next;
        }
        Ok(Self { n, k, generator: g })
    }

    pub fn parity_len(&self) -> usize {
        self.n - self.k
    }

    /// Correctable symbol errors `t = ⌊(n−k)/2⌋`.
    pub fn t(&self) -> usize {
        self.parity_len() / 2
    }

    /// Systematic encoding: message followed by parity.
    pub fn encode(&self, msg: &[u8]) -> Vec<u8> {
        assert_eq!(msg.len(), self.k);
        let p = self.parity_len();
        let mut rem = vec![0u8; p];
        for &m in msg {
            let fb = m ^ rem[0];
            rem.rotate_left(1);
            rem[p - 1] = 0;
            if fb != 0 {
                for (r, &g) in rem.iter_mut().zip(&self.generator[1..]) {
                    *r ^= mul(fb, g);
                }
            }
        }
        let mut out = msg.to_vec();
        out.extend(rem);
        out
    }

    /// Decodes one codeword. Returns the message and whether decoding
    /// succeeded; on failure the received message bytes are returned as-is.
    pub fn decode(&self, received: &[u8]) -> (Vec<u8>, bool) {
        assert_eq!(received.len(), self.n);
        let p = self.parity_len();
        // Codeword polynomial: received[0] is the coefficient of x^(n−1).
        let eval = |x: u8| received.iter().fold(0u8, |acc, &c| mul(acc, x) ^ c);
        let synd: Vec<u8> = (1..=p).map(|i| eval(pow_alpha(i as i64))).collect();
        if synd.iter().all(|&s| s == 0) {
            return (received[..self.k].to_vec(), true);
        }

        // Berlekamp–Massey; polynomials lowest degree first.
        let mut sigma = vec![1u8];
        let mut prev = vec![1u8];
        let mut l = 0usize;
        let mut shift = 1usize;
        let mut b = 1u8;
        for r in 0..p {
            let mut d = synd[r];
            for i in 1..=l.min(sigma.len() - 1) {
                d ^= mul(sigma[i], synd[r - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = div(d, b);
            let mut next = sigma.clone();
            if next.len() < prev.len() + shift {
                next.resize(prev.len() + shift, 0);
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i + shift] ^= mul(coef, c);
            }
            if 2 * l <= r {
                l = r + 1 - l;
                prev = sigma;
                b = d;
                shift = 1;
            } else {
                shift += 1;
            }
            sigma = next;
        }
        while sigma.len() > 1 && *sigma.last().unwrap() == 0 {
            sigma.pop();
        }
        if l > self.t() || sigma.len() - 1 != l {
            return (received[..self.k].to_vec(), false);
        }

        // Chien search over positions of the shortened code.
        let mut positions = Vec::new();
        for pos in 0..self.n {
            // Position `pos` (from the start) has locator X = α^(n−1−pos).
            let x_inv = pow_alpha(-((self.n - 1 - pos) as i64));
            let v = sigma.iter().rev().fold(0u8, |acc, &c| mul(acc, x_inv) ^ c);
            if v == 0 {
                positions.push(pos);
            }
        }
        if positions.len() != l {
            return (received[..self.k].to_vec(), false);
        }

        // Forney: omega = S(x)·σ(x) mod x^p, with S(x) = Σ S_{i+1} x^i.
        let mut omega = vec![0u8; p];
        for (i, &s) in synd.iter().enumerate() {
            for (j, &c) in sigma.iter().enumerate() {
                if i + j < p {
                    omega[i + j] ^= mul(s, c);
                }
            }
        }
        let mut corrected = received.to_vec();
        for &pos in &positions {
            let e = (self.n - 1 - pos) as i64;
            let x_inv = pow_alpha(-e);
            let om = omega.iter().rev().fold(0u8, |acc, &c| mul(acc, x_inv) ^ c);
            // σ'(x): odd-degree terms.
            let mut deriv = 0u8;
            for (j, &c) in sigma.iter().enumerate().skip(1).step_by(2) {
                deriv ^= mul(c, pow_alpha(-e * (j as i64 - 1)));
            }
            if deriv == 0 {
                return (received[..self.k].to_vec(), false);
            }
            // With first root α^1: e_j = X_j^{1−1}·Ω(X⁻¹)/σ'(X⁻¹) = Ω/σ'.
            corrected[pos] ^= div(om, deriv);
        }
        let ok = (1..=p).all(|i| corrected.iter().fold(0u8, |acc, &c| mul(acc, pow_alpha(i as i64)) ^ c) == 0);
        if ok {
            (corrected[..self.k].to_vec(), true)
        } else {
            (received[..self.k].to_vec(), false)
        }
    }
}
