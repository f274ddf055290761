//! Parks–McClellan equiripple design (Remez exchange) for odd-length,
//! symmetric (type-I) FIR filters.
//!
//! Frequencies are normalized so that 1.0 is the Nyquist frequency.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 250;
pub const RIPPLE_TOLERANCE: f64 = 1e-6;

/// One band of the piecewise-constant specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemezBand {
    pub lower: f64,
    pub upper: f64,
    pub desired: f64,
    pub weight: f64,
}

struct Grid {
    x: Vec<f64>,
    desired: Vec<f64>,
    weight: Vec<f64>,
    /// Index of the first grid point of each band (for extremum search).
    band_start: Vec<usize>,
}

fn build_grid(bands: &[RemezBand], r: usize, density: usize) -> Grid {
    let delta = 1.0 / (density * r) as f64;
    let mut grid = Grid { x: vec![], desired: vec![], weight: vec![], band_start: vec![] };
    for b in bands {
        grid.band_start.push(grid.x.len());
        let points = (((b.upper - b.lower) / delta).ceil() as usize).max(1);
        for i in 0..=points {
            let f = if i == points { b.upper } else { b.lower + i as f64 * delta };
            grid.x.push((PI * f).cos());
            grid.desired.push(b.desired);
            grid.weight.push(b.weight);
        }
    }
    grid
}

/// Barycentric weights `1/Π_{i≠j}(x_j − x_i)`, rescaled by a common factor
/// (harmless: every use is a ratio) to stay inside floating-point range.
fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let logs: Vec<(f64, f64)> = (0..x.len())
        .map(|j| {
            let mut log_mag = 0.0;
            let mut sign = 1.0;
            for (i, &xi) in x.iter().enumerate() {
                if i != j {
                    let d = 2.0 * (x[j] - xi);
                    log_mag += d.abs().ln();
                    if d < 0.0 {
                        sign = -sign;
                    }
                }
            }
            (log_mag, sign)
        })
        .collect();
    let mean = logs.iter().map(|l| l.0).sum::<f64>() / logs.len() as f64;
    logs.iter().map(|&(m, s)| s * (mean - m).exp()).collect()
}

struct Interpolant {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl Interpolant {
    fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &yj), &wj) in self.x.iter().zip(&self.y).zip(&self.w) {
            let d = x - xj;
            if d == 0.0 {
                return yj;
            }
            let t = wj / d;
            num += t * yj;
            den += t;
        }
        num / den
    }
}

/// Designs a length-`num_taps` (odd) linear-phase filter.
///
/// The extremal set is initialised at Chebyshev nodes of the `cos ω`
/// variable (equispaced in frequency over the union of bands) and the
/// exchange stops when the relative change of the levelled ripple drops
/// below [`RIPPLE_TOLERANCE`] or the extremal set stops moving. Failure to
/// converge within [`MAX_ITERATIONS`] returns [`Error::DesignFailure`].
pub fn remez(num_taps: usize, bands: &[RemezBand], grid_density: usize) -> Result<Vec<f64>> {
    if num_taps % 2 == 0 || num_taps < 3 {
        return Err(Error::InvalidParameter(format!("remez needs an odd length >= 3, got {num_taps}")));
    }
    if bands.is_empty() || grid_density == 0 {
        return Err(Error::InvalidParameter("remez needs at least one band and a positive grid density".into()));
    }
    for (i, b) in bands.iter().enumerate() {
        let ordered = 0.0 <= b.lower && b.lower < b.upper && b.upper <= 1.0;
        let after_prev = i == 0 || bands[i - 1].upper < b.lower;
        if !ordered || !after_prev || b.weight <= 0.0 {
            return Err(Error::InvalidParameter(format!("invalid remez band {i}: {b:?}")));
        }
    }

    let m = (num_taps - 1) / 2;
    let r = m + 1;
    let n_ext = r + 1;
    let grid = build_grid(bands, r, grid_density);
    let g = grid.x.len();
    if g < n_ext {
        return Err(Error::InvalidParameter("frequency grid too coarse for the filter length".into()));
    }

    let mut ext: Vec<usize> = (0..n_ext).map(|j| (j * (g - 1) + r / 2) / r).collect();
    ext.dedup();
    if ext.len() != n_ext {
        return Err(Error::InvalidParameter("could not seed the extremal set".into()));
    }

    let mut delta = 0.0f64;
    let mut interp: Option<Interpolant> = None;
    let mut error = vec![0.0; g];
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        let xe: Vec<f64> = ext.iter().map(|&i| grid.x[i]).collect();
        let ad = barycentric_weights(&xe);
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &i) in ext.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            num += ad[j] * grid.desired[i];
            den += sign * ad[j] / grid.weight[i];
        }
        let new_delta = num / den;

        let y: Vec<f64> = ext[..r]
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                grid.desired[i] - sign * new_delta / grid.weight[i]
            })
            .collect();
        let ip = Interpolant { w: barycentric_weights(&xe[..r]), x: xe[..r].to_vec(), y };
        for (k, e) in error.iter_mut().enumerate() {
            *e = grid.weight[k] * (grid.desired[k] - ip.eval(grid.x[k]));
        }
        interp = Some(ip);

        let new_ext = find_extrema(&error, &grid.band_start, n_ext);
        let ripple_change = (new_delta.abs() - delta.abs()).abs() / new_delta.abs().max(f64::MIN_POSITIVE);
        let max_err = error.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        delta = new_delta;

        match new_ext {
            Some(ne) => {
                let unchanged = ne == ext;
                ext = ne;
                let levelled = (max_err - delta.abs()) <= 1e-3 * delta.abs();
                if unchanged || (ripple_change < RIPPLE_TOLERANCE && levelled) {
                    converged = true;
                    break;
                }
            }
            None => break,
        }
    }

    if !converged {
        return Err(Error::DesignFailure { iterations: MAX_ITERATIONS, last_ripple: delta.abs() });
    }
    let ip = interp.expect("at least one iteration ran");

    // Sample the amplitude response on the length-L DFT grid and invert.
    let l = num_taps as f64;
    let a: Vec<f64> = (0..=m).map(|k| ip.eval((2.0 * PI * k as f64 / l).cos())).collect();
    let mut h = vec![0.0; num_taps];
    for n in 0..=m {
        let mut s = a[0];
        for (k, &ak) in a.iter().enumerate().skip(1) {
            s += 2.0 * ak * (2.0 * PI * (n * k) as f64 / l).cos();
        }
        h[m - n] = s / l;
        h[m + n] = s / l;
    }
    Ok(h)
}

/// Locates `n_ext` alternating extrema of the weighted error.
fn find_extrema(err: &[f64], band_start: &[usize], n_ext: usize) -> Option<Vec<usize>> {
    let g = err.len();
    let mut band_end: Vec<usize> = band_start[1..].to_vec();
    band_end.push(g);

    let mut cand: Vec<usize> = Vec::new();
    for (&s, &e) in band_start.iter().zip(&band_end) {
        for k in s..e {
            let v = err[k];
            let left = if k > s { err[k - 1] } else { f64::NAN };
            let right = if k + 1 < e { err[k + 1] } else { f64::NAN };
            let is_max = v > 0.0 && !(left > v) && !(right > v);
            let is_min = v < 0.0 && !(left < v) && !(right < v);
            if is_max || is_min {
                cand.push(k);
            }
        }
    }

    let merge = |c: Vec<usize>| -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(c.len());
        for k in c {
            match out.last() {
                Some(&p) if err[p].signum() == err[k].signum() => {
                    if err[k].abs() > err[p].abs() {
                        *out.last_mut().unwrap() = k;
                    }
                }
                _ => out.push(k),
            }
        }
        out
    };

    let mut cand = merge(cand);
    while cand.len() > n_ext {
        if cand.len() == n_ext + 1 {
            if err[cand[0]].abs() < err[*cand.last().unwrap()].abs() {
                cand.remove(0);
            } else {
                cand.pop();
            }
        } else {
            let (weakest, _) = cand
                .iter()
                .enumerate()
                .min_by(|a, b| err[*a.1].abs().total_cmp(&err[*b.1].abs()))
                .unwrap();
            cand.remove(weakest);
            cand = merge(cand);
        }
    }
    (cand.len() == n_ext).then_some(cand)
}
