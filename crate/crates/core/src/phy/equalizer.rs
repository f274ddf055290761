//! Pilot-aided channel estimation and zero-forcing equalization.

use crate::error::{Error, Result};
use crate::framing::{CellKind, ResourceGrid};
use crate::Complex;

/// Cells whose combined response magnitude falls below this are erased.
pub const ERASURE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Equalized {
    /// Equalized data symbols in mapping order.
    pub symbols: Vec<Complex>,
    /// Parallel erasure flags.
    pub erased: Vec<bool>,
    /// Channel estimate per cell (symbol-major), excluding the filter
    /// amplitude; zero on unused cells.
    pub channel: Vec<Complex>,
}

/// Linear interpolation of `(x, y)` samples (sorted by `x`) at `x0`,
/// holding the end values outside the span.
fn interp(points: &[(usize, Complex)], x0: usize) -> Complex {
    match points.iter().position(|&(x, _)| x >= x0) {
        None => points.last().unwrap().1,
        Some(0) => points[0].1,
        Some(i) => {
            let (xa, ya) = points[i - 1];
            let (xb, yb) = points[i];
            let t = (x0 - xa) as f64 / (xb - xa) as f64;
            ya + (yb - ya) * t
        }
    }
}

/// LS estimates at pilot and sync cells, linear interpolation in time for
/// each subcarrier, then in frequency for subcarriers without usable
/// observations. `amplitude[k]` is the real combined filter response at
/// grid subcarrier `k` (all ones when unfiltered).
pub fn estimate_channel(received: &[Complex], reference: &ResourceGrid, amplitude: &[f64]) -> Result<Vec<Complex>> {
    let spec = &reference.spec;
    let n = spec.fft_size;
    let symbols = spec.symbols_per_frame;
    let used = spec.used_indices();
    let mut per_carrier: Vec<Option<Vec<Complex>>> = vec![None; n];
    for &k in &used {
        if amplitude[k].abs() < ERASURE_FLOOR {
            continue;
        }
        let obs: Vec<(usize, Complex)> = (0..symbols)
            .filter(|&s| matches!(reference.kind(s, k), CellKind::Pilot | CellKind::Sync))
            .map(|s| (s, received[s * n + k] / (reference.get(s, k) * amplitude[k])))
            .collect();
        if !obs.is_empty() {
            per_carrier[k] = Some((0..symbols).map(|s| interp(&obs, s)).collect());
        }
    }
    let known: Vec<usize> = used.iter().copied().filter(|&k| per_carrier[k].is_some()).collect();
    if known.is_empty() {
        return Err(Error::EstimationFailure);
    }
    let mut channel = vec![Complex::new(0.0, 0.0); n * symbols];
    for s in 0..symbols {
        let column: Vec<(usize, Complex)> = known.iter().map(|&k| (k, per_carrier[k].as_ref().unwrap()[s])).collect();
        for &k in &used {
            channel[s * n + k] = match &per_carrier[k] {
                Some(v) => v[s],
                None => interp(&column, k),
            };
        }
    }
    Ok(channel)
}

/// Zero-forcing: `X̂ = R / (A·Ĥ)`, erasing cells where `|A·Ĥ|` is below
/// [`ERASURE_FLOOR`].
pub fn equalize(received: &[Complex], reference: &ResourceGrid, amplitude: &[f64]) -> Result<Equalized> {
    let channel = estimate_channel(received, reference, amplitude)?;
    let n = reference.spec.fft_size;
    let mut symbols = Vec::new();
    let mut erased = Vec::new();
    for (idx, kind) in reference.kinds.iter().enumerate() {
        if *kind != CellKind::Data {
            continue;
        }
        let g = channel[idx] * amplitude[idx % n];
        if g.norm() < ERASURE_FLOOR {
            symbols.push(Complex::new(0.0, 0.0));
            erased.push(true);
        } else {
            symbols.push(received[idx] / g);
            erased.push(false);
        }
    }
    Ok(Equalized { symbols, erased, channel })
}
