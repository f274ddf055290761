//! Pulse blanking against impulsive (DME) interference.

use crate::Complex;

/// Samples in the rolling-median window (centred, truncated at the ends).
pub const MEDIAN_WINDOW: usize = 257;

/// Zeroes every sample whose magnitude exceeds `threshold_factor` times the
/// rolling median magnitude. Returns the blanked samples and the mask.
/// An infinite factor is the identity. Where the local median is zero no
/// sample is blanked.
pub fn pulse_blank(samples: &[Complex], threshold_factor: f64) -> (Vec<Complex>, Vec<bool>) {
    assert!(threshold_factor > 1.0, "threshold factor must exceed 1");
    let mut out = samples.to_vec();
    let mut mask = vec![false; samples.len()];
    if threshold_factor.is_infinite() || samples.is_empty() {
        return (out, mask);
    }
    let mags: Vec<f64> = samples.iter().map(|s| s.norm()).collect();
    let half = MEDIAN_WINDOW / 2;
    let mut window: Vec<f64> = Vec::with_capacity(MEDIAN_WINDOW);
    let insert = |w: &mut Vec<f64>, v: f64| {
        let pos = w.partition_point(|&x| x < v);
        w.insert(pos, v);
    };
    let remove = |w: &mut Vec<f64>, v: f64| {
        let pos = w.partition_point(|&x| x < v);
        w.remove(pos);
    };
    for &v in mags.iter().take(half + 1) {
        insert(&mut window, v);
    }
    for i in 0..mags.len() {
        if i > 0 {
            if i + half < mags.len() {
                insert(&mut window, mags[i + half]);
            }
            if i > half {
                remove(&mut window, mags[i - half - 1]);
            }
        }
        let median = window[window.len() / 2];
        if median > 0.0 && mags[i] > threshold_factor * median {
            out[i] = Complex::new(0.0, 0.0);
            mask[i] = true;
        }
    }
    (out, mask)
}
