//! DME pulse-pair interference and gated Gaussian interference.
//!
//! A DME pulse pair is `S(t) = e^{−αt²/2} + e^{−α(t−Δt)²/2}`, whose
//! transform is `S(f) = A·√(8π/α)·e^{−2π²f²/α}·e^{jπfΔt}·cos(πfΔt)`.
//! Band power `∫|S(f)|² df` has a closed form in terms of `erf` of real
//! and complex arguments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::special::{erfc, scaled_erfc};
use crate::Complex;

/// Standard DME pulse-shape constant (s⁻²), giving a ≈3.5 µs half-amplitude
/// pulse width.
pub const DME_ALPHA: f64 = 4.5e11;
/// Pulse spacing within a pair (X channel).
pub const DME_DELTA_T: f64 = 12e-6;
/// Default beacon load in pulse pairs per second.
pub const DME_DEFAULT_RATE_PPS: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmeSignalParams {
    pub alpha: f64,
    pub delta_t: f64,
    pub amplitude: f64,
    pub center_offset_hz: f64,
    pub pulse_pair_rate_pps: f64,
}

impl Default for DmeSignalParams {
    fn default() -> Self {
        Self {
            alpha: DME_ALPHA,
            delta_t: DME_DELTA_T,
            amplitude: 1.0,
            center_offset_hz: 0.0,
            pulse_pair_rate_pps: DME_DEFAULT_RATE_PPS,
        }
    }
}

impl DmeSignalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.delta_t > 0.0 && self.amplitude >= 0.0 && self.pulse_pair_rate_pps >= 0.0) {
            return Err(Error::InvalidParameter(format!("invalid DME parameters {self:?}")));
        }
        Ok(())
    }

    /// Energy of one pulse pair, `A²∫S(t)² dt`.
    pub fn pair_energy(&self) -> f64 {
        let a = self.alpha;
        // ∫e^{−αt²}dt = √(π/α); the cross term is e^{−αΔt²/4}·√(π/α).
        self.amplitude.powi(2) * (PI / a).sqrt() * (2.0 + 2.0 * (-a * self.delta_t.powi(2) / 4.0).exp())
    }

    /// Long-run mean power of a Poisson pulse stream.
    pub fn mean_power(&self) -> f64 {
        self.pulse_pair_rate_pps * self.pair_energy()
    }

    /// A copy whose amplitude gives the requested mean stream power.
    pub fn with_mean_power(&self, power: f64) -> Self {
        let unit = Self { amplitude: 1.0, ..*self }.mean_power();
        Self { amplitude: if unit > 0.0 { (power / unit).sqrt() } else { 0.0 }, ..*self }
    }

    /// Time span around a pulse pair outside which it is below 1e−16.
    fn half_support(&self) -> f64 {
        (2.0 * 37.0 / self.alpha).sqrt()
    }
}

/// `S(t)` (unit amplitude).
pub fn dme_pulse_pair(params: &DmeSignalParams, t: f64) -> f64 {
    let a = params.alpha;
    (-a * t * t / 2.0).exp() + (-a * (t - params.delta_t).powi(2) / 2.0).exp()
}

/// `S(f)` including the amplitude `A`.
pub fn dme_spectrum(params: &DmeSignalParams, f: f64) -> Complex {
    let a = params.alpha;
    let mag = params.amplitude * (8.0 * PI / a).sqrt() * (-2.0 * PI * PI * f * f / a).exp() * (PI * f * params.delta_t).cos();
    Complex::from_polar(1.0, PI * f * params.delta_t) * mag
}

/// `∫_{f1}^{f2} |S(f)|² df` in closed form.
///
/// With `C₁ = 4π²/α` and `v = πΔt/√C₁`,
/// `|S|² = A²(8π/α)e^{−C₁f²}(2 + e^{j2πfΔt} + e^{−j2πfΔt})/4`, which
/// integrates to `A²(8π/α)·¼·√(π/C₁)·[Δerf(√C₁f) + Re Δ(e^{−v²}erf(√C₁f + jv))]`.
/// `f1 > f2` yields the negated integral.
pub fn dme_interference_power(params: &DmeSignalParams, f1: f64, f2: f64) -> f64 {
    if f1 == f2 {
        return 0.0;
    }
    if f1 > f2 {
        return -dme_interference_power(params, f2, f1);
    }
    // |S(f)|² is even: fold onto f ≥ 0 where tail differences are taken
    // through erfc without cancellation.
    if f2 <= 0.0 {
        return dme_interference_power(params, -f2, -f1);
    }
    if f1 < 0.0 {
        return dme_interference_power(params, 0.0, -f1) + dme_interference_power(params, 0.0, f2);
    }
    let c1 = 4.0 * PI * PI / params.alpha;
    let s = c1.sqrt();
    let v = PI * params.delta_t / s;
    let (u1, u2) = (s * f1, s * f2);
    let gauss = erfc(u1) - erfc(u2);
    let cross = scaled_erfc(u1, v) - scaled_erfc(u2, v);
    let value = params.amplitude.powi(2) * (8.0 * PI / params.alpha) * 0.25 * (PI / c1).sqrt() * (gauss + cross.re);
    value.max(0.0)
}

/// One pulse pair to render: arrival time (s) and carrier phase (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseArrival {
    pub time_s: f64,
    pub phase: f64,
}

/// Renders pulse pairs onto an `n_samples` grid: each contributes
/// `A·S(t − t_i)·e^{j(2π f_c t + φ_i)}`.
pub fn render_pulse_pairs(params: &DmeSignalParams, arrivals: &[PulseArrival], n_samples: usize, sample_rate_hz: f64) -> ComplexSignal {
    let mut out = vec![Complex::new(0.0, 0.0); n_samples];
    let span = params.half_support();
    let w = 2.0 * PI * params.center_offset_hz;
    for p in arrivals {
        let lo = ((p.time_s - span) * sample_rate_hz).ceil().max(0.0) as usize;
        let hi = (((p.time_s + params.delta_t + span) * sample_rate_hz).floor().max(-1.0) + 1.0) as usize;
        for (n, slot) in out.iter_mut().enumerate().take(hi.min(n_samples)).skip(lo) {
            let t = n as f64 / sample_rate_hz;
            let env = params.amplitude * dme_pulse_pair(params, t - p.time_s);
            *slot += Complex::from_polar(env, w * t + p.phase);
        }
    }
    ComplexSignal::new(out, sample_rate_hz)
}

/// Poisson arrival times over `[0, duration)` with uniform random phases.
pub fn poisson_arrivals(rate_pps: f64, duration_s: f64, seed: u64) -> Vec<PulseArrival> {
    let mut out = Vec::new();
    if rate_pps <= 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = Exp::new(rate_pps).expect("positive rate");
    let mut t = gap.sample(&mut rng);
    while t < duration_s {
        out.push(PulseArrival { time_s: t, phase: rng.random_range(-PI..PI) });
        t += gap.sample(&mut rng);
    }
    out
}

/// A Poisson-timed DME pulse stream, shifted to `center_offset_hz`.
pub fn generate_dme_stream(params: &DmeSignalParams, duration_s: f64, sample_rate_hz: f64, seed: u64) -> Result<ComplexSignal> {
    params.validate()?;
    if !(duration_s > 0.0 && sample_rate_hz > 0.0) {
        return Err(Error::InvalidParameter("duration and sample rate must be positive".into()));
    }
    let n = (duration_s * sample_rate_hz).round() as usize;
    let arrivals = poisson_arrivals(params.pulse_pair_rate_pps, duration_s, seed);
    Ok(render_pulse_pairs(params, &arrivals, n, sample_rate_hz))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgiParams {
    pub on_fraction: f64,
    pub gate_period_samples: usize,
    pub power: f64,
}

impl Default for GgiParams {
    fn default() -> Self {
        Self { on_fraction: 0.5, gate_period_samples: 1024, power: 1.0 }
    }
}

impl GgiParams {
    /// Active samples at the start of each gate period.
    pub fn on_samples(&self) -> Result<usize> {
        let on = self.on_fraction * self.gate_period_samples as f64;
        if !(self.on_fraction > 0.0 && self.on_fraction <= 1.0) || self.gate_period_samples == 0 || (on - on.round()).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "GGI gate: on_fraction {} × period {} must be a whole number of samples in (0, period]",
                self.on_fraction, self.gate_period_samples
            )));
        }
        Ok(on.round() as usize)
    }
}

/// Gated circular Gaussian noise: active for the first `on_fraction` of
/// every gate period, exactly zero otherwise.
pub fn generate_ggi(params: &GgiParams, n_samples: usize, seed: u64) -> Result<Vec<Complex>> {
    let on = params.on_samples()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (params.power / 2.0).sqrt();
    Ok((0..n_samples)
        .map(|n| {
            if n % params.gate_period_samples < on {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(re, im) * s
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_pair_symmetry() {
        let p = DmeSignalParams::default();
        assert!((dme_pulse_pair(&p, 0.0) - 1.0).abs() < 1e-14);
        assert_eq!(dme_pulse_pair(&p, 0.0), dme_pulse_pair(&p, p.delta_t));
        let mid = 2.0 * (-p.alpha * p.delta_t.powi(2) / 8.0).exp();
        assert!((dme_pulse_pair(&p, p.delta_t / 2.0) - mid).abs() < 1e-18);
    }

    #[test]
    fn spectrum_dc_and_null() {
        let p = DmeSignalParams { amplitude: 2.0, ..Default::default() };
        assert!((dme_spectrum(&p, 0.0) - Complex::new(2.0 * (8.0 * PI / p.alpha).sqrt(), 0.0)).norm() < 1e-18);
        assert!(dme_spectrum(&p, 1.0 / (2.0 * p.delta_t)).norm() < 1e-20);
    }

    #[test]
    fn band_power_trivia() {
        let p = DmeSignalParams::default();
        assert_eq!(dme_interference_power(&p, 5e4, 5e4), 0.0);
        let half = dme_interference_power(&p, 0.0, 2e5);
        assert!((dme_interference_power(&p, -2e5, 2e5) - 2.0 * half).abs() < 1e-12 * half);
        // The whole line integral equals the pulse-pair energy (Parseval).
        let all = dme_interference_power(&p, -5e6, 5e6);
        assert!((all - p.pair_energy()).abs() < 1e-9 * all);
    }

    #[test]
    fn zero_rate_is_silent() {
        let p = DmeSignalParams { pulse_pair_rate_pps: 0.0, ..Default::default() };
        let s = generate_dme_stream(&p, 1e-3, 2.5e6, 1).unwrap();
        assert!(s.samples.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn ggi_gating() {
        let g = GgiParams { on_fraction: 0.25, gate_period_samples: 8, power: 2.0 };
        let x = generate_ggi(&g, 64, 1).unwrap();
        for (n, v) in x.iter().enumerate() {
            assert_eq!(v.norm() == 0.0, n % 8 >= 2);
        }
        assert!(generate_ggi(&GgiParams { on_fraction: 0.3, gate_period_samples: 8, power: 1.0 }, 8, 1).is_err());
    }
}
