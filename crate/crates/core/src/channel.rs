//! Aeronautical WSSUS fading channels (APT / TMA / ENR) and AWGN.
//!
//! Each scenario is a three-tap delay line with taps at `{0, ⌈max/2⌉, max}`
//! samples and −3 dB per tap. Scattered components are Zheng–Xiao
//! sum-of-sinusoids (Jakes spectrum) or frequency-domain shaped Gaussian
//! noise (Gaussian spectrum, σ = F_D/3). The first tap additionally carries
//! a constant line-of-sight term; the Rician K factor is LOS power over the
//! total scattered power.

use std::f64::consts::PI;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::Complex;

pub const SPEED_OF_LIGHT_MPS: f64 = 3e8;
pub const KNOT_MPS: f64 = 0.5144;
/// Upper end of the LDACS band, used for worst-case Doppler.
pub const DEFAULT_CARRIER_HZ: f64 = 1215e6;
/// LOS attenuation that turns the Rician model into Rayleigh (APT).
pub const RAYLEIGH_LOS_DB: f64 = -100.0;
/// Gaussian Doppler standard deviation as a fraction of F_D.
pub const GAUSSIAN_SIGMA_FRACTION: f64 = 1.0 / 3.0;
/// Power step between successive taps.
pub const TAP_DECAY_DB: f64 = -3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "APT")]
    Apt,
    #[serde(rename = "TMA")]
    Tma,
    #[serde(rename = "ENR")]
    Enr,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::Apt => "APT",
            Scenario::Tma => "TMA",
            Scenario::Enr => "ENR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fading {
    Rayleigh,
    Rician,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DopplerSpectrum {
    Jakes,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub scenario: Scenario,
    pub fading: Fading,
    pub rician_k_db: f64,
    pub max_delay_us: f64,
    pub tap_count: usize,
    pub tap_delays_samples: Vec<usize>,
    /// Linear, summing to one.
    pub tap_powers: Vec<f64>,
    pub doppler_spectrum: DopplerSpectrum,
    pub doppler_hz: f64,
    /// Sinusoids per tap for the Jakes model.
    pub harmonics: usize,
    pub velocity_ktas: f64,
    /// Carried for completeness; no acceleration model is applied.
    pub acceleration_mps2: f64,
    pub sample_rate_hz: f64,
}

/// `F_D = f_c · v / c` with `v` in knots.
pub fn doppler_hz(fc_hz: f64, speed_ktas: f64) -> f64 {
    fc_hz * speed_ktas * KNOT_MPS / SPEED_OF_LIGHT_MPS
}

/// Unit-power exponential profile at `delays`.
pub fn exponential_profile(count: usize) -> Vec<f64> {
    let step = 10f64.powf(TAP_DECAY_DB / 10.0);
    let raw: Vec<f64> = (0..count).map(|l| step.powi(l as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// The table profile for `scenario` at `sample_rate_hz`.
pub fn build_channel(scenario: Scenario, sample_rate_hz: f64, fc_hz: f64) -> ChannelProfile {
    let (fading, k_db, max_us, accel, harmonics, ktas, spectrum) = match scenario {
        Scenario::Apt => (Fading::Rayleigh, RAYLEIGH_LOS_DB, 3.0, 5.0, 8, 200.0, DopplerSpectrum::Jakes),
        Scenario::Tma => (Fading::Rician, 10.0, 20.0, 50.0, 8, 300.0, DopplerSpectrum::Jakes),
        Scenario::Enr => (Fading::Rician, 15.0, 15.0, 50.0, 25, 600.0, DopplerSpectrum::Gaussian),
    };
    let max = (max_us * 1e-6 * sample_rate_hz + 1e-9).floor() as usize;
    let mut delays = vec![0, max.div_ceil(2), max];
    delays.dedup();
    ChannelProfile {
        scenario,
        fading,
        rician_k_db: k_db,
        max_delay_us: max_us,
        tap_count: delays.len(),
        tap_powers: exponential_profile(delays.len()),
        tap_delays_samples: delays,
        doppler_spectrum: spectrum,
        doppler_hz: doppler_hz(fc_hz, ktas),
        harmonics,
        velocity_ktas: ktas,
        acceleration_mps2: accel,
        sample_rate_hz,
    }
}

impl ChannelProfile {
    /// A single Rayleigh (or Rician) tap with the given Doppler; handy for
    /// flat-fading experiments.
    pub fn single_tap(fading: Fading, rician_k_db: f64, doppler_hz: f64, sample_rate_hz: f64) -> Self {
        Self {
            scenario: Scenario::Apt,
            fading,
            rician_k_db: if fading == Fading::Rayleigh { RAYLEIGH_LOS_DB } else { rician_k_db },
            max_delay_us: 0.0,
            tap_count: 1,
            tap_delays_samples: vec![0],
            tap_powers: vec![1.0],
            doppler_spectrum: DopplerSpectrum::Jakes,
            doppler_hz,
            harmonics: 16,
            velocity_ktas: 0.0,
            acceleration_mps2: 0.0,
            sample_rate_hz,
        }
    }

    /// K as a linear ratio.
    pub fn k_linear(&self) -> f64 {
        10f64.powf(self.rician_k_db / 10.0)
    }

    pub fn max_delay_samples(&self) -> usize {
        self.tap_delays_samples.iter().copied().max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.tap_delays_samples.len() != self.tap_powers.len() || self.tap_powers.is_empty() {
            return Err(Error::LengthMismatch("tap delays and powers differ in length".into()));
        }
        let total: f64 = self.tap_powers.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.tap_powers.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidParameter(format!("tap powers must be non-negative and sum to 1 (got {total})")));
        }
        Ok(())
    }
}

/// Instantaneous tap gains `h_l[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    pub taps_over_time: Vec<Vec<Complex>>,
    pub delays: Vec<usize>,
    pub seed: u64,
}

impl FadingRealization {
    /// Time-invariant taps.
    pub fn fixed(delays: &[usize], gains: &[Complex], n_samples: usize) -> Result<Self> {
        if delays.len() != gains.len() {
            return Err(Error::LengthMismatch("delays and gains differ in length".into()));
        }
        Ok(Self { taps_over_time: gains.iter().map(|&g| vec![g; n_samples]).collect(), delays: delays.to_vec(), seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.taps_over_time.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tap `l` as a signal (for export).
    pub fn tap_signal(&self, l: usize, sample_rate_hz: f64) -> ComplexSignal {
        ComplexSignal::new(self.taps_over_time[l].clone(), sample_rate_hz)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Zheng–Xiao sum of sinusoids: unit mean power, Jakes spectrum.
fn sum_of_sinusoids(n: usize, harmonics: usize, fd_norm: f64, rng: &mut ChaCha8Rng) -> Vec<Complex> {
    let m = harmonics.max(1);
    let theta: f64 = rng.random_range(-PI..PI);
    let params: Vec<(f64, f64, f64)> = (1..=m)
        .map(|i| {
            let alpha = (2.0 * PI * i as f64 - PI + theta) / (4.0 * m as f64);
            let phi: f64 = rng.random_range(-PI..PI);
            let psi: f64 = rng.random_range(-PI..PI);
            (alpha, phi, psi)
        })
        .collect();
    let w = 2.0 * PI * fd_norm;
    let scale = (1.0 / m as f64).sqrt();
    (0..n)
        .map(|t| {
            let t = t as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for &(alpha, phi, psi) in &params {
                re += (w * t * alpha.cos() + phi).cos();
                im += (w * t * alpha.sin() + psi).cos();
            }
            Complex::new(re, im) * scale
        })
        .collect()
}

/// Circular Gaussian process with a Gaussian Doppler spectrum of standard
/// deviation `sigma_norm` (cycles/sample), shaped in the frequency domain.
fn gaussian_doppler(n: usize, sigma_norm: f64, rng: &mut ChaCha8Rng) -> Vec<Complex> {
    let weights: Vec<f64> = (0..n)
        .map(|k| {
            let f = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } / n as f64;
            if sigma_norm > 0.0 {
                (-f * f / (2.0 * sigma_norm * sigma_norm)).exp()
            } else if k == 0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut spec: Vec<Complex> = weights.iter().map(|&p| gaussian(rng) * (p / total).sqrt()).collect();
    crate::dsp::ifft_in_place(&mut spec);
    spec
}

/// Draws tap processes for `n_samples` samples.
pub fn realize_fading(profile: &ChannelProfile, n_samples: usize, seed: u64) -> Result<FadingRealization> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = profile.k_linear();
    let scatter = 1.0 / (1.0 + k);
    let fd_norm = profile.doppler_hz / profile.sample_rate_hz;
    let los_phase: f64 = rng.random_range(-PI..PI);
    let mut taps = Vec::with_capacity(profile.tap_count);
    for (l, &p) in profile.tap_powers.iter().enumerate() {
        // Each tap draws from its own stream so taps are independent and
        // adding taps does not perturb earlier ones.
        let mut tap_rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(l as u64 + 1)));
        let mut g = match profile.doppler_spectrum {
            DopplerSpectrum::Jakes => sum_of_sinusoids(n_samples, profile.harmonics, fd_norm, &mut tap_rng),
            DopplerSpectrum::Gaussian => gaussian_doppler(n_samples, fd_norm * GAUSSIAN_SIGMA_FRACTION, &mut tap_rng),
        };
        let amp = (p * scatter).sqrt();
        g.iter_mut().for_each(|v| *v *= amp);
        if l == 0 {
            let los = Complex::from_polar((k * scatter).sqrt(), los_phase);
            g.iter_mut().for_each(|v| *v += los);
        }
        taps.push(g);
    }
    Ok(FadingRealization { taps_over_time: taps, delays: profile.tap_delays_samples.clone(), seed })
}

/// Time-varying tapped delay line: `y[n] = Σ_l h_l[n]·x[n − d_l]`. The
/// output has the input's length.
pub fn propagate(signal: &ComplexSignal, realization: &FadingRealization) -> Result<ComplexSignal> {
    if realization.len() < signal.len() {
        return Err(Error::LengthMismatch(format!(
            "realization has {} samples, signal {}",
            realization.len(),
            signal.len()
        )));
    }
    let x = &signal.samples;
    let mut y = vec![Complex::new(0.0, 0.0); x.len()];
    for (h, &d) in realization.taps_over_time.iter().zip(&realization.delays) {
        for n in d..x.len() {
            y[n] += h[n] * x[n - d];
        }
    }
    Ok(ComplexSignal { samples: y, ..signal.clone() })
}

/// Adds circular Gaussian noise of total variance `variance`.
pub fn add_noise(signal: &ComplexSignal, variance: f64, seed: u64) -> ComplexSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = variance.sqrt();
    let samples = signal.samples.iter().map(|&v| v + gaussian(&mut rng) * s).collect();
    ComplexSignal { samples, ..signal.clone() }
}

/// Adds noise at `snr_db` below the measured signal power. An infinite SNR
/// is the identity; an all-zero input uses unit reference power.
pub fn add_awgn(signal: &ComplexSignal, snr_db: f64, seed: u64) -> ComplexSignal {
    if snr_db == f64::INFINITY {
        return signal.clone();
    }
    let mut power = signal.mean_power();
    if power == 0.0 {
        warn!("zero-power input to add_awgn: using unit reference power");
        power = 1.0;
    }
    add_noise(signal, power / 10f64.powf(snr_db / 10.0), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doppler_examples() {
        assert!((doppler_hz(1215e6, 600.0) - 1250.0).abs() < 0.05);
        assert_eq!(doppler_hz(1215e6, 0.0), 0.0);
        // The table's printed 413 Hz is an arithmetic slip: the formula it
        // quotes gives 416.66 Hz.
        assert!((doppler_hz(1215e6, 200.0) - 416.6640).abs() < 1e-3);
    }

    #[test]
    fn table_profiles() {
        let enr = build_channel(Scenario::Enr, 2.5e6, DEFAULT_CARRIER_HZ);
        assert_eq!(enr.fading, Fading::Rician);
        assert_eq!(enr.rician_k_db, 15.0);
        assert_eq!(enr.doppler_spectrum, DopplerSpectrum::Gaussian);
        assert_eq!(enr.max_delay_us, 15.0);
        assert_eq!(enr.tap_delays_samples, vec![0, 19, 37]);
        let apt = build_channel(Scenario::Apt, 2.5e6, DEFAULT_CARRIER_HZ);
        assert_eq!(apt.rician_k_db, RAYLEIGH_LOS_DB);
        assert_eq!(apt.tap_delays_samples, vec![0, 4, 7]);
        let tma = build_channel(Scenario::Tma, 2.5e6, DEFAULT_CARRIER_HZ);
        assert_eq!((tma.fading, tma.rician_k_db, tma.doppler_spectrum), (Fading::Rician, 10.0, DopplerSpectrum::Jakes));
        for p in [apt, tma, enr] {
            assert!((p.tap_powers.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.max_delay_samples() as f64 <= p.max_delay_us * 1e-6 * p.sample_rate_hz + 1e-6);
        }
    }

    #[test]
    fn unit_tap_is_identity() {
        let x = ComplexSignal::new((0..64).map(|n| Complex::new(n as f64, -1.0)).collect(), 1.0);
        let r = FadingRealization::fixed(&[0], &[Complex::new(1.0, 0.0)], 64).unwrap();
        assert_eq!(propagate(&x, &r).unwrap(), x);
    }

    #[test]
    fn infinite_snr_identity() {
        let x = ComplexSignal::new(vec![Complex::new(1.0, 2.0); 16], 1.0);
        assert_eq!(add_awgn(&x, f64::INFINITY, 3), x);
    }

    #[test]
    fn pure_los_limit_is_constant() {
        let mut p = build_channel(Scenario::Tma, 2.5e6, DEFAULT_CARRIER_HZ);
        p.rician_k_db = 200.0;
        let r = realize_fading(&p, 20_000, 1).unwrap();
        let m: Vec<f64> = r.taps_over_time[0].iter().map(|v| v.norm()).collect();
        let (lo, hi) = m.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!((hi - lo) / hi < 0.01);
    }
}
