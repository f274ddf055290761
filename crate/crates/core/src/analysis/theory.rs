//! Closed-form SINR and M-QAM BER over exponential (Rayleigh) fading with
//! DME interference.
//!
//! Per subcarrier `SINR = F'⁴|H|²P / (F'²P_N + F'²|H_d|²P_DME)`. The BER
//! approximation `(4/log₂M)(1 − 1/√M) Σ_i Q((2i−1)√(3·log₂M·SINR/(M−1)))`
//! is averaged over `λ = |H|²` and `λ_d = |H_d|²`, both exponential. The
//! `λ` integral of each Q term is closed form,
//! `E[Q(c√λ)] = ½(1 − √(γ/(1+γ)))` with `γ = c²λ̄/2`; the `λ_d` integral
//! uses Gauss–Laguerre quadrature, checked against twice the order.

use log::warn;
use serde::{Deserialize, Serialize};

use super::ber::BerCurve;
use crate::error::{Error, Result};
use crate::interference::{dme_interference_power, DmeSignalParams};
use crate::phy::Modulation;
use crate::special::{gauss_laguerre, q_function};
use crate::Complex;

pub const DEFAULT_ORDER: usize = 64;
/// Relative change between order `n` and `2n` that triggers a warning.
pub const CONVERGENCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrInputs {
    pub signal_power: f64,
    pub noise_power: f64,
    pub dme_power: f64,
    pub filter_response: Vec<Complex>,
    pub channel_gain: Vec<Complex>,
    pub dme_channel_gain: Vec<Complex>,
    pub mean_fading_power: f64,
}

/// Per-subcarrier SINR; a zero denominator yields `+∞` (with a warning).
pub fn sinr_per_subcarrier(inputs: &SinrInputs) -> Result<Vec<f64>> {
    let k = inputs.filter_response.len();
    if inputs.channel_gain.len() != k || inputs.dme_channel_gain.len() != k {
        return Err(Error::LengthMismatch("SINR inputs must all have K entries".into()));
    }
    if inputs.signal_power < 0.0 || inputs.noise_power < 0.0 || inputs.dme_power < 0.0 {
        return Err(Error::InvalidParameter("powers must be non-negative".into()));
    }
    Ok((0..k)
        .map(|i| {
            let f2 = inputs.filter_response[i].norm_sqr();
            let num = f2 * f2 * inputs.channel_gain[i].norm_sqr() * inputs.signal_power;
            let den = f2 * inputs.noise_power + f2 * inputs.dme_channel_gain[i].norm_sqr() * inputs.dme_power;
            if den == 0.0 {
                warn!("subcarrier {i}: zero noise-plus-interference, SINR reported as infinite");
                f64::INFINITY
            } else {
                num / den
            }
        })
        .collect())
}

/// `(4/log₂M)(1 − 1/√M)` and the Q-argument factors `(2i−1)²·3log₂M/(M−1)`.
fn mqam_terms(m: Modulation) -> (f64, Vec<f64>) {
    let order = m.order() as f64;
    let bits = m.bits_per_symbol() as f64;
    let lead = 4.0 / bits * (1.0 - 1.0 / order.sqrt());
    let base = 3.0 * bits / (order - 1.0);
    let terms = (1..=(order.sqrt() as usize / 2)).map(|i| ((2 * i - 1) as f64).powi(2) * base).collect();
    (lead, terms)
}

/// M-QAM BER at a fixed SINR (AWGN).
pub fn mqam_ber(m: Modulation, sinr: f64) -> f64 {
    let (lead, terms) = mqam_terms(m);
    lead * terms.iter().map(|c2| q_function((c2 * sinr).sqrt())).sum::<f64>()
}

/// M-QAM BER averaged over `λ ~ Exp(λ̄)` at `SINR = ρ·λ`.
pub fn mqam_ber_rayleigh(m: Modulation, rho: f64, mean_lambda: f64) -> f64 {
    let (lead, terms) = mqam_terms(m);
    lead * terms
        .iter()
        .map(|c2| {
            let g = c2 * rho * mean_lambda / 2.0;
            if g.is_infinite() {
                0.0
            } else {
                0.5 * (1.0 - (g / (1.0 + g)).sqrt())
            }
        })
        .sum::<f64>()
}

/// DME interference description for the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmeTheory {
    /// In-band DME power `P_DME` (same units as the signal power).
    pub power: f64,
    /// Mean of `λ_d = |H_d|²`; `None` means no fading on the DME path.
    pub mean_fading_power: Option<f64>,
}

impl DmeTheory {
    /// `P_DME` as the mean power of a Poisson pulse stream falling in
    /// `[f1, f2]` (Hz, relative to the DME carrier).
    pub fn from_band(params: &DmeSignalParams, f1: f64, f2: f64, mean_fading_power: Option<f64>) -> Self {
        Self { power: params.pulse_pair_rate_pps * dme_interference_power(params, f1, f2), mean_fading_power }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub modulation: Modulation,
    /// `10·log10(P/P_N)` grid (dB).
    pub snr_db: Vec<f64>,
    /// `|F'_k|` per used subcarrier.
    pub filter_response: Vec<f64>,
    pub signal_power: f64,
    /// `λ̄`; `None` replaces fading by the constant gain 1.
    pub mean_fading_power: Option<f64>,
    pub dme: Option<DmeTheory>,
    pub quadrature_order: usize,
}

impl TheoryConfig {
    pub fn rayleigh(modulation: Modulation, snr_db: Vec<f64>, subcarriers: usize) -> Self {
        Self {
            modulation,
            snr_db,
            filter_response: vec![1.0; subcarriers],
            signal_power: 1.0,
            mean_fading_power: Some(1.0),
            dme: None,
            quadrature_order: DEFAULT_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryResult {
    pub curve: BerCurve,
    pub warnings: Vec<String>,
}

fn subcarrier_ber(cfg: &TheoryConfig, f: f64, noise: f64, lambda_d: f64) -> f64 {
    let f2 = f * f;
    let dme = cfg.dme.map_or(0.0, |d| d.power * lambda_d);
    let den = f2 * (noise + dme);
    let rho = if den == 0.0 { f64::INFINITY } else { f2 * f2 * cfg.signal_power / den };
    match cfg.mean_fading_power {
        Some(l) => mqam_ber_rayleigh(cfg.modulation, rho, l),
        None => mqam_ber(cfg.modulation, rho),
    }
}

fn average_ber(cfg: &TheoryConfig, snr_db: f64, order: usize) -> f64 {
    let noise = cfg.signal_power / 10f64.powf(snr_db / 10.0);
    let rule = match cfg.dme.and_then(|d| d.mean_fading_power) {
        Some(mean) => {
            let (x, w) = gauss_laguerre(order);
            Some((x.into_iter().map(|v| v * mean).collect::<Vec<_>>(), w))
        }
        None => None,
    };
    let total: f64 = cfg
        .filter_response
        .iter()
        .map(|&f| match &rule {
            Some((x, w)) => x.iter().zip(w).map(|(&ld, &wi)| wi * subcarrier_ber(cfg, f, noise, ld)).sum(),
            None => subcarrier_ber(cfg, f, noise, 1.0),
        })
        .sum();
    total / cfg.filter_response.len() as f64
}

/// Subcarrier-averaged theoretical BER on the configured grid.
pub fn theoretical_ber(cfg: &TheoryConfig) -> Result<TheoryResult> {
    if cfg.filter_response.is_empty() || cfg.snr_db.is_empty() {
        return Err(Error::EmptyInput);
    }
    let order = cfg.quadrature_order.max(DEFAULT_ORDER);
    let mut warnings = Vec::new();
    let ber = cfg
        .snr_db
        .iter()
        .map(|&s| {
            let a = average_ber(cfg, s, order);
            if cfg.dme.is_some_and(|d| d.mean_fading_power.is_some()) {
                let b = average_ber(cfg, s, 2 * order);
                if (a - b).abs() > CONVERGENCE_TOL * b.abs().max(1e-300) {
                    let msg = format!("quadrature not converged at {s} dB: order {order} → {a:e}, {} → {b:e}", 2 * order);
                    warn!("{msg}");
                    warnings.push(msg);
                }
            }
            a
        })
        .collect();
    Ok(TheoryResult {
        curve: BerCurve {
            snr_db_points: cfg.snr_db.clone(),
            ber,
            bit_count_per_point: vec![0; cfg.snr_db.len()],
            error_count_per_point: vec![0; cfg.snr_db.len()],
            confidence_halfwidth: vec![0.0; cfg.snr_db.len()],
        },
        warnings,
    })
}
