//! PSD, Monte-Carlo BER, closed-form theory and complexity accounting.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refofdm::analysis::ber::{run_ber_monte_carlo, wilson_interval, BerLink};
use refofdm::analysis::complexity::{complexity_report, counting_ifft, radix2_mults, ComplexityWaveform};
use refofdm::analysis::psd::{estimate_psd, interference_at, DB_FLOOR};
use refofdm::analysis::theory::{
    mqam_ber, sinr_per_subcarrier, theoretical_ber, DmeTheory, SinrInputs, TheoryConfig,
};
use refofdm::channel::add_noise;
use refofdm::interference::DmeSignalParams;
use refofdm::phy::Modulation;
use refofdm::special::q_function;
use refofdm::{Bandwidth, Complex, ComplexSignal};

fn noise(n: usize, power: f64, seed: u64) -> ComplexSignal {
    add_noise(&ComplexSignal::zeros(n, 1.0e6), power, seed)
}

#[test]
fn white_noise_psd_is_flat_and_integrates_to_power() {
    let p = 3.5;
    let x = noise(1_000_000, p, 1);
    let g = estimate_psd(&x, 1024, 0.5).unwrap();
    let total = g.total_power();
    assert!((total / p - 1.0).abs() < 0.02, "{total}");
    let level = 10.0 * (p / 1.0e6).log10();
    for (f, d) in g.frequencies_hz.iter().zip(&g.psd_db_per_hz) {
        assert!((d - level).abs() < 0.5, "{f} Hz: {d} dB vs {level}");
    }
    let half = g.band_power(-250e3, 250e3).unwrap();
    assert!((half / (p / 2.0) - 1.0).abs() < 0.02);
}

#[test]
fn zero_band_reports_floor() {
    let g = estimate_psd(&ComplexSignal::zeros(4096, 1.0e6), 1024, 0.5).unwrap();
    assert_eq!(interference_at(&g, -1e5, 1e5).unwrap(), DB_FLOOR);
    assert!(interference_at(&g, -1e6, 0.0).is_err());
}

#[test]
fn qpsk_awgn_matches_q_function() {
    let snr = [0.0, 2.0, 4.0, 6.0, 8.0];
    let curve = run_ber_monte_carlo(&BerLink::Awgn { modulation: Modulation::Qpsk }, &snr, 200, 5_000_000, 17).unwrap();
    for (i, &s) in snr.iter().enumerate() {
        let oracle = q_function((2.0 * 10f64.powf(s / 10.0)).sqrt());
        assert!(curve.error_count_per_point[i] >= 100);
        assert!(curve.covers(i, oracle), "{s} dB: {} vs {oracle}", curve.ber[i]);
    }
}

#[test]
fn ofdm_awgn_matches_mqam_formula() {
    for (m, snr) in [(Modulation::Qpsk, [2.0, 6.0]), (Modulation::Qam16, [6.0, 10.0])] {
        let link = BerLink::OfdmAwgn { modulation: m, bandwidth: Bandwidth::Khz498 };
        let curve = run_ber_monte_carlo(&link, &snr, 200, 3_000_000, 5).unwrap();
        for (i, &s) in snr.iter().enumerate() {
            let oracle = mqam_ber(m, 10f64.powf(s / 10.0));
            // Gray QAM: the nearest-neighbour approximation is within a
            // few percent at these SNRs; widen by that much.
            let (lo, hi) = curve.interval(i);
            assert!(lo <= oracle * 1.05 && oracle * 0.95 <= hi, "{m:?} {s} dB: {} vs {oracle}", curve.ber[i]);
        }
    }
}

#[test]
fn theory_matches_rayleigh_monte_carlo() {
    let snr: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64).collect();
    let theory = theoretical_ber(&TheoryConfig::rayleigh(Modulation::Qpsk, snr.clone(), 1)).unwrap();
    let link = BerLink::Rayleigh { modulation: Modulation::Qpsk, mean_fading_power: 1.0 };
    let mc = run_ber_monte_carlo(&link, &snr, 400, 2_000_000, 23).unwrap();
    for i in 0..snr.len() {
        assert!(mc.covers(i, theory.curve.ber[i]), "{} dB: MC {} theory {}", snr[i], mc.ber[i], theory.curve.ber[i]);
    }
}

#[test]
fn rayleigh_qpsk_closed_form_over_grid() {
    let snr: Vec<f64> = (0..=30).map(f64::from).collect();
    let r = theoretical_ber(&TheoryConfig::rayleigh(Modulation::Qpsk, snr.clone(), 8)).unwrap();
    for (s, b) in snr.iter().zip(&r.curve.ber) {
        let g = 10f64.powf(s / 10.0);
        assert!((b - 0.5 * (1.0 - (g / (1.0 + g)).sqrt())).abs() < 1e-4);
    }
}

#[test]
fn constant_gain_reduces_to_awgn() {
    for m in [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64] {
        let mut cfg = TheoryConfig::rayleigh(m, vec![0.0, 5.0, 10.0], 4);
        cfg.mean_fading_power = None;
        let r = theoretical_ber(&cfg).unwrap();
        for (s, b) in cfg.snr_db.iter().zip(&r.curve.ber) {
            assert!((b - mqam_ber(m, 10f64.powf(s / 10.0))).abs() < 1e-15);
        }
    }
    let g = 10f64.powf(0.7);
    assert!((mqam_ber(Modulation::Qpsk, g) - q_function((2.0 * g).sqrt())).abs() < 1e-15);
}

#[test]
fn dme_theory_converges_and_degrades() {
    let params = DmeSignalParams::default();
    let dme = DmeTheory::from_band(&params, 100e3, 300e3, Some(1.0));
    assert!(dme.power > 0.0);
    let mut cfg = TheoryConfig::rayleigh(Modulation::Qam16, vec![5.0, 15.0, 25.0], 16);
    let clean = theoretical_ber(&cfg).unwrap();
    cfg.dme = Some(DmeTheory { power: 0.05, mean_fading_power: Some(1.0) });
    let hit = theoretical_ber(&cfg).unwrap();
    assert!(hit.warnings.is_empty(), "{:?}", hit.warnings);
    for i in 0..3 {
        assert!(hit.curve.ber[i] > clean.curve.ber[i]);
    }
}

#[test]
fn ber_monotone_within_confidence() {
    let snr = [0.0, 3.0, 6.0, 9.0];
    let c = run_ber_monte_carlo(&BerLink::Awgn { modulation: Modulation::Qam16 }, &snr, 200, 1_000_000, 2).unwrap();
    for i in 1..snr.len() {
        assert!(c.interval(i).0 <= c.interval(i - 1).1);
    }
}

#[test]
fn complexity_band_independence() {
    let fir = |k: usize| complexity_report(ComplexityWaveform::FOfdm, 128, k).unwrap().filter_mults;
    let reference = complexity_report(ComplexityWaveform::RefOfdm, 128, 1).unwrap().filter_mults;
    for k in [1, 2, 4] {
        let r = complexity_report(ComplexityWaveform::RefOfdm, 128, k).unwrap();
        assert_eq!(r.filter_mults, reference);
        assert_eq!(fir(k), k as u64 * fir(1));
    }
    let r2 = complexity_report(ComplexityWaveform::RefOfdm, 128, 2).unwrap();
    let r4 = complexity_report(ComplexityWaveform::RefOfdm, 128, 4).unwrap();
    assert_eq!(r4.total() - r2.total(), r4.dft_mults - r2.dft_mults);
    assert_eq!(
        complexity_report(ComplexityWaveform::FOfdm, 128, 1).unwrap().total(),
        complexity_report(ComplexityWaveform::RefOfdm, 128, 1).unwrap().total()
    );
    assert!(complexity_report(ComplexityWaveform::Ofdm, 100, 1).is_err());
}

#[test]
fn ifft_count_audit() {
    for log in 1..=10 {
        let n = 1usize << log;
        let x: Vec<Complex> = (0..n).map(|i| Complex::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
        let (y, count) = counting_ifft(&x);
        assert_eq!(count, radix2_mults(n), "n = {n}");
        let mut reference = x.clone();
        refofdm::dsp::ifft_in_place(&mut reference);
        assert!(reference.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-9));
    }
}

/// Independent re-statement of the per-subcarrier SINR.
fn sinr_oracle(i: &SinrInputs, k: usize) -> f64 {
    let f = i.filter_response[k].norm();
    let h = i.channel_gain[k].norm();
    let hd = i.dme_channel_gain[k].norm();
    f.powi(4) * h.powi(2) * i.signal_power / (f.powi(2) * i.noise_power + f.powi(2) * hd.powi(2) * i.dme_power)
}

fn random_inputs(seed: u64, k: usize) -> SinrInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    SinrInputs {
        signal_power: 1.3,
        noise_power: 0.07,
        dme_power: 0.4,
        filter_response: (0..k).map(|_| c()).collect(),
        channel_gain: (0..k).map(|_| c()).collect(),
        dme_channel_gain: (0..k).map(|_| c()).collect(),
        mean_fading_power: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinr_matches_oracle(seed in any::<u64>(), k in 1usize..128) {
        let inputs = random_inputs(seed, k);
        let got = sinr_per_subcarrier(&inputs).unwrap();
        for (i, g) in got.iter().enumerate() {
            let want = sinr_oracle(&inputs, i);
            prop_assert!((g - want).abs() <= 1e-14 * want.abs().max(1.0));
        }
    }

    #[test]
    fn sinr_homogeneous(seed in any::<u64>()) {
        let inputs = random_inputs(seed, 16);
        let doubled = SinrInputs { noise_power: 2.0 * inputs.noise_power, dme_power: 2.0 * inputs.dme_power, ..inputs.clone() };
        let a = sinr_per_subcarrier(&inputs).unwrap();
        let b = sinr_per_subcarrier(&doubled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(*y, x / 2.0);
        }
    }

    #[test]
    fn band_power_splits_additively(a in -4.9e5f64..4.9e5, b in -4.9e5f64..4.9e5, c in -4.9e5f64..4.9e5, seed in 0u64..4) {
        let g = estimate_psd(&noise(8192, 1.0, seed), 256, 0.5).unwrap();
        let mut v = [a, b, c];
        v.sort_by(f64::total_cmp);
        let whole = g.band_power(v[0], v[2]).unwrap();
        let parts = g.band_power(v[0], v[1]).unwrap() + g.band_power(v[1], v[2]).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1e-300));
    }

    #[test]
    fn wilson_brackets_estimate(errors in 0u64..1000, extra in 0u64..100_000) {
        let bits = errors + extra + 1;
        let (lo, hi) = wilson_interval(errors, bits, 3.0);
        let p = errors as f64 / bits as f64;
        prop_assert!(lo <= p + 1e-15 && p <= hi + 1e-15);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }
}
