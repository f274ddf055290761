//! DME closed form against quadrature and against generated streams.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refofdm::analysis::psd::estimate_psd;
use refofdm::interference::{
    dme_interference_power, dme_pulse_pair, dme_spectrum, generate_dme_stream, generate_ggi, poisson_arrivals,
    render_pulse_pairs, DmeSignalParams, GgiParams, PulseArrival,
};
use refofdm::Complex;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Adaptive Gauss–Legendre: bisect until the halves agree with the whole.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &[(f64, f64)], tol: f64, depth: u32) -> f64 {
    let gl = |lo: f64, hi: f64| {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
    };
    let m = 0.5 * (a + b);
    let whole = gl(a, b);
    let halves = gl(a, m) + gl(m, b);
    if (whole - halves).abs() <= tol || depth == 0 {
        halves
    } else {
        adaptive(f, a, m, rule, tol / 2.0, depth - 1) + adaptive(f, m, b, rule, tol / 2.0, depth - 1)
    }
}

/// ∫|S(f)|² df by panelled adaptive quadrature.
fn quadrature(p: &DmeSignalParams, f1: f64, f2: f64) -> f64 {
    let integrand = |f: f64| dme_spectrum(p, f).norm_sqr();
    let rule = gauss_legendre(20);
    let panels = 64;
    let h = (f2 - f1) / panels as f64;
    (0..panels)
        .map(|i| {
            let (a, b) = (f1 + i as f64 * h, f1 + (i + 1) as f64 * h);
            let coarse = adaptive(&integrand, a, b, &rule, f64::INFINITY, 0);
            adaptive(&integrand, a, b, &rule, coarse.abs() * 1e-12, 12)
        })
        .sum()
}

#[test]
fn closed_form_matches_quadrature_on_random_tuples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let p = DmeSignalParams {
            alpha: rng.random_range(1.0e11..1.0e12),
            delta_t: rng.random_range(6e-6..24e-6),
            amplitude: rng.random_range(0.1..3.0),
            ..Default::default()
        };
        // Keep the band where the spectrum is resolvable in double precision.
        let reach = (30.0 * p.alpha).sqrt() / (2.0 * PI);
        let a = rng.random_range(-reach..reach);
        let b = rng.random_range(-reach..reach);
        let (f1, f2) = if a < b { (a, b) } else { (b, a) };
        let closed = dme_interference_power(&p, f1, f2);
        let quad = quadrature(&p, f1, f2);
        let rel = ((closed - quad) / quad).abs();
        assert!(rel < 1e-8, "α={} Δt={} [{f1}, {f2}]: closed {closed} quad {quad} rel {rel}", p.alpha, p.delta_t);
    }
}

#[test]
fn documented_band_value() {
    let p = DmeSignalParams::default();
    let closed = dme_interference_power(&p, 100e3, 500e3);
    let quad = quadrature(&p, 100e3, 500e3);
    assert!(((closed - quad) / quad).abs() < 1e-8);
    // ±300 kHz holds all but a sliver of the pulse-pair energy.
    let wide = dme_interference_power(&p, -300e3, 300e3);
    assert!(((wide - quadrature(&p, -300e3, 300e3)) / wide).abs() < 1e-6);
    assert!(wide < p.pair_energy() && wide > 0.99 * p.pair_energy());
}

#[test]
fn pulse_pair_midpoint() {
    let p = DmeSignalParams::default();
    let t = p.delta_t / 2.0;
    let expected = 2.0 * (-p.alpha * p.delta_t * p.delta_t / 8.0).exp();
    let two_terms = (-p.alpha * t * t / 2.0).exp() + (-p.alpha * (t - p.delta_t).powi(2) / 2.0).exp();
    assert!((dme_pulse_pair(&p, t) - expected).abs() < 1e-15);
    assert!((two_terms - expected).abs() < 1e-15);
}

#[test]
fn dense_dft_matches_spectrum_shape() {
    let p = DmeSignalParams::default();
    let fs = 20e6;
    let n = 1 << 16;
    // Centre the pair in the window; the DFT phase reference does not
    // matter for magnitudes.
    let t0 = n as f64 / (2.0 * fs) - p.delta_t / 2.0;
    let mut buf: Vec<Complex> = (0..n).map(|i| Complex::new(dme_pulse_pair(&p, i as f64 / fs - t0), 0.0)).collect();
    refofdm::dsp::fft_in_place(&mut buf);
    let df = fs / n as f64;
    let lobe = 1.0 / (2.0 * p.delta_t);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for k in 0..n {
        let f = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * df;
        if f.abs() < lobe {
            a.push(buf[k].norm() / fs);
            b.push(dme_spectrum(&p, f).norm());
        }
    }
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(dot / (na * nb) > 0.999);
    // Absolute scale agrees too.
    assert!((a[0] / b[0] - 1.0).abs() < 1e-6);
}

#[test]
fn stream_psd_matches_closed_form() {
    let p = DmeSignalParams { center_offset_hz: 150e3, ..Default::default() };
    let fs = 2.5e6;
    let s = generate_dme_stream(&p, 1.0, fs, 7).unwrap();
    let psd = estimate_psd(&s, 1024, 0.5).unwrap();
    for (lo, hi) in [(50e3, 250e3), (100e3, 200e3), (-400e3, 700e3)] {
        let measured = psd.band_power(lo, hi).unwrap();
        let expected = p.pulse_pair_rate_pps * dme_interference_power(&p, lo - p.center_offset_hz, hi - p.center_offset_hz);
        let rel = (measured / expected - 1.0).abs();
        assert!(rel < 0.05, "[{lo}, {hi}]: {measured} vs {expected}");
    }
    // The total power follows rate × pair energy.
    assert!((s.mean_power() / p.mean_power() - 1.0).abs() < 0.05);
}

#[test]
fn forced_pulse_matches_formula() {
    let p = DmeSignalParams { amplitude: 1.7, center_offset_hz: -230e3, ..Default::default() };
    let fs = 2.5e6;
    let s = render_pulse_pairs(&p, &[PulseArrival { time_s: 0.0, phase: 0.0 }], 200, fs);
    for (n, v) in s.samples.iter().enumerate() {
        let t = n as f64 / fs;
        let oracle = Complex::from_polar(p.amplitude * dme_pulse_pair(&p, t), 2.0 * PI * p.center_offset_hz * t);
        assert!((v - oracle).norm() < 1e-12, "sample {n}");
    }
}

#[test]
fn poisson_count_within_three_sigma() {
    let rate = 3600.0;
    let duration = 100.0;
    let count = poisson_arrivals(rate, duration, 99).len() as f64;
    let mean = rate * duration;
    assert!((count - mean).abs() < 3.0 * mean.sqrt(), "{count}");
}

#[test]
fn ggi_power_and_gating() {
    let g = GgiParams { on_fraction: 0.25, gate_period_samples: 400, power: 2.0 };
    let x = generate_ggi(&g, 1_000_000, 5).unwrap();
    let p = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
    assert!((p / (g.power * g.on_fraction) - 1.0).abs() < 0.02, "{p}");
    assert!(x.iter().enumerate().filter(|(n, _)| n % 400 >= 100).all(|(_, v)| *v == Complex::new(0.0, 0.0)));
    let full = generate_ggi(&GgiParams { on_fraction: 1.0, ..g }, 1_000_000, 6).unwrap();
    let p = full.iter().map(|v| v.norm_sqr()).sum::<f64>() / full.len() as f64;
    assert!((p / g.power - 1.0).abs() < 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn band_power_additive(a in -1.0e6f64..1.0e6, b in -1.0e6f64..1.0e6, c in -1.0e6f64..1.0e6) {
        let p = DmeSignalParams::default();
        let mut v = [a, b, c];
        v.sort_by(f64::total_cmp);
        let whole = dme_interference_power(&p, v[0], v[2]);
        let split = dme_interference_power(&p, v[0], v[1]) + dme_interference_power(&p, v[1], v[2]);
        prop_assert!((whole - split).abs() <= 1e-12 * p.pair_energy());
    }

    #[test]
    fn symmetric_interval_doubles(f0 in 0.0f64..1.0e6) {
        let p = DmeSignalParams::default();
        let both = dme_interference_power(&p, -f0, f0);
        let half = dme_interference_power(&p, 0.0, f0);
        prop_assert!((both - 2.0 * half).abs() <= 1e-13 * p.pair_energy());
    }

    #[test]
    fn power_scales_with_amplitude_squared(a in 0.0f64..10.0, f1 in -5.0e5f64..0.0, f2 in 0.0f64..5.0e5) {
        let unit = DmeSignalParams::default();
        let scaled = DmeSignalParams { amplitude: a, ..unit };
        let r = dme_interference_power(&scaled, f1, f2) - a * a * dme_interference_power(&unit, f1, f2);
        prop_assert!(r.abs() <= 1e-12 * a * a * unit.pair_energy());
    }

    #[test]
    fn stream_deterministic(seed in any::<u64>()) {
        let p = DmeSignalParams { pulse_pair_rate_pps: 20_000.0, ..Default::default() };
        let a = generate_dme_stream(&p, 2e-3, 2.5e6, seed).unwrap();
        prop_assert_eq!(a, generate_dme_stream(&p, 2e-3, 2.5e6, seed).unwrap());
    }
}
