use fdqme::liouville::C64;
use fdqme::spectrum::Spectrum;
use fdqme::waveguide::{
    default_grid, field_amplitude, resonant_eta, waveguide_measure_sweep, waveguide_spectrum, WaveguideParams,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn params(eta: f64) -> WaveguideParams {
    WaveguideParams::new(500.0, 1.0, 0.95, eta).unwrap()
}

fn maxima_in(s: &Spectrum, lo: f64, hi: f64) -> Vec<f64> {
    s.local_maxima().into_iter().filter(|&x| x > lo && x < hi).collect()
}

#[test]
fn zero_delay_amplitude_is_lorentzian() {
    let (g, b) = (1.3, 0.8);
    let p = WaveguideParams::new(40.0, g, b, 0.0).unwrap();
    let hw = g * (1.0 + b) / 2.0;
    for k in -50..=50 {
        let w = 40.0 + 0.37 * k as f64;
        let expect = g * b / (2.0 * PI) / ((w - 40.0).powi(2) + hw * hw);
        assert!((field_amplitude(&p, w).norm_sqr() - expect).abs() < 1e-14 * expect.max(1e-3));
    }
}

#[test]
fn zero_delay_spectrum_width() {
    for beta in [0.3, 0.95] {
        let p = WaveguideParams::new(500.0, 1.0, beta, 0.0).unwrap();
        let s = waveguide_spectrum(&p, &default_grid(&p).unwrap()).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-6);
        let w = s.fwhm().unwrap();
        assert!((w - (1.0 + beta)).abs() < 1e-2 * (1.0 + beta), "{w}");
        assert!((s.peak().0 - 500.0).abs() < 1e-2);
    }
}

#[test]
fn fano_nulls_are_exact() {
    let p = params(8.29);
    // cos(ηω/2γ) = 0 at ω = (2k+1)πγ/η.
    let k0 = (p.omega0() * p.eta() / (2.0 * PI)).floor() as i64;
    for k in k0 - 3..=k0 + 3 {
        let w = (2 * k + 1) as f64 * PI / p.eta();
        // Zero up to the rounding of ω itself.
        let a = field_amplitude(&p, w).norm_sqr();
        let peak = field_amplitude(&p, p.omega0()).norm_sqr();
        assert!(a < 1e-20 * peak, "{w}: {a}");
    }
}

#[test]
fn decoupled_waveguide_shape_ignores_delay() {
    let beta = 1e-9;
    let shape = |eta: f64, w: f64| {
        let p = WaveguideParams::new(500.0, 1.0, beta, eta).unwrap();
        let num = (beta / (2.0 * PI)).sqrt() * (eta * w / 2.0).cos();
        let a: C64 = field_amplitude(&p, w);
        (a / num).norm_sqr()
    };
    for w in [497.3, 499.9, 500.0, 501.4] {
        let free = 1.0 / ((w - 500.0f64).powi(2) + 0.25);
        for eta in [0.0, 3.0, 28.3] {
            assert!((shape(eta, w) - free).abs() < 1e-8 * free);
        }
    }
}

#[test]
fn intermediate_delay_has_fano_features_inside_the_line() {
    let p = params(8.29);
    let s = waveguide_spectrum(&p, &default_grid(&p).unwrap()).unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-6);
    let m = maxima_in(&s, 498.0, 502.0);
    assert!(m.len() >= 3, "{m:?}");
}

#[test]
fn long_delay_comb_spacing() {
    let eta = 28.3;
    let p = params(eta);
    let s = waveguide_spectrum(&p, &default_grid(&p).unwrap()).unwrap();
    let m = maxima_in(&s, 490.0, 510.0);
    let mut gaps: Vec<f64> = m.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(|a, b| a.total_cmp(b));
    let median = gaps[gaps.len() / 2];
    let expect = 2.0 * PI / eta;
    assert!((median - expect).abs() < 0.1 * expect, "{median} vs {expect}");
}

#[test]
fn sweep_rises_peaks_and_saturates() {
    let etas: Vec<f64> = (0..=120).map(|k| resonant_eta(500.0, 40 * k)).collect();
    let sw = waveguide_measure_sweep(&params(0.0), &etas).unwrap();
    let v: Vec<f64> = sw.results.iter().map(|r| r.value).collect();
    assert_eq!(v[0], 0.0);
    assert!(v.iter().all(|&x| x >= 0.0));
    assert!((sw.gap - 1.95).abs() < 1e-2 * 1.95);
    let k = v.iter().enumerate().fold(0, |b, (i, &x)| if x > v[b] { i } else { b });
    assert!(k > 0 && k < v.len() - 1);
    assert_eq!(sw.eta_max, etas[k]);
    assert!(v[..=k].windows(2).all(|w| w[1] > w[0]));
    // Any later local maximum is plateau ripple, not a second hump.
    for i in k + 1..v.len() - 1 {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] {
            assert!(v[i] < 1.01 * sw.saturation, "{i}: {}", v[i]);
        }
    }
    let tail = &v[v.len() * 3 / 4..];
    let (lo, hi) = tail.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!((hi - lo) < 0.1 * lo);
    assert!(sw.saturation < 0.95 * v[k]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_is_normalized_and_nonnegative(n in 0u32..3000, beta in 0.05..1.0f64) {
        let p = WaveguideParams::resonant(500.0, 1.0, beta, n).unwrap();
        let s = waveguide_spectrum(&p, &default_grid(&p).unwrap()).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-6);
        prop_assert!(s.values().iter().all(|&v| v >= 0.0));
    }
}
