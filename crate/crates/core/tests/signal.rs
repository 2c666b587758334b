use std::f64::consts::PI;

use ltft::signal::bandlimited_signal;
use ltft::{Complex64, Signal};
use proptest::prelude::*;

fn complex_vec(max: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), 1..max)
}

/// `(1/R) Σ s_n e^{−2πizt_n}` evaluated directly.
fn direct_ft(s: &Signal, z: f64) -> Complex64 {
    s.samples()
        .iter()
        .enumerate()
        .map(|(n, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * z * s.time(n)))
        .sum::<Complex64>()
        / s.rate()
}

proptest! {
    #[test]
    fn plancherel_and_round_trip(xs in complex_vec(200), rate in 1.0f64..500.0, origin in -3.0f64..3.0) {
        let s = Signal::new(xs, rate, origin).unwrap();
        let sp = s.dft();
        prop_assert!((sp.energy() - s.energy()).abs() <= 1e-10 * s.energy().max(1e-300));
        let back = sp.idft();
        prop_assert!(back.relative_error(&s).unwrap() < 1e-12);
    }

    #[test]
    fn translation_and_modulation_are_unitary(xs in complex_vec(128), x in -2.0f64..2.0, omega in -50.0f64..50.0) {
        let s = Signal::new(xs, 32.0, -1.0).unwrap();
        let e = s.energy();
        prop_assert!((s.translate(x).energy() - e).abs() <= 1e-10 * e);
        prop_assert!((s.modulate(omega).energy() - e).abs() <= 1e-10 * e);
    }

    #[test]
    fn translation_is_a_phase_ramp(seed in 0u64..1000, x in -0.3f64..0.3) {
        let s = bandlimited_signal(128, 64.0, 16.0, 5, false, seed).unwrap();
        let a = s.translate(x).dft();
        let b = s.dft();
        let mut err = 0.0;
        for j in 0..a.len() {
            let expect = b.bins()[j] * Complex64::from_polar(1.0, -2.0 * PI * b.freq(j) * x);
            err += (a.bins()[j] - expect).norm_sqr();
        }
        prop_assert!(err.sqrt() <= 1e-6 * b.energy().sqrt() * b.bin_hz().sqrt().recip());
    }

    #[test]
    fn modulation_shifts_the_spectrum(seed in 0u64..1000, k in -20i64..20) {
        let s = bandlimited_signal(128, 64.0, 8.0, 5, false, seed).unwrap().padded(64, 64);
        let sp = s.dft();
        let omega = k as f64 * sp.bin_hz();
        let m = s.modulate(omega).dft();
        let mut err = 0.0;
        let mut norm = 0.0;
        for j in 0..m.len() {
            let expect = direct_ft(&s, m.freq(j) - omega);
            err += (m.bins()[j] - expect).norm_sqr();
            norm += expect.norm_sqr();
        }
        prop_assert!((err / norm).sqrt() < 1e-6);
    }
}

#[test]
fn delta_translates_by_whole_samples() {
    let mut v = vec![Complex64::new(0.0, 0.0); 16];
    v[0] = Complex64::new(1.0, 0.0);
    let s = Signal::new(v, 8.0, 0.0).unwrap();
    let t = s.translate(3.0 / 8.0);
    assert_eq!(t.samples()[3], Complex64::new(1.0, 0.0));
    assert_eq!(t.samples().iter().filter(|c| c.norm() > 0.0).count(), 1);
}

#[test]
fn modulated_constant_is_a_tone_at_the_shift() {
    let s = Signal::new(vec![Complex64::new(1.0, 0.0); 64], 64.0, 0.0).unwrap();
    let sp = s.modulate(16.0).dft();
    let peak = (0..sp.len()).max_by(|&a, &b| sp.bins()[a].norm().total_cmp(&sp.bins()[b].norm())).unwrap();
    assert!((sp.freq(peak) - 16.0).abs() < 1e-9);
}

#[test]
fn dilation_scales_the_spectrum() {
    let s = bandlimited_signal(256, 128.0, 16.0, 6, false, 4).unwrap().padded(256, 256);
    let d = s.dilate(2.0).unwrap();
    assert!((d.energy() - s.energy()).abs() < 1e-6 * s.energy());
    // D(2)s has spectrum √2·ŝ(2z); the sampled sum aliases past Nyquist
    let sp = d.dft();
    let (mut err, mut norm) = (0.0, 0.0);
    for j in (0..sp.len()).filter(|&j| sp.freq(j).abs() < s.rate() / 4.0) {
        let expect = direct_ft(&s, 2.0 * sp.freq(j)) * 2f64.sqrt();
        err += (sp.bins()[j] - expect).norm_sqr();
        norm += expect.norm_sqr();
    }
    assert!((err / norm).sqrt() < 1e-6, "relative spectral error {}", (err / norm).sqrt());
    assert!(s.dilate(0.0).is_err());
}
