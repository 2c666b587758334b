use std::f64::consts::PI;

use ltft::frames::{DenseGrid, LtftFrame, LtftParams};
use ltft::signal::bandlimited_signal;
use ltft::verify::{covering_domain, dense_frame_op, frame_op_equivalence, pseudo_inverse_residuals, FrameReport};
use ltft::{Complex64, Signal};

const RATE: f64 = 256.0;

fn frame() -> LtftFrame {
    LtftFrame::new(LtftParams::default_for_rate(RATE), RATE).unwrap()
}

fn tone(freq: f64, m: usize) -> Signal {
    let half = m as f64 / (2.0 * RATE);
    let v = (0..=m).map(|i| Complex64::from_polar(1.0, 2.0 * PI * freq * (-half + i as f64 / RATE))).collect();
    Signal::new(v, RATE, -half).unwrap()
}

#[test]
fn zero_signal_has_zero_residual() {
    let f = frame();
    let s = Signal::zeros(129, RATE, 0.0).unwrap();
    let dom = covering_domain(&f, &s, 2.0).unwrap();
    assert_eq!(pseudo_inverse_residuals(&f, &s, &dom, &DenseGrid::default()).unwrap(), 0.0);
    assert_eq!(frame_op_equivalence(&f, &s, &dom, &DenseGrid::default()).unwrap(), 0.0);
}

#[test]
fn tone_outside_the_domain_is_not_reconstructed() {
    let f = frame();
    let s = tone(0.4 * RATE, 128);
    let narrow = covering_domain(&f, &s, 0.5).unwrap();
    let r = pseudo_inverse_residuals(&f, &s, &narrow, &DenseGrid::default()).unwrap();
    assert!(r > 0.5, "residual {r}");
    let inside = bandlimited_signal(128, RATE, RATE / 8.0, 4, false, 2).unwrap();
    let r = pseudo_inverse_residuals(&f, &inside, &narrow, &DenseGrid::default()).unwrap();
    assert!(r < 0.05, "in-band residual {r}");
}

#[test]
fn frame_operator_scales_a_tone_by_the_filter() {
    let f = frame();
    let z0 = 48.0;
    let s = tone(z0, 512);
    let out = dense_frame_op(&f, &s, &covering_domain(&f, &s, 2.0).unwrap(), &DenseGrid::default()).unwrap();
    let center = out.index_of(0.0).round() as usize;
    let ratio = out.samples()[center].norm() / f.filter().value(z0);
    assert!((ratio - 1.0).abs() < 0.02, "amplitude ratio {ratio}");
}

#[test]
fn frame_report_is_consistent() {
    let f = frame();
    let s = bandlimited_signal(256, RATE, RATE / 4.0, 6, false, 12).unwrap();
    let r = FrameReport::measure(&f, &s, 2.0, &DenseGrid::default()).unwrap();
    assert!(r.a_est > 0.0 && r.b_est >= r.a_est);
    assert!((r.parseval_ratio - 1.0).abs() < 0.02, "parseval {}", r.parseval_ratio);
    assert!(r.reconstruction_error < 1e-6 && r.pseudo_inverse_residual < 0.05);
}
