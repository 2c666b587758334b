//! Non-negative windows supported on `[-1/2, 1/2]` with their Fourier transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// `sin(πz)/(πz)`.
#[inline]
pub fn sinc(z: f64) -> f64 {
    let x = PI * z;
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Hann window `(1 + cos 2πt)/2` on `[-1/2, 1/2]`, zero elsewhere.
#[inline]
pub fn hann_eval(t: f64) -> f64 {
    if t.abs() > 0.5 {
        0.0
    } else {
        0.5 * (1.0 + (2.0 * PI * t).cos())
    }
}

/// Fourier transform of [`hann_eval`]: `½sinc(z) + ¼sinc(z−1) + ¼sinc(z+1)`.
#[inline]
pub fn hann_ft(z: f64) -> f64 {
    0.5 * sinc(z) + 0.25 * sinc(z - 1.0) + 0.25 * sinc(z + 1.0)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Window {
    #[default]
    Hann,
    /// Samples on a uniform grid spanning `[-1/2, 1/2]` (endpoints included),
    /// linearly interpolated.
    Table(Arc<[f64]>),
}

impl Window {
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("window table needs at least two samples"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("window table must be finite and non-negative"));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(invalid("window table is identically zero"));
        }
        Ok(Window::Table(values.into()))
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Window::Hann => hann_eval(t),
            Window::Table(v) => {
                if t.abs() > 0.5 {
                    return 0.0;
                }
                let pos = (t + 0.5) * (v.len() - 1) as f64;
                let i = (pos.floor() as usize).min(v.len() - 2);
                let frac = pos - i as f64;
                v[i] * (1.0 - frac) + v[i + 1] * frac
            }
        }
    }

    /// `ŵ(z) = ∫ w(t) e^{-2πizt} dt`.
    pub fn ft(&self, z: f64) -> Complex64 {
        match self {
            Window::Hann => Complex64::new(hann_ft(z), 0.0),
            Window::Table(v) => {
                // Piecewise-linear interpolant: triangle kernel times sample DTFT.
                let dt = 1.0 / (v.len() - 1) as f64;
                let kernel = dt * sinc(z * dt).powi(2);
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &w) in v.iter().enumerate() {
                    let t = -0.5 + i as f64 * dt;
                    acc += w * Complex64::from_polar(1.0, -2.0 * PI * z * t);
                }
                acc * kernel
            }
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            Window::Hann => true,
            Window::Table(v) => {
                let n = v.len();
                (0..n / 2).all(|i| (v[i] - v[n - 1 - i]).abs() <= 1e-12 * (1.0 + v[i].abs()))
            }
        }
    }

    /// `∫ w(t)² dt`.
    pub fn energy(&self) -> f64 {
        match self {
            Window::Hann => 0.375,
            Window::Table(v) => {
                // exact for the linear interpolant
                let dt = 1.0 / (v.len() - 1) as f64;
                v.windows(2)
                    .map(|p| dt * (p[0] * p[0] + p[0] * p[1] + p[1] * p[1]) / 3.0)
                    .sum()
            }
        }
    }

    /// Decay exponent `k` with `|ŵ(z)| = O(|z|^{-k})`.
    pub fn decay_order(&self) -> u32 {
        match self {
            Window::Hann => 3,
            Window::Table(_) => 2,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Window::Hann => "hann".into(),
            Window::Table(v) => format!("table{}", v.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson;

    fn ft_by_quadrature(w: &Window, z: f64) -> Complex64 {
        let re = simpson(-0.5, 0.5, 20_000, |t| w.eval(t) * (2.0 * PI * z * t).cos());
        let im = simpson(-0.5, 0.5, 20_000, |t| -w.eval(t) * (2.0 * PI * z * t).sin());
        Complex64::new(re, im)
    }

    #[test]
    fn hann_values() {
        assert_eq!(hann_eval(0.0), 1.0);
        assert_eq!(hann_eval(0.6), 0.0);
        assert!(hann_eval(0.5).abs() < 1e-16);
        assert!((hann_ft(0.0) - 0.5).abs() < 1e-15);
        assert!((hann_ft(1.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn hann_ft_matches_quadrature() {
        for z in [0.0, 0.5, -0.5, 1.0, -1.0, 2.5, -2.5] {
            let q = ft_by_quadrature(&Window::Hann, z);
            assert!((q.re - hann_ft(z)).abs() < 1e-9, "z = {z}");
            assert!(q.im.abs() < 1e-12);
        }
    }

    #[test]
    fn hann_ft_is_even_and_real() {
        for i in 0..100 {
            let z = i as f64 * 0.173;
            assert!((hann_ft(z) - hann_ft(-z)).abs() < 1e-15);
        }
    }

    #[test]
    fn table_window_ft_matches_quadrature() {
        let vals: Vec<f64> = (0..33).map(|i| hann_eval(-0.5 + i as f64 / 32.0)).collect();
        let w = Window::table(vals).unwrap();
        for z in [0.0, 0.7, 3.2] {
            let q = ft_by_quadrature(&w, z);
            assert!((q - w.ft(z)).norm() < 1e-7, "z = {z}");
        }
        let e = simpson(-0.5, 0.5, 20_000, |t| w.eval(t).powi(2));
        assert!((e - w.energy()).abs() < 1e-8);
        assert!(w.is_even());
    }

    #[test]
    fn table_rejects_negative() {
        assert!(Window::table(vec![0.0, -1.0, 0.0]).is_err());
    }
}
