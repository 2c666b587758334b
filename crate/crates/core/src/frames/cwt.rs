use num_complex::Complex64;

use super::{Atom, Frame, PhasePoint};
use crate::error::{invalid, Result};
use crate::quad::GaussLegendre;
use crate::signal::Signal;
use crate::window::Window;

/// Mother wavelet `f(t) = k·(e^{2πiνt} − ŵ(ν)/ŵ(0))·w(t)` supported on
/// `[−1/2, 1/2]`, with `k` chosen so that `∫|f̂(v)|²/|v| dv = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotherWavelet {
    window: Window,
    nu: f64,
    dc: f64,
    norm: f64,
    raw_admissibility: f64,
}

impl MotherWavelet {
    pub fn new(window: Window, nu: f64) -> Result<Self> {
        if !window.is_even() {
            return Err(invalid("wavelet window must be even"));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(invalid(format!("wavelet carrier must be positive, got {nu}")));
        }
        let w0 = window.ft(0.0).re;
        let dc = window.ft(nu).re / w0;
        let mut mw = Self { window, nu, dc, norm: 1.0, raw_admissibility: 0.0 };
        let raw = mw.admissibility();
        if !(raw.is_finite() && raw > 0.0) {
            return Err(invalid("wavelet is not admissible"));
        }
        mw.raw_admissibility = raw;
        mw.norm = 1.0 / raw.sqrt();
        Ok(mw)
    }

    /// Hann window, `ν = 2` (the DC term vanishes exactly).
    pub fn default_hann() -> Self {
        Self::new(Window::Hann, 2.0).expect("Hann wavelet is admissible")
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dc(&self) -> f64 {
        self.dc
    }

    /// Half-width of the time support.
    pub fn half_support(&self) -> f64 {
        0.5
    }

    /// Admissibility constant before normalization.
    pub fn raw_admissibility(&self) -> f64 {
        self.raw_admissibility
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.atom_at(0.0, 1.0).eval(t)
    }

    pub fn ft(&self, v: f64) -> Complex64 {
        (self.window.ft(v - self.nu) - self.dc * self.window.ft(v)) * self.norm
    }

    /// `∫|f̂(v)|²/|v| dv` by composite Gauss-Legendre, split at 0 and ±ν.
    pub fn admissibility(&self) -> f64 {
        let gl = GaussLegendre::new(8);
        let span = 400.0;
        let integrand = |v: f64| self.ft(v).norm_sqr() / v.abs();
        let mut acc = 0.0;
        for (lo, hi) in [(-span, -self.nu), (-self.nu, 0.0), (0.0, self.nu), (self.nu, span)] {
            let panels = ((hi - lo) * 8.0).ceil() as usize;
            acc += gl.composite(lo, hi, panels, integrand);
        }
        acc
    }

    fn atom_at(&self, x: f64, omega: f64) -> Atom {
        let w = omega.abs();
        Atom {
            center: x,
            scale: w,
            amp: w.sqrt() * self.norm,
            freq: self.nu * omega,
            dc: self.dc,
            window: self.window.clone(),
        }
    }
}

/// Continuous wavelet transform in the `ω = 1/scale` parametrization,
/// `f_{x,ω}(t) = √|ω|·f(ω(t − x))`, Parseval over `ℝ × (ℝ∖{0})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtFrame {
    mother: MotherWavelet,
    min_abs_omega: f64,
}

impl CwtFrame {
    /// `min_abs_omega` bounds the atom support used for signal padding.
    pub fn new(mother: MotherWavelet, min_abs_omega: f64) -> Result<Self> {
        if !(min_abs_omega.is_finite() && min_abs_omega > 0.0) {
            return Err(invalid("min_abs_omega must be positive"));
        }
        Ok(Self { mother, min_abs_omega })
    }

    pub fn mother(&self) -> &MotherWavelet {
        &self.mother
    }
}

impl Frame for CwtFrame {
    fn atom(&self, p: &PhasePoint) -> Result<Atom> {
        if p.omega == 0.0 || !p.omega.is_finite() {
            return Err(invalid("CWT atoms are undefined at omega = 0"));
        }
        Ok(self.mother.atom_at(p.x, p.omega))
    }

    fn apply_inverse(&self, s: &Signal) -> Result<Signal> {
        Ok(s.clone())
    }

    fn apply_frame_op(&self, s: &Signal) -> Result<Signal> {
        Ok(s.clone())
    }

    fn omega_resolution(&self, omega: f64, _tau: f64) -> f64 {
        omega.abs() / (1.0 + self.mother.nu)
    }

    fn breakpoints(&self, _tau: f64) -> Vec<f64> {
        vec![0.0]
    }

    fn max_support(&self) -> f64 {
        2.0 * self.mother.half_support() / self.min_abs_omega
    }

    fn label(&self) -> String {
        format!("cwt[{};nu={}]", self.mother.window.label(), self.mother.nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson;
    use std::f64::consts::PI;

    #[test]
    fn default_wavelet_has_no_dc() {
        let mw = MotherWavelet::default_hann();
        // quadrature of the time-domain wavelet
        let re = simpson(-0.5, 0.5, 20_000, |t| mw.eval(t).re);
        let im = simpson(-0.5, 0.5, 20_000, |t| mw.eval(t).im);
        assert!(re.abs() < 1e-8 && im.abs() < 1e-8);
        assert!(mw.ft(0.0).norm() < 1e-12);
    }

    #[test]
    fn normalized_admissibility() {
        let mw = MotherWavelet::default_hann();
        assert!((mw.admissibility() - 1.0).abs() < 1e-6);
        let odd = MotherWavelet::new(Window::Hann, 1.5).unwrap();
        assert!(odd.dc() != 0.0);
        assert!(odd.ft(0.0).norm() < 1e-12);
        assert!((odd.admissibility() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ft_matches_quadrature() {
        let mw = MotherWavelet::new(Window::Hann, 1.5).unwrap();
        for v in [-1.0, 0.3, 1.5, 4.0] {
            let re = simpson(-0.5, 0.5, 20_000, |t| (mw.eval(t) * Complex64::from_polar(1.0, -2.0 * PI * v * t)).re);
            let im = simpson(-0.5, 0.5, 20_000, |t| (mw.eval(t) * Complex64::from_polar(1.0, -2.0 * PI * v * t)).im);
            assert!((Complex64::new(re, im) - mw.ft(v)).norm() < 1e-8, "v = {v}");
        }
    }

    #[test]
    fn atoms_are_unitary_dilations() {
        let frame = CwtFrame::new(MotherWavelet::default_hann(), 0.1).unwrap();
        let base = frame.atom(&PhasePoint::new(0.0, 1.0, 0.0)).unwrap().norm_sqr();
        for omega in [0.3, 7.0, -2.0] {
            let n = frame.atom(&PhasePoint::new(0.2, omega, 0.0)).unwrap().norm_sqr();
            assert!((n - base).abs() < 1e-6 * base, "omega = {omega}");
        }
        assert!(frame.atom(&PhasePoint::new(0.0, 0.0, 0.0)).is_err());
    }
}
