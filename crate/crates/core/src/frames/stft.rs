use super::{Atom, Frame, PhasePoint};
use crate::error::{invalid, Result};
use crate::signal::Signal;
use crate::window::Window;

/// Short-time Fourier transform with window `w(t/L)/√(L‖w‖²)`, a Parseval
/// frame over `ℝ²` with Lebesgue measure.
#[derive(Debug, Clone, PartialEq)]
pub struct StftFrame {
    window: Window,
    length: f64,
}

impl StftFrame {
    /// `length` is the window support in seconds.
    pub fn new(window: Window, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!("STFT window length must be positive, got {length}")));
        }
        Ok(Self { window, length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

impl Frame for StftFrame {
    fn atom(&self, p: &PhasePoint) -> Result<Atom> {
        Ok(Atom {
            center: p.x,
            scale: 1.0 / self.length,
            amp: 1.0 / (self.length * self.window.energy()).sqrt(),
            freq: p.omega,
            dc: 0.0,
            window: self.window.clone(),
        })
    }

    fn apply_inverse(&self, s: &Signal) -> Result<Signal> {
        Ok(s.clone())
    }

    fn apply_frame_op(&self, s: &Signal) -> Result<Signal> {
        Ok(s.clone())
    }

    fn omega_resolution(&self, _omega: f64, _tau: f64) -> f64 {
        1.0 / self.length
    }

    fn max_support(&self) -> f64 {
        self.length
    }

    fn label(&self) -> String {
        format!("stft[{};L={}]", self.window.label(), self.length)
    }
}
