//! Atom families, coefficient evaluation, the LTFT frame filter and dense
//! quadrature oracles for the analysis and synthesis operators.

mod atom;
mod cwt;
pub mod dense;
pub mod filter;
mod ltft;
mod stft;

pub use atom::Atom;
pub use cwt::{CwtFrame, MotherWavelet};
pub use dense::{dense_analysis, dense_synthesis, CoefficientGrid, DenseGrid, DenseSlice, Oversample};
pub use filter::{FrameFilter, QuadratureConfig};
pub use ltft::{atom_band, atom_support, eval_atom_ft, eval_ltft_atom, FrameShape, LtftFrame, LtftParams, Transition};
pub use stft::StftFrame;

use num_complex::Complex64;

use crate::error::Result;
use crate::signal::Signal;

/// A phase-space point: time `x` (s), frequency `omega` (Hz) and oscillation
/// count `tau` (ignored by the STFT and CWT families).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub x: f64,
    pub omega: f64,
    pub tau: f64,
}

impl PhasePoint {
    pub const fn new(x: f64, omega: f64, tau: f64) -> Self {
        Self { x, omega, tau }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Low,
    Mid,
    High,
}

/// A continuous frame: a measurable family of atoms indexed by phase space,
/// plus its inverse frame operator.
pub trait Frame: Send + Sync {
    /// The atom `f_p`. Fails only where the family is undefined (CWT at ω = 0).
    fn atom(&self, p: &PhasePoint) -> Result<Atom>;

    /// Applies `S_f⁻¹`.
    fn apply_inverse(&self, s: &Signal) -> Result<Signal>;

    /// Applies `S_f`.
    fn apply_frame_op(&self, s: &Signal) -> Result<Signal>;

    /// Frequency resolution of the coefficient function around `(omega, tau)`,
    /// used to choose dense ω-steps.
    fn omega_resolution(&self, omega: f64, tau: f64) -> f64;

    /// Frequencies (at a given τ) where the atom formula changes.
    fn breakpoints(&self, _tau: f64) -> Vec<f64> {
        Vec::new()
    }

    /// τ range of the phase space, if the family has a τ axis.
    fn tau_range(&self) -> Option<(f64, f64)> {
        None
    }

    /// Longest atom support in seconds.
    fn max_support(&self) -> f64;

    fn label(&self) -> String;

    /// `V_f[s](p)` by the rectangle rule on the signal grid.
    fn analysis_coeff(&self, s: &Signal, p: &PhasePoint) -> Result<Complex64> {
        Ok(self.atom(p)?.analyze(s).0)
    }
}
