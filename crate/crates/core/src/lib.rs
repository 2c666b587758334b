//! Localizing time-frequency transform (LTFT) continuous frames and
//! randomized phase-space signal processing.
//!
//! The crate is organized bottom-up:
//!
//! * [`signal`] and [`window`]: sampled signals, the DFT grid convention,
//!   translation / modulation / dilation, and windows with closed-form spectra.
//! * [`frames`]: the STFT, CWT and LTFT atom families, coefficient evaluation,
//!   the LTFT frame filter and its inverse, and dense-quadrature oracles.
//! * [`phase_space`]: finite-measure sampling domains, uniform samplers and
//!   truncation (linear volume) measurements.
//! * [`pipelines`]: nonlinearities, phase-space operators and the Monte Carlo
//!   estimators (vocoder, multiplier, shrinkage, kernel operators).
//! * [`verify`]: statistical checks and report rows used by the acceptance
//!   suite and the `ltft` command line tool.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frames;
pub mod phase_space;
pub mod pipelines;
pub mod quad;
pub mod signal;
pub mod verify;
pub mod window;

pub use error::{Error, Result};
pub use frames::{
    Atom, Band, CwtFrame, Frame, FrameFilter, FrameShape, LtftFrame, LtftParams, MotherWavelet, PhasePoint,
    QuadratureConfig, StftFrame, Transition,
};
pub use num_complex::Complex64;
pub use phase_space::{LvdReport, PhaseDomain, Sidedness};
pub use pipelines::{Nonlinearity, PhaseOpSpec, PipelineConfig, PipelineMode, SampleCount, Symbol};
pub use signal::{Signal, Spectrum};
pub use window::Window;
