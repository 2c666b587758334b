//! Monte Carlo phase-space signal processing.
//!
//! A pipeline samples `K` points uniformly from a finite domain `G`, computes
//! `V_f` there, applies a phase-space operator `T` and a pointwise
//! nonlinearity `r`, and resynthesizes:
//!
//! * synthesis mode: `C Σ r(T V_f[S_f⁻¹ s](g_k)) f_{g_k}`
//! * analysis mode:  `S_f⁻¹ C Σ r(T V_f[s](g_k)) f_{g_k}`
//!
//! with `C = μ(G)/K`. Real inputs default to the positive-frequency domain
//! and the output is twice its real part.

mod complexity;
mod mc;
mod nonlinearity;
mod ops;
mod vocoder;

pub use complexity::{op_count, predicted_work, OpCount};
pub use mc::{dense_kernel_pipeline, dense_pipeline, run_kernel_pipeline, run_mc_pipeline, PipelineOutput, PipelineStats};
pub use nonlinearity::Nonlinearity;
pub use ops::{Diffeo, KernelOp, PhaseOpSpec, Symbol, SymbolGrid};
pub use vocoder::{denoise, multiply, phase_vocoder};

use crate::error::{invalid, Result};
use crate::phase_space::{PhaseDomain, Sidedness};

/// Where `S_f⁻¹` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PipelineMode {
    /// To the input, before analysis.
    #[default]
    Synthesis,
    /// To the synthesized output.
    Analysis,
}

/// How many Monte Carlo samples to draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleCount {
    Fixed(usize),
    /// `K = ⌈Z·μ(G)⌉`.
    PerVolume(f64),
}

impl SampleCount {
    pub fn resolve(&self, measure: f64) -> Result<usize> {
        match *self {
            SampleCount::Fixed(0) => Err(invalid("sample count K must be positive")),
            SampleCount::Fixed(k) => Ok(k),
            SampleCount::PerVolume(z) => {
                if !(z.is_finite() && z > 0.0) {
                    return Err(invalid(format!("samples per unit volume must be positive, got {z}")));
                }
                Ok(((z * measure).ceil() as usize).max(1))
            }
        }
    }
}

/// Normalization constant convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `C = μ(G)/K` with τ carrying unit mass.
    #[default]
    DomainMeasure,
    /// `C = μ(G)(τ₂ − τ₁)/K`: τ measured by Lebesgue length.
    LebesgueTau,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    pub samples: SampleCount,
    /// Output-side sample count `L` for kernel operators.
    pub second_stage: Option<usize>,
    pub seed: u64,
    /// Frequency extent factor of the default domain (`ω` up to `WR/2`).
    pub w: f64,
    /// Overrides the default domain.
    pub domain: Option<PhaseDomain>,
    /// Defaults to positive frequencies for real input, two-sided otherwise.
    pub sides: Option<Sidedness>,
    pub normalization: Normalization,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: PipelineMode::Synthesis,
            samples: SampleCount::PerVolume(64.0),
            second_stage: None,
            seed: 0,
            w: 1.0,
            domain: None,
            sides: None,
            normalization: Normalization::DomainMeasure,
        }
    }
}

impl PipelineConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: SampleCount) -> Self {
        self.samples = samples;
        self
    }
}

/// Independent stream seed derived from `(seed, stream)` (splitmix64).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
