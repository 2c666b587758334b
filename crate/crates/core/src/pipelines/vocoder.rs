use super::{run_mc_pipeline, Diffeo, Nonlinearity, PhaseOpSpec, PipelineConfig, PipelineOutput, Symbol};
use crate::error::{invalid, Result};
use crate::frames::Frame;
use crate::phase_space::Sidedness;
use crate::signal::Signal;

/// Stretches a real signal by the integer factor `Δ` without moving its
/// frequency content: atoms move from `x` to `Δx` (amplitude kept by the
/// Jacobian factor `Δ`) and coefficient phases are multiplied by `Δ`.
pub fn phase_vocoder(s: &Signal, frame: &dyn Frame, delta: u32, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    if delta == 0 {
        return Err(invalid("stretch factor must be a positive integer"));
    }
    if !s.is_real(0.0) {
        return Err(invalid("the phase vocoder expects a real input signal"));
    }
    let cfg = PipelineConfig { sides: Some(Sidedness::Positive), ..cfg.clone() };
    let op = if delta == 1 { PhaseOpSpec::Identity } else { PhaseOpSpec::Diffeo(Diffeo::time_dilation(delta as f64)?) };
    run_mc_pipeline(s, frame, &cfg, &op, &Nonlinearity::VocoderPhase(delta))
}

/// Phase-space soft thresholding.
pub fn denoise(s: &Signal, frame: &dyn Frame, lambda: f64, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    run_mc_pipeline(s, frame, cfg, &PhaseOpSpec::Identity, &Nonlinearity::SoftThreshold(lambda))
}

/// Phase-space multiplier with the given symbol.
pub fn multiply(s: &Signal, frame: &dyn Frame, symbol: Symbol, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    run_mc_pipeline(s, frame, cfg, &PhaseOpSpec::Multiplier(symbol), &Nonlinearity::Identity)
}
