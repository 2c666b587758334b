use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::frames::{LtftParams, PhasePoint, Transition};

/// Predicted and measured per-sample work of the stochastic LTFT pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct OpCount {
    /// `2τ₀ZM(1 + (1−β)/β + ln(β/α))`.
    pub predicted: f64,
    /// Mean over seeds of the summed analysis plus synthesis support samples.
    pub measured: f64,
    pub measured_std: f64,
    /// `measured / predicted`.
    pub ratio: f64,
    /// Two length-M FFTs at `5N log₂N` each, excluded from the counts above.
    pub fft_term: f64,
    pub samples: usize,
    pub seeds: usize,
}

fn alpha_beta(params: &LtftParams, rate: f64) -> Result<(f64, f64)> {
    match params.transition {
        Transition::Constant { a, b } if b < rate => Ok((a / rate, b / rate)),
        Transition::Constant { .. } => Err(invalid("work model needs b < R")),
        Transition::SupportPinned { .. } => Err(invalid("work model needs constant transition frequencies")),
    }
}

/// `2τ₀ZM(1 + (1−β)/β + ln(β/α))` with `a = αR`, `b = βR` and `τ₀` the mean
/// of τ.
pub fn predicted_work(params: &LtftParams, rate: f64, m: usize, z: f64) -> Result<f64> {
    let (alpha, beta) = alpha_beta(params, rate)?;
    let tau0 = 0.5 * (params.tau_min + params.tau_max);
    Ok(2.0 * tau0 * z * m as f64 * (1.0 + (1.0 - beta) / beta + (beta / alpha).ln()))
}

/// Counts atom support samples for `K = ZM` points drawn uniformly from
/// `x ∈ [−M/2R, M/2R]`, `ω ∈ (0, R]`, τ uniform, once per seed. Each point
/// costs one analysis and one synthesis pass over its support.
pub fn op_count(params: &LtftParams, rate: f64, m: usize, z: f64, seeds: &[u64]) -> Result<OpCount> {
    params.validate()?;
    if m == 0 || seeds.is_empty() || !(z > 0.0) {
        return Err(invalid("op_count needs M >= 1, Z > 0 and at least one seed"));
    }
    let predicted = predicted_work(params, rate, m, z)?;
    let k = (z * m as f64).ceil() as usize;
    let half = m as f64 / (2.0 * rate);
    let counts: Vec<f64> = seeds
        .iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut total = 0u64;
            for _ in 0..k {
                let x = rng.gen_range(-half..=half);
                let omega = rate - rng.gen_range(0.0..1.0) * rate;
                let tau = rng.gen_range(params.tau_min..=params.tau_max);
                total += 2 * params.atom(&PhasePoint::new(x, omega, tau)).support_samples(rate) as u64;
            }
            total as f64
        })
        .collect();
    let n = counts.len() as f64;
    let measured = counts.iter().sum::<f64>() / n;
    let var = if counts.len() > 1 {
        counts.iter().map(|c| (c - measured).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mf = m as f64;
    Ok(OpCount {
        predicted,
        measured,
        measured_std: var.sqrt(),
        ratio: measured / predicted,
        fft_term: 2.0 * 5.0 * mf * mf.log2(),
        samples: k,
        seeds: seeds.len(),
    })
}
