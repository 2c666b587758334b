use num_complex::Complex64;
use rayon::prelude::*;

use super::{sub_seed, KernelOp, Nonlinearity, Normalization, PhaseOpSpec, PipelineConfig, PipelineMode};
use crate::error::{invalid, Result};
use crate::frames::{dense_analysis, DenseGrid, Frame, PhasePoint};
use crate::phase_space::{sample_uniform, PhaseDomain, Sidedness};
use crate::signal::Signal;

/// Bounds the number of per-chunk output buffers.
const MAX_CHUNKS: usize = 64;
const MIN_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineStats {
    pub k: usize,
    pub l: usize,
    /// `μ(G)` of the sampling domain.
    pub measure: f64,
    /// `μ` of the kernel output domain (kernel pipelines only).
    pub output_measure: f64,
    pub normalization: f64,
    /// Signal samples touched by analysis inner products.
    pub analysis_work: u64,
    /// Output samples touched by atom synthesis.
    pub synthesis_work: u64,
    /// Length of the FFTs used for `S_f⁻¹`.
    pub fft_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub signal: Signal,
    pub stats: PipelineStats,
}

/// Working grids and constants shared by the Monte Carlo and dense paths.
struct Plan {
    domain: PhaseDomain,
    positive: bool,
    input: Signal,
    out_origin: f64,
    out_len: usize,
    crop: (usize, usize),
}

fn plan(s: &Signal, frame: &dyn Frame, cfg: &PipelineConfig, stretch: f64) -> Result<Plan> {
    if !(cfg.w >= 1.0 && cfg.w.is_finite()) {
        return Err(invalid(format!("W must be at least 1, got {}", cfg.w)));
    }
    let real = s.is_real(0.0);
    let positive = match cfg.sides {
        Some(Sidedness::Positive) if !real => {
            return Err(invalid("positive-frequency processing requires a real input signal"))
        }
        Some(Sidedness::Positive) => true,
        Some(Sidedness::TwoSided) => false,
        None => real,
    };
    let rate = s.rate();
    let support = frame.max_support();
    let domain = match &cfg.domain {
        Some(d) => d.clone(),
        None => {
            let top = 0.5 * cfg.w * rate;
            let omega = if positive { vec![(0.0, top)] } else { vec![(-top, top)] };
            PhaseDomain::boxed((s.origin() - support, s.end() + support), omega, frame.tau_range())?
                .with_resolution(s.len() - 1, cfg.w)
        }
    };
    let pad = (support * rate).ceil() as usize + 2;
    let input = s.padded(pad, pad);
    let nominal_len = ((s.len() - 1) as f64 * stretch).round() as usize + 1;
    let out_pad = ((stretch + 1.0) * support * rate).ceil() as usize + 2;
    let out_origin = stretch * s.origin() - out_pad as f64 / rate;
    Ok(Plan { domain, positive, input, out_origin, out_len: nominal_len + 2 * out_pad, crop: (out_pad, nominal_len) })
}

fn normalization(cfg: &PipelineConfig, domain: &PhaseDomain, count: usize) -> f64 {
    let mut c = domain.measure() / count as f64;
    if cfg.normalization == Normalization::LebesgueTau {
        if let Some((t1, t2)) = domain.tau_range() {
            c *= t2 - t1;
        }
    }
    c
}

/// Applies the post-synthesis steps: `S_f⁻¹` in analysis mode, twice the real
/// part for positive-frequency processing, and the crop to the output support.
fn finish(frame: &dyn Frame, cfg: &PipelineConfig, plan: &Plan, buf: Vec<Complex64>, rate: f64) -> Result<Signal> {
    let mut y = Signal::new(buf, rate, plan.out_origin)?;
    if cfg.mode == PipelineMode::Analysis {
        y = frame.apply_inverse(&y)?;
    }
    if plan.positive {
        y = y.twice_real();
    }
    y.crop(plan.crop.0, plan.crop.1)
}

fn prepared_input(frame: &dyn Frame, cfg: &PipelineConfig, plan: &Plan) -> Result<Signal> {
    match cfg.mode {
        PipelineMode::Synthesis => frame.apply_inverse(&plan.input),
        PipelineMode::Analysis => Ok(plan.input.clone()),
    }
}

fn stretch_of(op: &PhaseOpSpec) -> f64 {
    match op {
        PhaseOpSpec::Diffeo(d) => d.time_stretch,
        _ => 1.0,
    }
}

/// Target point, Jacobian factor and transformed coefficient for `T`.
#[inline]
fn transform(op: &PhaseOpSpec, g: &PhasePoint, v: Complex64) -> (PhasePoint, f64, Complex64) {
    match op {
        PhaseOpSpec::Identity | PhaseOpSpec::Kernel(_) => (*g, 1.0, v),
        PhaseOpSpec::Multiplier(h) => (*g, 1.0, v * h.eval(g)),
        PhaseOpSpec::Diffeo(d) => ((d.map)(g), (d.jacobian)(g), v),
    }
}

fn chunk_len(k: usize) -> usize {
    k.div_ceil(MAX_CHUNKS).max(MIN_CHUNK)
}

fn merge(parts: Vec<(Vec<Complex64>, u64, u64)>, len: usize) -> (Vec<Complex64>, u64, u64) {
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    let (mut wa, mut ws) = (0, 0);
    for (buf, a, s) in parts {
        acc.iter_mut().zip(&buf).for_each(|(x, y)| *x += y);
        wa += a;
        ws += s;
    }
    (acc, wa, ws)
}

/// Monte Carlo phase-space pipeline for pointwise operators. Kernel
/// operators are routed to [`run_kernel_pipeline`].
pub fn run_mc_pipeline(
    s: &Signal,
    frame: &dyn Frame,
    cfg: &PipelineConfig,
    op: &PhaseOpSpec,
    r: &Nonlinearity,
) -> Result<PipelineOutput> {
    if let PhaseOpSpec::Kernel(kernel) = op {
        return run_kernel_pipeline(s, frame, cfg, kernel, r);
    }
    r.validate()?;
    let plan = plan(s, frame, cfg, stretch_of(op))?;
    let measure = plan.domain.measure();
    let k = cfg.samples.resolve(measure)?;
    let c = normalization(cfg, &plan.domain, k);
    let input = prepared_input(frame, cfg, &plan)?;
    let points = sample_uniform(&plan.domain, k, cfg.seed)?;
    let rate = s.rate();

    let parts = points
        .par_chunks(chunk_len(k))
        .map(|chunk| -> Result<(Vec<Complex64>, u64, u64)> {
            let mut buf = vec![Complex64::new(0.0, 0.0); plan.out_len];
            let (mut wa, mut ws) = (0u64, 0u64);
            for g in chunk {
                let atom = frame.atom(g)?;
                let (v, n) = atom.analyze(&input);
                wa += n as u64;
                let (target, jac, tv) = transform(op, g, v);
                let coeff = r.apply(tv) * (c * jac);
                let out_atom = if target == *g { atom } else { frame.atom(&target)? };
                ws += out_atom.synthesize_into(&mut buf, plan.out_origin, rate, coeff) as u64;
            }
            Ok((buf, wa, ws))
        })
        .collect::<Result<Vec<_>>>()?;
    let (buf, analysis_work, synthesis_work) = merge(parts, plan.out_len);
    let fft_len = match cfg.mode {
        PipelineMode::Synthesis => plan.input.len(),
        PipelineMode::Analysis => plan.out_len,
    };
    let signal = finish(frame, cfg, &plan, buf, rate)?;
    Ok(PipelineOutput {
        signal,
        stats: PipelineStats {
            k,
            l: 0,
            measure,
            output_measure: 0.0,
            normalization: c,
            analysis_work,
            synthesis_work,
            fft_len,
        },
    })
}

/// Deterministic counterpart of [`run_mc_pipeline`]: the phase-space
/// integral by dense quadrature over the same domain, with atoms evaluated on
/// the signal grid exactly as the Monte Carlo path does.
pub fn dense_pipeline(
    s: &Signal,
    frame: &dyn Frame,
    cfg: &PipelineConfig,
    op: &PhaseOpSpec,
    r: &Nonlinearity,
    grid: &DenseGrid,
) -> Result<Signal> {
    if let PhaseOpSpec::Kernel(kernel) = op {
        return dense_kernel_pipeline(s, frame, cfg, kernel, r, grid);
    }
    r.validate()?;
    let plan = plan(s, frame, cfg, stretch_of(op))?;
    let input = prepared_input(frame, cfg, &plan)?;
    let grid = grid.clone().native();
    let coeffs = dense_analysis(frame, &input, &plan.domain, &grid)?;
    let rate = s.rate();
    let parts = coeffs
        .slices
        .par_chunks(16)
        .map(|chunk| -> Result<(Vec<Complex64>, u64, u64)> {
            let mut buf = vec![Complex64::new(0.0, 0.0); plan.out_len];
            for sl in chunk {
                for i in 0..sl.xs.len() {
                    let g = sl.point(i);
                    let (target, jac, tv) = transform(op, &g, sl.coeffs[i]);
                    let coeff = r.apply(tv) * (sl.weight * sl.x_weights[i] * jac);
                    frame.atom(&target)?.synthesize_into(&mut buf, plan.out_origin, rate, coeff);
                }
            }
            Ok((buf, 0, 0))
        })
        .collect::<Result<Vec<_>>>()?;
    let (buf, _, _) = merge(parts, plan.out_len);
    finish(frame, cfg, &plan, buf, rate)
}

/// Two-stage Monte Carlo kernel operator:
/// `(μ_η μ_ψ/(KL)) Σ_j Σ_k R(y_j, g_k) r(V_f[·](g_k)) f_{y_j}`.
pub fn run_kernel_pipeline(
    s: &Signal,
    frame: &dyn Frame,
    cfg: &PipelineConfig,
    kernel: &KernelOp,
    r: &Nonlinearity,
) -> Result<PipelineOutput> {
    r.validate()?;
    let l = cfg.second_stage.ok_or_else(|| invalid("kernel pipelines need a second-stage count L"))?;
    if l == 0 {
        return Err(invalid("second-stage count L must be positive"));
    }
    let plan = plan(s, frame, cfg, 1.0)?;
    let measure = plan.domain.measure();
    let k = cfg.samples.resolve(measure)?;
    let out_domain = &kernel.output_domain;
    let c = normalization(cfg, &plan.domain, k) * normalization(cfg, out_domain, l);
    let input = prepared_input(frame, cfg, &plan)?;
    let gs = sample_uniform(&plan.domain, k, cfg.seed)?;
    let ys = sample_uniform(out_domain, l, sub_seed(cfg.seed, 1))?;
    let rate = s.rate();

    let analyzed: Vec<(Complex64, u64)> = gs
        .par_iter()
        .map(|g| -> Result<(Complex64, u64)> {
            let (v, n) = frame.atom(g)?.analyze(&input);
            Ok((r.apply(v), n as u64))
        })
        .collect::<Result<_>>()?;
    let analysis_work = analyzed.iter().map(|a| a.1).sum();
    let parts = ys
        .par_chunks(chunk_len(l))
        .map(|chunk| -> Result<(Vec<Complex64>, u64, u64)> {
            let mut buf = vec![Complex64::new(0.0, 0.0); plan.out_len];
            let mut ws = 0u64;
            for y in chunk {
                let b: Complex64 = gs.iter().zip(&analyzed).map(|(g, (v, _))| (kernel.kernel)(y, g) * v).sum();
                ws += frame.atom(y)?.synthesize_into(&mut buf, plan.out_origin, rate, b * c) as u64;
            }
            Ok((buf, 0, ws))
        })
        .collect::<Result<Vec<_>>>()?;
    let (buf, _, synthesis_work) = merge(parts, plan.out_len);
    let fft_len = match cfg.mode {
        PipelineMode::Synthesis => plan.input.len(),
        PipelineMode::Analysis => plan.out_len,
    };
    let signal = finish(frame, cfg, &plan, buf, rate)?;
    Ok(PipelineOutput {
        signal,
        stats: PipelineStats {
            k,
            l,
            measure,
            output_measure: out_domain.measure(),
            normalization: c,
            analysis_work,
            synthesis_work,
            fft_len,
        },
    })
}

/// Dense double quadrature for a kernel operator (quadratic in the number of
/// grid nodes).
pub fn dense_kernel_pipeline(
    s: &Signal,
    frame: &dyn Frame,
    cfg: &PipelineConfig,
    kernel: &KernelOp,
    r: &Nonlinearity,
    grid: &DenseGrid,
) -> Result<Signal> {
    r.validate()?;
    let plan = plan(s, frame, cfg, 1.0)?;
    let input = prepared_input(frame, cfg, &plan)?;
    let grid = grid.clone().native();
    let coeffs = dense_analysis(frame, &input, &plan.domain, &grid)?;
    let mut lebesgue = 1.0;
    if cfg.normalization == Normalization::LebesgueTau {
        for d in [&plan.domain, &kernel.output_domain] {
            if let Some((t1, t2)) = d.tau_range() {
                lebesgue *= t2 - t1;
            }
        }
    }
    let src: Vec<(PhasePoint, Complex64)> = coeffs
        .slices
        .iter()
        .flat_map(|sl| (0..sl.xs.len()).map(move |i| (sl.point(i), r.apply(sl.coeffs[i]) * (sl.weight * sl.x_weights[i]))))
        .collect();
    // output nodes: the analysis grid of the output domain, coefficients unused
    let out_nodes = dense_analysis(frame, &input, &kernel.output_domain, &DenseGrid { prune_rel: 0.0, ..grid.clone() })?;
    let dst: Vec<(PhasePoint, f64)> = out_nodes
        .slices
        .iter()
        .flat_map(|sl| (0..sl.xs.len()).map(move |i| (sl.point(i), sl.weight * sl.x_weights[i])))
        .collect();
    let rate = s.rate();
    let parts = dst
        .par_chunks(64)
        .map(|chunk| -> Result<(Vec<Complex64>, u64, u64)> {
            let mut buf = vec![Complex64::new(0.0, 0.0); plan.out_len];
            for (y, wy) in chunk {
                let b: Complex64 = src.iter().map(|(g, v)| (kernel.kernel)(y, g) * v).sum();
                frame.atom(y)?.synthesize_into(&mut buf, plan.out_origin, rate, b * (wy * lebesgue));
            }
            Ok((buf, 0, 0))
        })
        .collect::<Result<Vec<_>>>()?;
    let (buf, _, _) = merge(parts, plan.out_len);
    finish(frame, cfg, &plan, buf, rate)
}
