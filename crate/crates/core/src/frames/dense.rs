//! Deterministic quadrature oracles for the analysis operator `V_f` and the
//! synthesis operator `V_f*` over a finite phase-space domain.
//!
//! The domain is cut into slices of fixed `(ω, τ)`. ω nodes are
//! Gauss-Legendre panels between the frame's breakpoints, uniform in ω where
//! the atom bandwidth is constant and uniform in `ln|ω|` where it scales with
//! `|ω|`. Along x each slice uses the trapezoid rule with a step matched to
//! the bandwidth of the coefficient function, which is spectrally accurate
//! because coefficients vanish at both ends of the range.
//!
//! Atoms whose spectrum reaches past the Nyquist frequency are evaluated on
//! an upsampled copy of the signal (`Oversample::Auto`), and their synthesis
//! is accumulated at the higher rate and decimated afterwards.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Frame, PhasePoint};
use crate::error::{invalid, Result};
use crate::phase_space::PhaseDomain;
use crate::quad::{trapezoid_nodes, GaussLegendre};
use crate::signal::Signal;

/// Spectral half-width of an atom in units of its scale beyond which the
/// window spectrum is negligible.
const ATOM_BAND: f64 = 8.0;
const OMEGA_PANEL_NODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Oversample {
    /// Evaluate every atom on the signal's own grid.
    Native,
    /// Upsample per slice so that each atom's spectrum fits below Nyquist.
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrid {
    /// ω nodes per unit of the frame's frequency resolution.
    pub omega_density: f64,
    /// x step is `1 / min(R, x_bandwidth · scale)`.
    pub x_bandwidth: f64,
    /// Gauss-Legendre nodes over τ.
    pub tau_nodes: usize,
    pub oversample: Oversample,
    /// Slices whose energy bound is below `prune_rel · ‖s‖²` are skipped
    /// (0 disables pruning).
    pub prune_rel: f64,
}

impl Default for DenseGrid {
    fn default() -> Self {
        Self { omega_density: 3.0, x_bandwidth: 24.0, tau_nodes: 6, oversample: Oversample::Auto, prune_rel: 1e-13 }
    }
}

impl DenseGrid {
    /// Doubles every resolution.
    pub fn refined(&self) -> Self {
        Self {
            omega_density: 2.0 * self.omega_density,
            x_bandwidth: 2.0 * self.x_bandwidth,
            tau_nodes: 2 * self.tau_nodes,
            ..self.clone()
        }
    }

    pub fn native(mut self) -> Self {
        self.oversample = Oversample::Native;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega_density >= 0.5 && self.x_bandwidth >= 2.0 && self.tau_nodes >= 1) {
            return Err(invalid("dense grid needs omega_density >= 0.5, x_bandwidth >= 2 and tau_nodes >= 1"));
        }
        Ok(())
    }
}

/// Coefficients on one `(ω, τ)` slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSlice {
    pub omega: f64,
    pub tau: f64,
    /// ω weight times τ weight.
    pub weight: f64,
    pub upsample: usize,
    pub xs: Vec<f64>,
    pub x_weights: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl DenseSlice {
    pub fn point(&self, i: usize) -> PhasePoint {
        PhasePoint::new(self.xs[i], self.omega, self.tau)
    }
}

/// Sampled coefficient function `V_f[s]` over a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientGrid {
    pub slices: Vec<DenseSlice>,
    /// Rate of the analyzed signal.
    pub rate: f64,
}

impl CoefficientGrid {
    /// `∫ |V|²` by the grid's quadrature.
    pub fn energy(&self) -> f64 {
        self.slices
            .iter()
            .map(|s| s.weight * s.x_weights.iter().zip(&s.coeffs).map(|(w, c)| w * c.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Pointwise map of the coefficients.
    pub fn map<F: Fn(&PhasePoint, Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        let slices = self
            .slices
            .par_iter()
            .map(|s| {
                let coeffs = s.coeffs.iter().enumerate().map(|(i, &c)| f(&s.point(i), c)).collect();
                DenseSlice { coeffs, ..s.clone() }
            })
            .collect();
        Self { slices, rate: self.rate }
    }

    pub fn node_count(&self) -> usize {
        self.slices.iter().map(|s| s.xs.len()).sum()
    }

    /// Same nodes, zero coefficients.
    pub fn zeroed(&self) -> Self {
        self.map(|_, _| Complex64::new(0.0, 0.0))
    }
}

/// ω nodes with weights over `[lo, hi]` for one τ.
fn omega_nodes(frame: &dyn Frame, lo: f64, hi: f64, tau: f64, density: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo, hi];
    cuts.extend(frame.breakpoints(tau).into_iter().filter(|&b| b > lo && b < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let gl = GaussLegendre::new(OMEGA_PANEL_NODES);
    let mut out = Vec::new();
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let ra = frame.omega_resolution(a, tau);
        let rb = frame.omega_resolution(b, tau);
        let proportional = a * b > 0.0 && (ra - rb).abs() > 1e-9 * ra.max(rb);
        if proportional {
            // resolution ∝ |ω|: uniform panels in v = ln|ω|
            let sign = a.signum();
            let (la, lb) = (a.abs().ln(), b.abs().ln());
            let (v0, v1) = (la.min(lb), la.max(lb));
            let per_v = frame.omega_resolution(sign * v0.exp(), tau) / v0.exp();
            let panels = (((v1 - v0) * density / per_v) / OMEGA_PANEL_NODES as f64).ceil().max(1.0) as usize;
            let h = (v1 - v0) / panels as f64;
            for p in 0..panels {
                for (v, w) in gl.on(v0 + p as f64 * h, v0 + (p + 1) as f64 * h) {
                    let om = v.exp();
                    out.push((sign * om, w * om));
                }
            }
        } else {
            let res = ra.min(rb);
            let panels = (((b - a) * density / res) / OMEGA_PANEL_NODES as f64).ceil().max(1.0) as usize;
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                out.extend(gl.on(a + p as f64 * h, a + (p + 1) as f64 * h));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

fn tau_nodes(domain: &PhaseDomain, n: usize) -> Vec<(f64, f64)> {
    match domain.tau_range() {
        Some((t1, t2)) if t2 > t1 => {
            GaussLegendre::new(n).on(t1, t2).map(|(t, w)| (t, w / (t2 - t1))).collect()
        }
        Some((t1, _)) => vec![(t1, 1.0)],
        None => vec![(1.0, 1.0)],
    }
}

struct SliceSpec {
    omega: f64,
    tau: f64,
    weight: f64,
}

/// `V_f[s]` on a quadrature grid over `domain`.
pub fn dense_analysis(frame: &dyn Frame, s: &Signal, domain: &PhaseDomain, grid: &DenseGrid) -> Result<CoefficientGrid> {
    grid.validate()?;
    if !(domain.measure() > 0.0) {
        return Err(invalid("dense analysis needs a domain of positive measure"));
    }
    let rate = s.rate();
    let specs: Vec<SliceSpec> = tau_nodes(domain, grid.tau_nodes)
        .into_iter()
        .flat_map(|(tau, wt)| {
            domain.omega_intervals().into_iter().flat_map(move |(lo, hi)| {
                omega_nodes(frame, lo, hi, tau, grid.omega_density)
                    .into_iter()
                    .map(move |(omega, wo)| SliceSpec { omega, tau, weight: wo * wt })
            })
        })
        .collect();

    let energy = s.energy();
    let spectrum = s.dft();
    let bins: Vec<(f64, f64)> = {
        let max = spectrum.bins().iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        (0..spectrum.len())
            .filter(|&j| spectrum.bins()[j].norm_sqr() > 1e-24 * max)
            .map(|j| (spectrum.freq(j), spectrum.bins()[j].norm_sqr() * spectrum.bin_hz()))
            .collect()
    };
    let (t_first, t_last) = (s.origin(), s.end());

    // upsampled copies, created on demand
    let factor_of = |scale: f64, freq: f64, dc: bool| -> usize {
        match grid.oversample {
            Oversample::Native => 1,
            Oversample::Auto => {
                let reach = if dc { freq.abs().max(0.0) } else { freq.abs() } + ATOM_BAND * scale;
                ((reach / (0.5 * rate)).ceil() as usize).clamp(1, 64)
            }
        }
    };
    let mut factors = Vec::with_capacity(specs.len());
    for sp in &specs {
        let a = frame.atom(&PhasePoint::new(0.0, sp.omega, sp.tau))?;
        factors.push(factor_of(a.scale, a.freq, a.dc != 0.0));
    }
    let mut upsampled: BTreeMap<usize, Signal> = BTreeMap::new();
    for &u in &factors {
        upsampled.entry(u).or_insert_with(|| s.upsample(u));
    }

    let slices: Vec<Option<DenseSlice>> = specs
        .par_iter()
        .zip(&factors)
        .map(|(sp, &u)| -> Result<Option<DenseSlice>> {
            let atom0 = frame.atom(&PhasePoint::new(0.0, sp.omega, sp.tau))?;
            if grid.prune_rel > 0.0 && energy > 0.0 {
                let bound: f64 = bins.iter().map(|&(z, e)| e * atom0.ft(z).norm_sqr()).sum();
                if bound < grid.prune_rel * energy {
                    return Ok(None);
                }
            }
            let Some((xlo, xhi)) = domain.x_range(sp.omega) else {
                return Ok(None);
            };
            let hw = atom0.half_width();
            let (lo, hi) = (xlo.max(t_first - hw), xhi.min(t_last + hw));
            if hi <= lo {
                return Ok(None);
            }
            let step = 1.0 / rate.min(grid.x_bandwidth * atom0.scale);
            let nodes = trapezoid_nodes(lo, hi, step);
            let src = &upsampled[&u];
            let mut atom = atom0;
            let mut coeffs = Vec::with_capacity(nodes.len());
            for &(x, _) in &nodes {
                atom.center = x;
                coeffs.push(atom.analyze(src).0);
            }
            Ok(Some(DenseSlice {
                omega: sp.omega,
                tau: sp.tau,
                weight: sp.weight,
                upsample: u,
                xs: nodes.iter().map(|n| n.0).collect(),
                x_weights: nodes.iter().map(|n| n.1).collect(),
                coeffs,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(CoefficientGrid { slices: slices.into_iter().flatten().collect(), rate })
}

/// `V_f* F ≈ ∫ F(g) f_g dg` on the lattice of `template`.
///
/// The output is circular on the template grid, so the template should
/// extend past the support of every atom that carries weight.
pub fn dense_synthesis(frame: &dyn Frame, coeffs: &CoefficientGrid, template: &Signal) -> Result<Signal> {
    if (template.rate() - coeffs.rate).abs() > 1e-9 * coeffs.rate {
        return Err(invalid("synthesis template rate differs from the analysis rate"));
    }
    const CHUNK: usize = 32;
    let n = template.len();
    let origin = template.origin();
    let rate = template.rate();
    let partials: Vec<BTreeMap<usize, Vec<Complex64>>> = coeffs
        .slices
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<BTreeMap<usize, Vec<Complex64>>> {
            let mut bufs: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
            for sl in chunk {
                let u = sl.upsample;
                let buf = bufs.entry(u).or_insert_with(|| vec![Complex64::new(0.0, 0.0); n * u]);
                let mut atom = frame.atom(&PhasePoint::new(0.0, sl.omega, sl.tau))?;
                for ((&x, &wx), &c) in sl.xs.iter().zip(&sl.x_weights).zip(&sl.coeffs) {
                    atom.center = x;
                    atom.synthesize_into(buf, origin, rate * u as f64, c * (wx * sl.weight));
                }
            }
            Ok(bufs)
        })
        .collect::<Result<_>>()?;
    let mut merged: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    for part in partials {
        for (u, buf) in part {
            match merged.get_mut(&u) {
                Some(acc) => acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b),
                None => {
                    merged.insert(u, buf);
                }
            }
        }
    }
    let mut out = template.zeros_like();
    for (u, buf) in merged {
        let hi = Signal::new(buf, rate * u as f64, origin)?;
        let lo = hi.downsample(u)?;
        out.samples_mut().iter_mut().zip(lo.samples()).for_each(|(a, b)| *a += b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::StftFrame;
    use crate::window::Window;

    #[test]
    fn zero_coefficients_synthesize_zero() {
        let frame = StftFrame::new(Window::Hann, 0.1).unwrap();
        let s = crate::signal::bandlimited_signal(64, 64.0, 8.0, 3, false, 1).unwrap().padded(16, 16);
        let dom = PhaseDomain::boxed((-1.0, 1.0), vec![(-32.0, 32.0)], None).unwrap();
        let grid = dense_analysis(&frame, &s, &dom, &DenseGrid::default()).unwrap().zeroed();
        let out = dense_synthesis(&frame, &grid, &s).unwrap();
        assert!(out.samples().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn omega_nodes_integrate_length() {
        let frame = crate::frames::LtftFrame::with_filter(
            crate::frames::LtftParams::default_for_rate(128.0),
            crate::frames::FrameFilter::constant(&crate::frames::LtftParams::default_for_rate(128.0), 1.0, 64.0),
        )
        .unwrap();
        let nodes = omega_nodes(&frame, -64.0, 64.0, 4.0, 2.0);
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((total - 128.0).abs() < 1e-9);
        let first: f64 = nodes.iter().map(|n| n.0 * n.1).sum();
        assert!(first.abs() < 1e-8);
    }

    #[test]
    fn empty_domain_rejected() {
        assert!(PhaseDomain::boxed((0.0, 0.0), vec![(0.0, 1.0)], None).is_err());
    }
}
