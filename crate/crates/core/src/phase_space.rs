//! Finite-measure sampling domains, uniform samplers and truncation
//! (linear-volume) measurements.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::frames::{dense_analysis, DenseGrid, Frame, LtftParams, PhasePoint};
use crate::signal::Signal;
use crate::window::Window;

/// Which frequencies an LTFT domain covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    /// `ω ∈ (0, WR/2]`; real signals are recovered by taking twice the real part.
    #[default]
    Positive,
    /// `ω ∈ [−WR/2, WR/2]`.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Product of an x interval with a union of disjoint ω intervals.
    Box { x: (f64, f64), omega: Vec<(f64, f64)> },
    /// `1/(WM) < |ω| < WM`, `|x − center| < 1/2 + S/|ω|`.
    Cwt { lo: f64, hi: f64, s: f64, center: f64 },
}

/// A phase-space domain with measure `dx · dω · dμ(τ)`, where `μ` is the
/// uniform probability on `[τ₁, τ₂]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDomain {
    shape: Shape,
    tau: Option<(f64, f64)>,
    m: usize,
    w: f64,
}

impl PhaseDomain {
    /// `[x_lo, x_hi] × ⋃ omega × [τ₁, τ₂]`.
    pub fn boxed(x: (f64, f64), omega: Vec<(f64, f64)>, tau: Option<(f64, f64)>) -> Result<Self> {
        if !(x.0.is_finite() && x.1.is_finite() && x.1 > x.0) {
            return Err(invalid(format!("empty x range [{}, {}]", x.0, x.1)));
        }
        if omega.is_empty() || omega.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && b > a)) {
            return Err(invalid("omega ranges must be finite, non-empty intervals"));
        }
        let mut sorted = omega;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sorted.windows(2).any(|p| p[1].0 < p[0].1) {
            return Err(invalid("omega ranges overlap"));
        }
        if let Some((t1, t2)) = tau {
            if !(t1 > 0.0 && t2 >= t1 && t2.is_finite()) {
                return Err(invalid("tau range must satisfy 0 < tau1 <= tau2"));
            }
        }
        Ok(Self { shape: Shape::Box { x, omega: sorted }, tau, m: 0, w: 0.0 })
    }

    /// Resolution metadata `(M, W)` carried into reports.
    pub fn with_resolution(mut self, m: usize, w: f64) -> Self {
        self.m = m;
        self.w = w;
        self
    }

    pub fn resolution(&self) -> (usize, f64) {
        (self.m, self.w)
    }

    pub fn tau_range(&self) -> Option<(f64, f64)> {
        self.tau
    }

    pub fn is_cwt(&self) -> bool {
        matches!(self.shape, Shape::Cwt { .. })
    }

    /// Disjoint ω intervals covered by the domain, ascending.
    pub fn omega_intervals(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            Shape::Box { omega, .. } => omega.clone(),
            Shape::Cwt { lo, hi, .. } => vec![(-hi, -lo), (*lo, *hi)],
        }
    }

    /// The x interval at frequency `omega` (None outside the ω range).
    pub fn x_range(&self, omega: f64) -> Option<(f64, f64)> {
        if !self.omega_contains(omega) {
            return None;
        }
        match &self.shape {
            Shape::Box { x, .. } => Some(*x),
            Shape::Cwt { s, center, .. } => {
                let half = 0.5 + s / omega.abs();
                Some((center - half, center + half))
            }
        }
    }

    fn omega_contains(&self, omega: f64) -> bool {
        match &self.shape {
            Shape::Box { omega: iv, .. } => iv.iter().any(|&(a, b)| omega >= a && omega <= b),
            Shape::Cwt { lo, hi, .. } => {
                let w = omega.abs();
                w > *lo && w < *hi
            }
        }
    }

    pub fn contains(&self, p: &PhasePoint) -> bool {
        if let Some((t1, t2)) = self.tau {
            if p.tau < t1 || p.tau > t2 {
                return false;
            }
        }
        match self.x_range(p.omega) {
            Some((a, b)) => p.x >= a && p.x <= b,
            None => false,
        }
    }

    /// `μ(G)` (τ has unit mass).
    pub fn measure(&self) -> f64 {
        match &self.shape {
            Shape::Box { x, omega } => (x.1 - x.0) * omega.iter().map(|(a, b)| b - a).sum::<f64>(),
            Shape::Cwt { lo, hi, s, .. } => 2.0 * ((hi - lo) + 2.0 * s * (hi / lo).ln()),
        }
    }

    /// Translates the domain in time.
    pub fn shifted(&self, dx: f64) -> Self {
        let shape = match &self.shape {
            Shape::Box { x, omega } => Shape::Box { x: (x.0 + dx, x.1 + dx), omega: omega.clone() },
            Shape::Cwt { lo, hi, s, center } => Shape::Cwt { lo: *lo, hi: *hi, s: *s, center: center + dx },
        };
        Self { shape, ..self.clone() }
    }

    /// Shrinks the frequency extent by `factor` (ω intervals scaled toward
    /// zero; for CWT domains both ends move toward `|ω| = 1`).
    pub fn shrunk(&self, factor: f64) -> Self {
        let shape = match &self.shape {
            Shape::Box { x, omega } => Shape::Box {
                x: *x,
                omega: omega.iter().map(|&(a, b)| (a / factor, b / factor)).collect(),
            },
            Shape::Cwt { lo, hi, s, center } => Shape::Cwt { lo: lo * factor, hi: hi / factor, s: *s, center: *center },
        };
        Self { shape, ..self.clone() }
    }

    /// Lower bound of |ω| over the domain, if positive.
    pub fn min_abs_omega(&self) -> f64 {
        self.omega_intervals()
            .iter()
            .map(|&(a, b)| if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) })
            .fold(f64::INFINITY, f64::min)
    }
}

/// The LTFT domain for a signal with `M` intervals at rate `R`, centered at 0:
/// `x ∈ [−M/(2R) − τ₂/a_{τ₂}, M/(2R) + τ₂/a_{τ₂}]`, ω up to `WR/2`.
pub fn ltft_domain(m: usize, rate: f64, w: f64, params: &LtftParams, sides: Sidedness) -> Result<PhaseDomain> {
    if m == 0 || !(rate > 0.0 && rate.is_finite()) {
        return Err(invalid("ltft_domain needs M >= 1 and R > 0"));
    }
    if !(w >= 1.0 && w.is_finite()) {
        return Err(invalid(format!("W must be at least 1, got {w}")));
    }
    params.validate()?;
    let half = m as f64 / (2.0 * rate) + params.max_support();
    let top = 0.5 * w * rate;
    let omega = match sides {
        Sidedness::Positive => vec![(0.0, top)],
        Sidedness::TwoSided => vec![(-top, top)],
    };
    Ok(PhaseDomain::boxed((-half, half), omega, Some((params.tau_min, params.tau_max)))?.with_resolution(m, w))
}

/// The CWT domain `1/(WM) < |ω| < WM`, `|x| < 1/2 + S/|ω|` for signals on
/// `[−1/2, 1/2]`.
pub fn cwt_domain(m: usize, w: f64, s: f64) -> Result<PhaseDomain> {
    if m == 0 || !(w > 0.0 && w.is_finite()) || !(s > 0.0 && s.is_finite()) {
        return Err(invalid("cwt_domain needs M >= 1, W > 0 and S > 0"));
    }
    let hi = w * m as f64;
    let lo = 1.0 / hi;
    if hi <= lo {
        return Err(invalid("cwt_domain is empty: need W·M > 1"));
    }
    Ok(PhaseDomain { shape: Shape::Cwt { lo, hi, s, center: 0.0 }, tau: None, m, w })
}

/// Closed-form `μ` of [`cwt_domain`].
pub fn cwt_measure(m: usize, w: f64, s: f64) -> f64 {
    let wm = w * m as f64;
    2.0 * (wm - 1.0 / wm) + 4.0 * s * (wm * wm).ln()
}

/// Smallest `M₀ ≤ max_m` with `μ(cwt_domain(M, W, S)) ≤ 3WM` for every
/// `M₀ ≤ M ≤ max_m`.
pub fn cwt_volume_threshold(w: f64, s: f64, max_m: usize) -> Option<usize> {
    let mut m0 = None;
    for m in (1..=max_m).rev() {
        if cwt_measure(m, w, s) <= 3.0 * w * m as f64 {
            m0 = Some(m);
        } else {
            break;
        }
    }
    m0
}

/// `K` i.i.d. points, uniform with respect to the domain measure.
pub fn sample_uniform(domain: &PhaseDomain, k: usize, seed: u64) -> Result<Vec<PhasePoint>> {
    if k == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_tau = |rng: &mut ChaCha8Rng| match domain.tau {
        Some((t1, t2)) if t2 > t1 => rng.gen_range(t1..=t2),
        Some((t1, _)) => t1,
        None => 1.0,
    };
    let mut out = Vec::with_capacity(k);
    match &domain.shape {
        Shape::Box { x, omega } => {
            let lengths: Vec<f64> = omega.iter().map(|(a, b)| b - a).collect();
            let total: f64 = lengths.iter().sum();
            for _ in 0..k {
                let mut u = rng.gen_range(0.0..total);
                let mut iv = omega[omega.len() - 1];
                for (j, &len) in lengths.iter().enumerate() {
                    if u < len {
                        iv = omega[j];
                        break;
                    }
                    u -= len;
                }
                // (a, b] so that a positive domain starting at 0 never yields ω = 0
                let om = iv.1 - rng.gen_range(0.0..1.0) * (iv.1 - iv.0);
                let xx = rng.gen_range(x.0..=x.1);
                let tau = draw_tau(&mut rng);
                out.push(PhasePoint::new(xx, om, tau));
            }
        }
        Shape::Cwt { lo, hi, s, center } => {
            // marginal density of |ω| is ∝ 1 + 2S/|ω|
            let cdf = |w: f64| (w - lo) + 2.0 * s * (w / lo).ln();
            let total = cdf(*hi);
            for _ in 0..k {
                let target = rng.gen_range(0.0..1.0) * total;
                let (mut a, mut b) = (*lo, *hi);
                let mut w = a + target.min(b - a);
                for _ in 0..100 {
                    let f = cdf(w) - target;
                    if f > 0.0 {
                        b = w;
                    } else {
                        a = w;
                    }
                    let newton = w - f / (1.0 + 2.0 * s / w);
                    w = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
                    if (b - a) < 1e-14 * b || f.abs() < 1e-13 * total {
                        break;
                    }
                }
                let w = w.clamp(*lo, *hi);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let half = 0.5 + s / w;
                let xx = center + rng.gen_range(-half..=half);
                out.push(PhasePoint::new(xx, sign * w, draw_tau(&mut rng)));
            }
        }
    }
    Ok(out)
}

/// Linear-volume / truncation measurement for one signal and domain.
#[derive(Debug, Clone, PartialEq)]
pub struct LvdReport {
    pub m: usize,
    pub w: f64,
    /// `‖ψ_M‖₁ = μ(G_M)`.
    pub psi_l1: f64,
    /// `‖ψ_M‖₁ / M`.
    pub ratio_cv: f64,
    /// `‖V s − ψ V s‖ / ‖V s‖`, including the projected energy beyond the
    /// reference domain.
    pub trunc_error: f64,
    /// Energy in the outer frequency shell of the reference (outside the
    /// reference shrunk by 2) divided by the truncated energy.
    pub tail_fraction: f64,
    /// Energy projected beyond the reference divided by the truncated energy.
    pub beyond_fraction: f64,
    pub total_energy: f64,
    pub truncated_energy: f64,
}

impl LvdReport {
    pub const CSV_HEADER: &'static str = "M,W,psi_l1,ratio_Cv,trunc_error";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:.6},{:.6},{:.6e}", self.m, self.w, self.psi_l1, self.ratio_cv, self.trunc_error)
    }
}

/// Largest share of the truncated energy that may lie beyond the reference.
pub const REFERENCE_TAIL_LIMIT: f64 = 0.1;

/// Measures `‖V s − 1_G V s‖ / ‖V s‖`, approximating the full phase space by
/// `reference` (which must contain `domain`). Both norms come from one dense
/// grid over the reference domain.
///
/// The energy beyond the reference is projected from the two outermost
/// frequency shells (reference minus its 2× shrink, and that minus its 2×
/// shrink), assuming the shell energies keep shrinking geometrically. The
/// projection is added to the truncated energy, and the reference is rejected
/// when it exceeds [`REFERENCE_TAIL_LIMIT`] of the truncated energy.
pub fn truncation_ratio(
    frame: &dyn Frame,
    s: &Signal,
    domain: &PhaseDomain,
    reference: &PhaseDomain,
    grid: &DenseGrid,
) -> Result<LvdReport> {
    let report = measure_truncation(frame, s, domain, reference, grid)?;
    if report.beyond_fraction > REFERENCE_TAIL_LIMIT {
        return Err(Error::ReferenceTooSmall {
            tail: report.beyond_fraction * report.truncated_energy,
            truncated: report.truncated_energy,
        });
    }
    Ok(report)
}

/// [`truncation_ratio`] without the reference-size check.
pub fn measure_truncation(
    frame: &dyn Frame,
    s: &Signal,
    domain: &PhaseDomain,
    reference: &PhaseDomain,
    grid: &DenseGrid,
) -> Result<LvdReport> {
    let coeffs = dense_analysis(frame, s, reference, grid)?;
    let half = reference.shrunk(2.0);
    let quarter = reference.shrunk(4.0);
    let (mut total, mut outside, mut outer, mut inner) = (0.0, 0.0, 0.0, 0.0);
    for slice in &coeffs.slices {
        for ((&x, &wx), c) in slice.xs.iter().zip(&slice.x_weights).zip(&slice.coeffs) {
            let e = slice.weight * wx * c.norm_sqr();
            let p = PhasePoint::new(x, slice.omega, slice.tau);
            total += e;
            if !domain.contains(&p) {
                outside += e;
            }
            if !half.contains(&p) {
                outer += e;
            } else if !quarter.contains(&p) {
                inner += e;
            }
        }
    }
    if !(total > 0.0) {
        return Err(Error::Degenerate("signal has no coefficient energy".into()));
    }
    let negligible = 1e-14 * total;
    let beyond = if outer <= negligible {
        0.0
    } else if inner > outer {
        let q = outer / inner;
        outer * q / (1.0 - q)
    } else {
        f64::INFINITY
    };
    let relative = |e: f64| if e <= negligible { 0.0 } else if outside > 0.0 { e / outside } else { f64::INFINITY };
    let (m, w) = domain.resolution();
    let m = if m == 0 { s.len().saturating_sub(1) } else { m };
    let psi_l1 = domain.measure();
    let trunc = if beyond.is_finite() { (outside + beyond) / (total + beyond) } else { 1.0 };
    Ok(LvdReport {
        m,
        w,
        psi_l1,
        ratio_cv: psi_l1 / m.max(1) as f64,
        trunc_error: trunc.sqrt().min(1.0),
        tail_fraction: relative(outer),
        beyond_fraction: relative(beyond),
        total_energy: total,
        truncated_energy: outside,
    })
}

/// Class parameters for enveloped trigonometric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtClassParams {
    pub xi: Window,
    pub c: f64,
    pub m: usize,
}

impl Default for CwtClassParams {
    fn default() -> Self {
        Self { xi: Window::Hann, c: 100.0, m: 16 }
    }
}

/// `q(t) = ξ(t) Σ_{|k|≤M} c_k e^{2πikt}` sampled at `t = −1/2 + n/rate`,
/// `n = 0..=rate`.
pub fn enveloped_trig_poly(coeffs: &[Complex64], xi: &Window, rate: usize) -> Result<Signal> {
    if coeffs.len().is_multiple_of(2) {
        return Err(invalid("enveloped_trig_poly needs 2M+1 coefficients"));
    }
    if rate < 2 {
        return Err(invalid("rate must be at least 2"));
    }
    let m = (coeffs.len() / 2) as i64;
    let samples = (0..=rate)
        .map(|n| {
            let t = -0.5 + n as f64 / rate as f64;
            let p: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * Complex64::from_polar(1.0, 2.0 * PI * (j as i64 - m) as f64 * t))
                .sum();
            p * xi.eval(t)
        })
        .collect();
    Signal::new(samples, rate as f64, -0.5)
}

/// Outcome of the class membership check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcMembership {
    pub member: bool,
    /// `‖ξ⁻¹q‖_∞ / ‖q‖_∞`.
    pub envelope_ratio: f64,
    /// `‖q‖_∞ / ‖q‖₂`.
    pub flatness: f64,
}

/// Checks `‖ξ⁻¹q‖_∞ < C‖q‖_∞` and `‖q‖_∞ < C‖q‖₂` on the sample grid,
/// skipping samples where `ξ = 0`.
pub fn rc_membership(s: &Signal, xi: &Window, c: f64) -> RcMembership {
    let mut sup_q: f64 = 0.0;
    let mut sup_ratio: f64 = 0.0;
    for (i, v) in s.samples().iter().enumerate() {
        let t = s.time(i);
        sup_q = sup_q.max(v.norm());
        let e = xi.eval(t);
        if e > 0.0 {
            sup_ratio = sup_ratio.max(v.norm() / e);
        }
    }
    let l2 = s.norm();
    let envelope_ratio = if sup_q > 0.0 { sup_ratio / sup_q } else { 0.0 };
    let flatness = if l2 > 0.0 { sup_q / l2 } else { f64::INFINITY };
    RcMembership { member: sup_q > 0.0 && sup_ratio < c * sup_q && sup_q < c * l2, envelope_ratio, flatness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Transition;

    #[test]
    fn ltft_box_arithmetic() {
        // τ₂/a = 1
        let p = LtftParams::new(3.0, 8.0, Transition::Constant { a: 8.0, b: 400.0 }, Window::Hann).unwrap();
        let d = ltft_domain(1024, 1024.0, 1.0, &p, Sidedness::Positive).unwrap();
        assert!((d.measure() - 1536.0).abs() < 1e-9);
        assert!(ltft_domain(1024, 1024.0, 0.5, &p, Sidedness::Positive).is_err());
        let two = ltft_domain(1024, 1024.0, 1.0, &p, Sidedness::TwoSided).unwrap();
        assert!((two.measure() - 3072.0).abs() < 1e-9);
    }

    #[test]
    fn cwt_measure_closed_form() {
        let d = cwt_domain(256, 2.0, 0.5).unwrap();
        assert!((d.measure() - cwt_measure(256, 2.0, 0.5)).abs() < 1e-9);
        assert!(d.measure() <= 1536.0);
        assert!(cwt_domain(1, 2.0, 0.5).unwrap().measure() > 0.0);
        let tiny = cwt_measure(256, 2.0, 1e-12);
        assert!((tiny - 2.0 * (512.0 - 1.0 / 512.0)).abs() < 1e-6);
    }

    #[test]
    fn volume_threshold_is_reported() {
        let m0 = cwt_volume_threshold(2.0, 0.5, 4096).unwrap();
        assert!(cwt_measure(m0, 2.0, 0.5) <= 6.0 * m0 as f64);
        if m0 > 1 {
            assert!(cwt_measure(m0 - 1, 2.0, 0.5) > 6.0 * (m0 - 1) as f64);
        }
    }

    #[test]
    fn samples_are_inside_and_reproducible() {
        let d = cwt_domain(64, 2.0, 0.5).unwrap();
        let a = sample_uniform(&d, 5000, 9).unwrap();
        let b = sample_uniform(&d, 5000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| d.contains(p)));
        assert!(sample_uniform(&d, 0, 1).is_err());
    }

    #[test]
    fn trig_poly_constant_term_is_envelope() {
        let mut c = vec![Complex64::new(0.0, 0.0); 7];
        c[3] = Complex64::new(1.0, 0.0);
        let s = enveloped_trig_poly(&c, &Window::Hann, 64).unwrap();
        for (i, v) in s.samples().iter().enumerate() {
            assert!((v.re - Window::Hann.eval(s.time(i))).abs() < 1e-14);
        }
        let r = rc_membership(&s, &Window::Hann, 10.0);
        assert!((r.envelope_ratio - 1.0).abs() < 1e-12);
        assert!(r.member);
    }
}
