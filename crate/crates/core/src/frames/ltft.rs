use num_complex::Complex64;

use super::{Atom, Band, Frame, FrameFilter, PhasePoint, QuadratureConfig};
use crate::error::{invalid, Result};
use crate::signal::Signal;
use crate::window::Window;

/// How the transition frequencies `a_τ < b_τ` depend on τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transition {
    /// `a_τ = a`, `b_τ = b` (Hz).
    Constant { a: f64, b: f64 },
    /// `a_τ = 2τ/J₁`, `b_τ = 2τ/J₂`, pinning the support length of the
    /// low and high band atoms.
    SupportPinned { j1: f64, j2: f64 },
}

/// Hann LTFT parameters with transition frequencies given as fractions of
/// the sample rate, so one shape serves every rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameShape {
    pub tau_min: f64,
    pub tau_max: f64,
    /// `a / R`.
    pub a: f64,
    /// `b / R`; the high band needs `b < R`.
    pub b: f64,
}

impl Default for FrameShape {
    fn default() -> Self {
        Self { tau_min: 3.0, tau_max: 8.0, a: 0.05, b: 0.4 }
    }
}

impl FrameShape {
    pub fn validate(&self) -> Result<()> {
        self.at_rate(1.0).map(|_| ())
    }

    pub fn at_rate(&self, rate: f64) -> Result<LtftParams> {
        if !(self.b < 1.0) {
            return Err(invalid(format!("b must be below the sample rate, got b = {}R", self.b)));
        }
        LtftParams::new(
            self.tau_min,
            self.tau_max,
            Transition::Constant { a: self.a * rate, b: self.b * rate },
            Window::Hann,
        )
    }
}

impl std::fmt::Display for FrameShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tau=[{},{}];a={}R;b={}R", self.tau_min, self.tau_max, self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtftParams {
    pub tau_min: f64,
    pub tau_max: f64,
    pub transition: Transition,
    pub window: Window,
}

impl LtftParams {
    pub fn new(tau_min: f64, tau_max: f64, transition: Transition, window: Window) -> Result<Self> {
        let p = Self { tau_min, tau_max, transition, window };
        p.validate()?;
        Ok(p)
    }

    /// `τ ∈ [3, 8]`, `a = 0.05R`, `b = 0.4R`, Hann.
    pub fn default_for_rate(rate: f64) -> Self {
        Self {
            tau_min: 3.0,
            tau_max: 8.0,
            transition: Transition::Constant { a: 0.05 * rate, b: 0.4 * rate },
            window: Window::Hann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min.is_finite() && self.tau_min > 0.0) {
            return Err(invalid(format!("tau_min must be positive, got {}", self.tau_min)));
        }
        if !(self.tau_max.is_finite() && self.tau_max >= self.tau_min) {
            return Err(invalid(format!(
                "tau_max must be finite and >= tau_min, got [{}, {}]",
                self.tau_min, self.tau_max
            )));
        }
        match self.transition {
            Transition::Constant { a, b } => {
                if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b) {
                    return Err(invalid(format!("transition frequencies need 0 < a < b, got a={a}, b={b}")));
                }
            }
            Transition::SupportPinned { j1, j2 } => {
                if !(j1.is_finite() && j2.is_finite() && j2 > 0.0 && j1 > j2) {
                    return Err(invalid(format!("support pinning needs J1 > J2 > 0, got J1={j1}, J2={j2}")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn a_tau(&self, tau: f64) -> f64 {
        match self.transition {
            Transition::Constant { a, .. } => a,
            Transition::SupportPinned { j1, .. } => 2.0 * tau / j1,
        }
    }

    #[inline]
    pub fn b_tau(&self, tau: f64) -> f64 {
        match self.transition {
            Transition::Constant { b, .. } => b,
            Transition::SupportPinned { j2, .. } => 2.0 * tau / j2,
        }
    }

    /// Largest `b_τ` over the τ range.
    pub fn b_max(&self) -> f64 {
        self.b_tau(self.tau_max)
    }

    /// Longest support `max τ/a_τ`.
    pub fn max_support(&self) -> f64 {
        self.tau_max / self.a_tau(self.tau_max)
    }

    /// Smallest atom bandwidth `min c/τ`, attained in the low band.
    pub fn min_scale(&self) -> f64 {
        (self.a_tau(self.tau_min) / self.tau_min).min(self.a_tau(self.tau_max) / self.tau_max)
    }

    /// Canonical text used for cache keys and logs.
    pub fn key(&self) -> String {
        let tr = match self.transition {
            Transition::Constant { a, b } => format!("constant:{a:e}:{b:e}"),
            Transition::SupportPinned { j1, j2 } => format!("pinned:{j1:e}:{j2:e}"),
        };
        let win = match &self.window {
            Window::Hann => "hann".to_string(),
            Window::Table(v) => {
                let body: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
                format!("table:{}", body.join(","))
            }
        };
        format!("tau={:e}:{:e};transition={tr};window={win}", self.tau_min, self.tau_max)
    }

    /// Band scale `c` for `(ω, τ)`.
    #[inline]
    pub fn band_scale(&self, omega: f64, tau: f64) -> (Band, f64) {
        let w = omega.abs();
        let a = self.a_tau(tau);
        let b = self.b_tau(tau);
        if w < a {
            (Band::Low, a)
        } else if w <= b {
            (Band::Mid, w)
        } else {
            (Band::High, b)
        }
    }

    pub fn atom(&self, p: &PhasePoint) -> Atom {
        let (_, c) = self.band_scale(p.omega, p.tau);
        let scale = c / p.tau;
        Atom { center: p.x, scale, amp: scale.sqrt(), freq: p.omega, dc: 0.0, window: self.window.clone() }
    }
}

pub fn atom_band(omega: f64, tau: f64, params: &LtftParams) -> Band {
    params.band_scale(omega, tau).0
}

/// Support `[x − τ/(2c), x + τ/(2c)]`.
pub fn atom_support(p: &PhasePoint, params: &LtftParams) -> (f64, f64) {
    params.atom(p).support()
}

pub fn eval_ltft_atom(p: &PhasePoint, params: &LtftParams, t: f64) -> Complex64 {
    params.atom(p).eval(t)
}

/// `√(τ/c)·ŵ((τ/c)(z − ω))·e^{−2πixz}`.
pub fn eval_atom_ft(p: &PhasePoint, params: &LtftParams, z: f64) -> Complex64 {
    params.atom(p).ft(z)
}

/// The LTFT together with its frame filter.
#[derive(Debug, Clone)]
pub struct LtftFrame {
    params: LtftParams,
    filter: FrameFilter,
}

impl LtftFrame {
    /// Builds the frame filter on `[0, rate/2]` with the default quadrature.
    pub fn new(params: LtftParams, rate: f64) -> Result<Self> {
        Self::with_quadrature(params, rate, &QuadratureConfig::default())
    }

    pub fn with_quadrature(params: LtftParams, rate: f64, quad: &QuadratureConfig) -> Result<Self> {
        params.validate()?;
        let filter = FrameFilter::for_rate(&params, rate, quad)?;
        Ok(Self { params, filter })
    }

    pub fn with_filter(params: LtftParams, filter: FrameFilter) -> Result<Self> {
        params.validate()?;
        if filter.params_key() != params.key() {
            return Err(invalid("frame filter was built for different parameters"));
        }
        Ok(Self { params, filter })
    }

    pub fn params(&self) -> &LtftParams {
        &self.params
    }

    pub fn filter(&self) -> &FrameFilter {
        &self.filter
    }
}

impl Frame for LtftFrame {
    fn atom(&self, p: &PhasePoint) -> Result<Atom> {
        Ok(self.params.atom(p))
    }

    fn apply_inverse(&self, s: &Signal) -> Result<Signal> {
        self.filter.apply_inverse(s)
    }

    fn apply_frame_op(&self, s: &Signal) -> Result<Signal> {
        Ok(self.filter.apply(s))
    }

    fn omega_resolution(&self, omega: f64, tau: f64) -> f64 {
        self.params.band_scale(omega, tau).1 / tau
    }

    fn breakpoints(&self, tau: f64) -> Vec<f64> {
        let a = self.params.a_tau(tau);
        let b = self.params.b_tau(tau);
        vec![-b, -a, a, b]
    }

    fn tau_range(&self) -> Option<(f64, f64)> {
        Some((self.params.tau_min, self.params.tau_max))
    }

    fn max_support(&self) -> f64 {
        self.params.max_support()
    }

    fn label(&self) -> String {
        format!("ltft[{}]", self.params.key())
    }
}
