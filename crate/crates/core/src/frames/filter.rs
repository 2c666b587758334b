//! The LTFT frame filter `Ŝ_f(z)`, the frequency response of the frame
//! operator, and its reciprocal.
//!
//! Per band and per τ the ω-integral of `|f̂_{x,ω,τ}(z)|²` is reduced to one
//! dimension:
//!
//! * low:  `H((τ/a)(z + a)) − H((τ/a)(z − a))`
//! * high: `H((τ/b)(z − b)) + E − H((τ/b)(z + b))`
//! * mid:  `∫_{ln a}^{ln b} τ|ŵ(τ(z e^{−v} ∓ 1))|² dv` for both signs of ω
//!
//! where `H` is the cumulative integral of `|ŵ|²` and `E = ‖w‖²`. The τ
//! average uses Gauss-Legendre nodes. Resolution doubles until the result
//! is stable to `rel_tol`.
//!
//! # Cache format
//!
//! A text file:
//!
//! ```text
//! # ltft-frame-filter v1
//! # key <sha256 hex of the parameter key and grid>
//! # params <LtftParams::key()>
//! # grid <n> <symmetric 0|1>
//! # floor <f64>
//! z,low,mid,high
//! <z>,<low>,<mid>,<high>
//! ...
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a load
//! reproduces the filter bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::LtftParams;
use crate::error::{invalid, Error, Result};
use crate::quad::GaussLegendre;
use crate::signal::{fft_index_freq, Signal};
use crate::window::Window;

const CACHE_MAGIC: &str = "# ltft-frame-filter v1";

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss-Legendre panels per unit of window frequency in the mid band.
    pub panels_per_unit: f64,
    /// Gauss-Legendre nodes over τ.
    pub tau_nodes: usize,
    /// Required relative stability under one resolution doubling.
    pub rel_tol: f64,
    pub max_refinements: usize,
    /// `|ŵ|²` is integrated over `|u| ≤ clip`; the remainder is a tail bound.
    pub clip: f64,
    /// Smallest admissible filter value.
    pub floor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { panels_per_unit: 2.0, tau_nodes: 8, rel_tol: 1e-4, max_refinements: 4, clip: 48.0, floor: 1e-9 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.panels_per_unit > 0.0 && self.tau_nodes >= 1 && self.rel_tol > 0.0 && self.clip > 2.0) {
            return Err(invalid("quadrature config needs positive resolutions, rel_tol > 0 and clip > 2"));
        }
        if !(self.floor >= 0.0) {
            return Err(invalid("filter floor must be non-negative"));
        }
        Ok(())
    }
}

/// Cumulative `H(u) = ∫_{-∞}^u |ŵ|²` tabulated on `[-clip, clip]`,
/// evaluated by cubic Hermite interpolation (the derivative is known).
struct CumulativeSpectrum {
    window: Window,
    lo: f64,
    step: f64,
    h: Vec<f64>,
    g: Vec<f64>,
    tail_lo: f64,
    tail_hi: f64,
    total: f64,
    tail_exp: i32,
}

impl CumulativeSpectrum {
    fn new(window: &Window, clip: f64) -> Self {
        let step = 1.0 / 32.0;
        let n = (2.0 * clip / step).round() as usize;
        let lo = -clip;
        let gl = GaussLegendre::new(8);
        let dens = |u: f64| window.ft(u).norm_sqr();
        let tail = |a: f64, b: f64| gl.composite(a, b, ((b - a) * 2.0).ceil() as usize, dens);
        let tail_lo = tail(-16.0 * clip, -clip);
        let tail_hi = tail(clip, 16.0 * clip);
        let mut h = Vec::with_capacity(n + 1);
        let mut g = Vec::with_capacity(n + 1);
        let mut acc = tail_lo;
        for j in 0..=n {
            let u = lo + j as f64 * step;
            if j > 0 {
                acc += gl.composite(u - step, u, 1, dens);
            }
            h.push(acc);
            g.push(dens(u));
        }
        let total = acc + tail_hi;
        let tail_exp = 2 * window.decay_order() as i32 - 1;
        Self { window: window.clone(), lo, step, h, g, tail_lo, tail_hi, total, tail_exp }
    }

    fn eval(&self, u: f64) -> f64 {
        let hi = -self.lo;
        if u <= self.lo {
            return self.tail_lo * (self.lo / u).abs().powi(self.tail_exp);
        }
        if u >= hi {
            return self.total - self.tail_hi * (hi / u).powi(self.tail_exp);
        }
        let pos = (u - self.lo) / self.step;
        let j = (pos.floor() as usize).min(self.h.len() - 2);
        let t = pos - j as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.h[j] + h10 * self.step * self.g[j] + h01 * self.h[j + 1] + h11 * self.step * self.g[j + 1]
    }

    #[inline]
    fn density(&self, u: f64) -> f64 {
        self.window.ft(u).norm_sqr()
    }
}

struct BandIntegrator<'a> {
    params: &'a LtftParams,
    spec: &'a CumulativeSpectrum,
    clip: f64,
    panels_per_unit: f64,
    gl: GaussLegendre,
}

impl BandIntegrator<'_> {
    fn low(&self, z: f64, tau: f64) -> f64 {
        let a = self.params.a_tau(tau);
        let k = tau / a;
        self.spec.eval(k * (z + a)) - self.spec.eval(k * (z - a))
    }

    fn high(&self, z: f64, tau: f64) -> f64 {
        let b = self.params.b_tau(tau);
        let k = tau / b;
        self.spec.eval(k * (z - b)) + self.spec.total - self.spec.eval(k * (z + b))
    }

    /// Both signs of ω.
    fn mid(&self, z: f64, tau: f64) -> f64 {
        self.mid_side(z, tau, 1.0) + self.mid_side(z, tau, -1.0)
    }

    /// `∫_{ln a}^{ln b} τ|ŵ(τ(z e^{−v} − σ))|² dv`.
    fn mid_side(&self, z: f64, tau: f64, sigma: f64) -> f64 {
        let a = self.params.a_tau(tau);
        let b = self.params.b_tau(tau);
        let (la, lb) = (a.ln(), b.ln());
        if z == 0.0 {
            return (lb - la) * tau * self.spec.density(-sigma * tau);
        }
        // y = z e^{-v} spans [z/b, z/a] (same sign as z); clip |τ(y − σ)| ≤ U.
        let (ya, yb) = (z / b, z / a);
        let (mut y_lo, mut y_hi) = if z > 0.0 { (ya, yb) } else { (yb, ya) };
        y_lo = y_lo.max(sigma - self.clip / tau);
        y_hi = y_hi.min(sigma + self.clip / tau);
        if y_lo >= y_hi || (y_lo <= 0.0 && y_hi >= 0.0) {
            return 0.0;
        }
        let (abs_lo, abs_hi) = if z > 0.0 { (y_lo, y_hi) } else { (-y_hi, -y_lo) };
        let v0 = (z.abs() / abs_hi).ln();
        let v1 = (z.abs() / abs_lo).ln();
        let panels = ((v1 - v0) * (tau * abs_hi * self.panels_per_unit + 4.0)).ceil() as usize + 1;
        self.gl.composite(v0, v1, panels, |v| tau * self.spec.density(tau * (z * (-v).exp() - sigma)))
    }
}

/// Sampled frame filter with per-band components.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFilter {
    params_key: String,
    grid: Vec<f64>,
    low: Vec<f64>,
    mid: Vec<f64>,
    high: Vec<f64>,
    symmetric: bool,
    floor: f64,
}

impl FrameFilter {
    /// Evaluates `Ŝ_f` and its band components on `freq_grid` (ascending).
    /// If the grid is non-negative and the window is even, the filter is
    /// extended to negative frequencies by symmetry.
    pub fn build(params: &LtftParams, freq_grid: &[f64], quad: &QuadratureConfig) -> Result<Self> {
        params.validate()?;
        quad.validate()?;
        if freq_grid.len() < 2 {
            return Err(invalid("frame filter grid needs at least two frequencies"));
        }
        if freq_grid.iter().any(|z| !z.is_finite()) || freq_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("frame filter grid must be finite and strictly increasing"));
        }
        let spec = CumulativeSpectrum::new(&params.window, quad.clip);
        let compute = |level: usize| -> Vec<[f64; 3]> {
            let scale = 1usize << level;
            let integ = BandIntegrator {
                params,
                spec: &spec,
                clip: quad.clip,
                panels_per_unit: quad.panels_per_unit * scale as f64,
                gl: GaussLegendre::new(8),
            };
            let tau_rule = GaussLegendre::new(quad.tau_nodes * scale);
            let taus: Vec<(f64, f64)> = if params.tau_max > params.tau_min {
                let span = params.tau_max - params.tau_min;
                tau_rule.on(params.tau_min, params.tau_max).map(|(t, w)| (t, w / span)).collect()
            } else {
                vec![(params.tau_min, 1.0)]
            };
            freq_grid
                .par_iter()
                .map(|&z| {
                    let mut acc = [0.0; 3];
                    for &(tau, w) in &taus {
                        acc[0] += w * integ.low(z, tau);
                        acc[1] += w * integ.mid(z, tau);
                        acc[2] += w * integ.high(z, tau);
                    }
                    acc
                })
                .collect()
        };
        let mut prev = compute(0);
        let mut last_change = f64::INFINITY;
        for level in 1..=quad.max_refinements {
            let next = compute(level);
            last_change = prev
                .iter()
                .zip(&next)
                .map(|(p, n)| {
                    let (sp, sn): (f64, f64) = (p.iter().sum(), n.iter().sum());
                    (sn - sp).abs() / sn.abs().max(1e-300)
                })
                .fold(0.0, f64::max);
            prev = next;
            if last_change < quad.rel_tol {
                let symmetric = freq_grid[0] >= 0.0 && params.window.is_even();
                let filter = Self {
                    params_key: params.key(),
                    grid: freq_grid.to_vec(),
                    low: prev.iter().map(|v| v[0]).collect(),
                    mid: prev.iter().map(|v| v[1]).collect(),
                    high: prev.iter().map(|v| v[2]).collect(),
                    symmetric,
                    floor: quad.floor,
                };
                filter.check_bounds()?;
                return Ok(filter);
            }
        }
        Err(Error::QuadratureFailure { refinements: quad.max_refinements, last_change })
    }

    /// Uniform grid covering the DFT band of signals sampled at `rate`, with
    /// spacing a sixteenth of the narrowest atom bandwidth (capped at 1024
    /// intervals per half band).
    pub fn for_rate(params: &LtftParams, rate: f64, quad: &QuadratureConfig) -> Result<Self> {
        Self::build(params, &Self::rate_grid(params, rate)?, quad)
    }

    pub fn rate_grid(params: &LtftParams, rate: f64) -> Result<Vec<f64>> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid("rate must be positive"));
        }
        params.validate()?;
        let nyq = 0.5 * rate;
        let step = (params.min_scale() / 16.0).max(nyq / 1024.0);
        let n = (nyq / step).ceil() as usize + 1;
        let step = nyq / (n - 1) as f64;
        let lo = if params.window.is_even() { 0 } else { -(n as i64) };
        Ok((lo..=n as i64).map(|i| i as f64 * step).collect())
    }

    fn check_bounds(&self) -> Result<()> {
        let (min, at) = self
            .grid
            .iter()
            .zip(self.values())
            .fold((f64::INFINITY, 0.0), |acc, (&z, v)| if v < acc.0 { (v, z) } else { acc });
        if !(min > self.floor) {
            return Err(Error::FrameDegeneracy { min, at, floor: self.floor });
        }
        Ok(())
    }

    pub fn params_key(&self) -> &str {
        &self.params_key
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.low[i] + self.mid[i] + self.high[i]).collect()
    }

    pub fn band_values(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.low, &self.mid, &self.high)
    }

    /// `(A_est, B_est)`: min and max over the grid.
    pub fn bounds(&self) -> (f64, f64) {
        self.values()
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Cubic (Catmull-Rom style) interpolation of each band at `z`.
    pub fn bands_at(&self, z: f64) -> [f64; 3] {
        let z = if self.symmetric { z.abs() } else { z };
        let g = &self.grid;
        let n = g.len();
        if z <= g[0] {
            return [self.low[0], self.mid[0], self.high[0]];
        }
        if z >= g[n - 1] {
            return [self.low[n - 1], self.mid[n - 1], self.high[n - 1]];
        }
        let j = g.partition_point(|&v| v <= z) - 1;
        let h = g[j + 1] - g[j];
        let t = (z - g[j]) / h;
        let slope = |v: &[f64], i: usize| -> f64 {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (v[r] - v[l]) / (g[r] - g[l])
        };
        let interp = |v: &[f64]| {
            let (t2, t3) = (t * t, t * t * t);
            (2.0 * t3 - 3.0 * t2 + 1.0) * v[j]
                + (t3 - 2.0 * t2 + t) * h * slope(v, j)
                + (-2.0 * t3 + 3.0 * t2) * v[j + 1]
                + (t3 - t2) * h * slope(v, j + 1)
        };
        [interp(&self.low), interp(&self.mid), interp(&self.high)]
    }

    pub fn value(&self, z: f64) -> f64 {
        self.bands_at(z).iter().sum()
    }

    /// `S_f s`: multiply the spectrum by `Ŝ_f`.
    pub fn apply(&self, s: &Signal) -> Signal {
        s.filter_real(|z| self.value(z))
    }

    /// `S_f⁻¹ s`: divide the spectrum by `Ŝ_f`.
    pub fn apply_inverse(&self, s: &Signal) -> Result<Signal> {
        let n = s.len();
        for i in 0..n {
            let z = fft_index_freq(i, n, s.rate());
            let v = self.value(z);
            if !(v > self.floor) {
                return Err(Error::IllConditionedFilter { freq: z, value: v, floor: self.floor });
            }
        }
        Ok(s.filter_real(|z| 1.0 / self.value(z)))
    }

    fn cache_key(params_key: &str, grid: &[f64]) -> String {
        let mut h = Sha256::new();
        h.update(params_key.as_bytes());
        for z in grid {
            h.update(z.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_cache_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CACHE_MAGIC}");
        let _ = writeln!(out, "# key {}", Self::cache_key(&self.params_key, &self.grid));
        let _ = writeln!(out, "# params {}", self.params_key);
        let _ = writeln!(out, "# grid {} {}", self.grid.len(), u8::from(self.symmetric));
        let _ = writeln!(out, "# floor {:?}", self.floor);
        out.push_str("z,low,mid,high\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(out, "{:?},{:?},{:?},{:?}", self.grid[i], self.low[i], self.mid[i], self.high[i]);
        }
        out
    }

    pub fn from_cache_str(text: &str) -> Result<Self> {
        let fmt = |m: &str| Error::Format(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(CACHE_MAGIC) {
            return Err(fmt("missing frame filter header"));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| fmt("truncated header"))?;
            line.strip_prefix(&format!("# {name} "))
                .map(str::to_string)
                .ok_or_else(|| Error::Format(format!("expected '# {name}' header line, got '{line}'")))
        };
        let key = field("key")?;
        let params_key = field("params")?;
        let grid_spec = field("grid")?;
        let floor: f64 = field("floor")?.parse().map_err(|_| fmt("bad floor"))?;
        let mut gs = grid_spec.split_whitespace();
        let n: usize = gs.next().and_then(|v| v.parse().ok()).ok_or_else(|| fmt("bad grid size"))?;
        let symmetric = gs.next() == Some("1");
        if lines.next() != Some("z,low,mid,high") {
            return Err(fmt("missing column header"));
        }
        let mut cols: [Vec<f64>; 4] = Default::default();
        for (row, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("unparsable row {}", row + 1)))?;
            if vals.len() != 4 {
                return Err(Error::Format(format!("row {} has {} columns, expected 4", row + 1, vals.len())));
            }
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v);
            }
        }
        let [grid, low, mid, high] = cols;
        if grid.len() != n {
            return Err(Error::Format(format!("expected {n} rows, found {}", grid.len())));
        }
        if Self::cache_key(&params_key, &grid) != key {
            return Err(fmt("key does not match contents"));
        }
        Ok(Self { params_key, grid, low, mid, high, symmetric, floor })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_cache_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_cache_str(&fs::read_to_string(path)?)
    }

    /// Cache file name for a configuration inside `dir`.
    pub fn cache_path(dir: &Path, params: &LtftParams, rate: f64) -> Result<PathBuf> {
        let key = Self::cache_key(&params.key(), &Self::rate_grid(params, rate)?);
        Ok(dir.join(format!("frame-filter-{}.csv", &key[..16])))
    }

    /// Loads a cached filter for `(params, rate)` or builds and stores it.
    pub fn load_or_build(dir: &Path, params: &LtftParams, rate: f64, quad: &QuadratureConfig) -> Result<Self> {
        let path = Self::cache_path(dir, params, rate)?;
        if path.exists() {
            if let Ok(f) = Self::load(&path) {
                if f.params_key == params.key() && f.floor == quad.floor {
                    return Ok(f);
                }
            }
        }
        let f = Self::for_rate(params, rate, quad)?;
        fs::create_dir_all(dir)?;
        f.save(&path)?;
        Ok(f)
    }

    /// A constant filter, mostly for tests.
    pub fn constant(params: &LtftParams, value: f64, max_freq: f64) -> Self {
        Self {
            params_key: params.key(),
            grid: vec![0.0, max_freq],
            low: vec![0.0; 2],
            mid: vec![value; 2],
            high: vec![0.0; 2],
            symmetric: true,
            floor: 0.0,
        }
    }
}

/// `S_f⁻¹ s` for a prebuilt filter.
pub fn apply_inverse_frame_op(s: &Signal, ff: &FrameFilter) -> Result<Signal> {
    ff.apply_inverse(s)
}

/// Direct `∫∫ |f̂_{x,ω,τ}(z)|² dω dμ(τ)` with no band reductions, used to
/// cross-check the reduced formulas.
pub fn frame_filter_direct(params: &LtftParams, z: f64, omega_max: f64, omega_step: f64, tau_nodes: usize) -> f64 {
    let gl = GaussLegendre::new(tau_nodes);
    let span = params.tau_max - params.tau_min;
    let taus: Vec<(f64, f64)> = if span > 0.0 {
        gl.on(params.tau_min, params.tau_max).map(|(t, w)| (t, w / span)).collect()
    } else {
        vec![(params.tau_min, 1.0)]
    };
    let n = (2.0 * omega_max / omega_step).ceil() as usize;
    let h = 2.0 * omega_max / n as f64;
    let mut acc = 0.0;
    for (tau, wt) in taus {
        let mut s = 0.0;
        for i in 0..=n {
            let omega = -omega_max + i as f64 * h;
            let p = super::PhasePoint::new(0.0, omega, tau);
            let v: Complex64 = params.atom(&p).ft(z);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * v.norm_sqr();
        }
        acc += wt * s * h;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Transition;

    fn params() -> LtftParams {
        LtftParams::default_for_rate(256.0)
    }

    #[test]
    fn cumulative_spectrum_matches_energy() {
        let c = CumulativeSpectrum::new(&Window::Hann, 48.0);
        assert!((c.total - 0.375).abs() < 1e-9);
        assert!((c.eval(0.0) - 0.1875).abs() < 1e-9);
        assert!(c.eval(-1e3) >= 0.0 && c.eval(1e3) <= c.total);
    }

    #[test]
    fn reduced_formula_matches_direct_integral() {
        let p = params();
        let f = FrameFilter::build(&p, &[0.0, 5.0, 12.8, 40.0, 101.0, 128.0], &QuadratureConfig::default()).unwrap();
        for &z in f.grid() {
            let direct = frame_filter_direct(&p, z, 2000.0, 0.05, 16);
            let v = f.value(z);
            assert!((v - direct).abs() < 2e-4 * direct, "z = {z}: {v} vs {direct}");
        }
    }

    #[test]
    fn filter_is_near_window_energy_in_the_interior() {
        let f = FrameFilter::for_rate(&params(), 256.0, &QuadratureConfig::default()).unwrap();
        let (a, b) = f.bounds();
        assert!(a > 0.0 && b < 1.0);
        let mid = f.value(50.0);
        assert!((mid - 0.375).abs() < 0.02, "{mid}");
        assert!((f.value(-33.0) - f.value(33.0)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_through_cache() {
        let p = params();
        let f = FrameFilter::for_rate(&p, 256.0, &QuadratureConfig::default()).unwrap();
        let text = f.to_cache_string();
        let g = FrameFilter::from_cache_str(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(text, g.to_cache_string());
        let corrupted = text.replacen("0.", "1.", 1);
        assert!(FrameFilter::from_cache_str(&corrupted).is_err());
    }

    #[test]
    fn cache_directory_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let p = params();
        let q = QuadratureConfig::default();
        let f = FrameFilter::load_or_build(dir.path(), &p, 256.0, &q).unwrap();
        assert!(FrameFilter::cache_path(dir.path(), &p, 256.0).unwrap().exists());
        let g = FrameFilter::load_or_build(dir.path(), &p, 256.0, &q).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn quadrature_failure_is_reported() {
        let q = QuadratureConfig { rel_tol: 1e-30, max_refinements: 1, ..Default::default() };
        let r = FrameFilter::build(&params(), &[0.0, 10.0], &q);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn degeneracy_is_reported() {
        let q = QuadratureConfig { floor: 10.0, ..Default::default() };
        let r = FrameFilter::build(&params(), &[0.0, 10.0], &q);
        assert!(matches!(r, Err(Error::FrameDegeneracy { .. })));
    }

    #[test]
    fn pinned_transition_builds() {
        let p = LtftParams::new(3.0, 6.0, Transition::SupportPinned { j1: 40.0, j2: 4.0 }, Window::Hann).unwrap();
        let f = FrameFilter::for_rate(&p, 64.0, &QuadratureConfig::default()).unwrap();
        assert!(f.bounds().0 > 0.0);
    }
}
