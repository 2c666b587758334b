use std::fmt;
use std::io::Read;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::frames::PhasePoint;
use crate::phase_space::PhaseDomain;

type PointMap = Arc<dyn Fn(&PhasePoint) -> PhasePoint + Send + Sync>;
type PointScalar = Arc<dyn Fn(&PhasePoint) -> f64 + Send + Sync>;
type KernelFn = Arc<dyn Fn(&PhasePoint, &PhasePoint) -> Complex64 + Send + Sync>;

/// A phase-space diffeomorphism `d` with its inverse and Jacobian.
#[derive(Clone)]
pub struct Diffeo {
    pub map: PointMap,
    pub inverse: PointMap,
    /// `|J_d|` at the source point.
    pub jacobian: PointScalar,
    pub jacobian_bound: f64,
    /// Factor by which the map stretches time around `t = 0`, used to size
    /// the output grid.
    pub time_stretch: f64,
}

impl fmt::Debug for Diffeo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diffeo(time_stretch={}, |J|<={})", self.time_stretch, self.jacobian_bound)
    }
}

impl Diffeo {
    /// `d(x, ω, τ) = (Δx, ω, τ)`, `|J_d| = Δ`.
    pub fn time_dilation(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(format!("time dilation must be positive, got {delta}")));
        }
        Ok(Self {
            map: Arc::new(move |p| PhasePoint::new(delta * p.x, p.omega, p.tau)),
            inverse: Arc::new(move |p| PhasePoint::new(p.x / delta, p.omega, p.tau)),
            jacobian: Arc::new(move |_| delta),
            jacobian_bound: delta,
            time_stretch: delta,
        })
    }

    /// Round-trips `points` through `inverse ∘ map`.
    pub fn check_bijection(&self, points: &[PhasePoint], tol: f64) -> Result<()> {
        for p in points {
            let q = (self.inverse)(&(self.map)(p));
            let err = (q.x - p.x).abs() + (q.omega - p.omega).abs() + (q.tau - p.tau).abs();
            let scale = 1.0 + p.x.abs() + p.omega.abs() + p.tau.abs();
            if err > tol * scale {
                return Err(invalid(format!("diffeomorphism inverse fails at {p:?}")));
            }
            let j = (self.jacobian)(p);
            if !(j.is_finite() && j >= 0.0 && j <= self.jacobian_bound * (1.0 + 1e-12)) {
                return Err(invalid(format!("Jacobian {j} at {p:?} exceeds its declared bound")));
            }
        }
        Ok(())
    }
}

/// Piecewise-constant symbol on a rectangular `(x, ω)` lattice, looked up by
/// nearest neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    xs: Vec<f64>,
    omegas: Vec<f64>,
    /// Row-major: `values[i * omegas.len() + j]` at `(xs[i], omegas[j])`.
    values: Vec<f64>,
}

impl SymbolGrid {
    pub fn new(xs: Vec<f64>, omegas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if xs.is_empty() || omegas.is_empty() || !sorted(&xs) || !sorted(&omegas) {
            return Err(invalid("symbol grid axes must be non-empty and strictly increasing"));
        }
        if values.len() != xs.len() * omegas.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("symbol grid values must be finite and fill the lattice"));
        }
        Ok(Self { xs, omegas, values })
    }

    /// Parses CSV with header `x,omega,value`, one row per lattice point in
    /// any order. Lines starting with `#` are ignored.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Format(format!("mask header: {e}")))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["x", "omega", "value"] {
            return Err(Error::Format(format!("mask header must be 'x,omega,value', got '{}'", names.join(","))));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| Error::Format(format!("mask row {row}: {e}")))?;
            if rec.len() != 3 {
                return Err(Error::Format(format!("mask row {row}: expected 3 fields, found {}", rec.len())));
            }
            let mut vals = [0.0; 3];
            for (k, field) in rec.iter().enumerate() {
                vals[k] = field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Format(format!("mask row {row}: '{field}' is not a finite number")))?;
            }
            rows.push((row, vals));
        }
        if rows.is_empty() {
            return Err(Error::Format("mask has no rows".into()));
        }
        let axis = |k: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r.1[k]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (xs, omegas) = (axis(0), axis(1));
        let mut values = vec![f64::NAN; xs.len() * omegas.len()];
        for (row, [x, om, v]) in &rows {
            let i = xs.partition_point(|a| a < x);
            let j = omegas.partition_point(|a| a < om);
            let slot = &mut values[i * omegas.len() + j];
            if !slot.is_nan() {
                return Err(Error::Format(format!("mask row {row}: duplicate point ({x}, {om})")));
            }
            *slot = *v;
        }
        if let Some(pos) = values.iter().position(|v| v.is_nan()) {
            let (i, j) = (pos / omegas.len(), pos % omegas.len());
            return Err(Error::Format(format!(
                "mask is not a full lattice: missing point ({}, {})",
                xs[i], omegas[j]
            )));
        }
        Self::new(xs, omegas, values)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_csv_reader(text.as_bytes())
    }

    fn nearest(axis: &[f64], v: f64) -> usize {
        let i = axis.partition_point(|&a| a < v);
        if i == 0 {
            0
        } else if i == axis.len() {
            axis.len() - 1
        } else if v - axis[i - 1] <= axis[i] - v {
            i - 1
        } else {
            i
        }
    }

    pub fn eval(&self, x: f64, omega: f64) -> f64 {
        let i = Self::nearest(&self.xs, x);
        let j = Self::nearest(&self.omegas, omega);
        self.values[i * self.omegas.len() + j]
    }

    pub fn bound(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Bounded multiplier symbol `h(g)`.
#[derive(Clone)]
pub enum Symbol {
    Function { f: PointScalar, bound: f64 },
    Grid(SymbolGrid),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Function { bound, .. } => write!(f, "Symbol::Function(|h|<={bound})"),
            Self::Grid(g) => write!(f, "Symbol::Grid({}x{})", g.xs.len(), g.omegas.len()),
        }
    }
}

impl Symbol {
    pub fn function<F: Fn(&PhasePoint) -> f64 + Send + Sync + 'static>(bound: f64, f: F) -> Self {
        Self::Function { f: Arc::new(f), bound }
    }

    pub fn constant(v: f64) -> Self {
        Self::function(v.abs(), move |_| v)
    }

    #[inline]
    pub fn eval(&self, p: &PhasePoint) -> f64 {
        match self {
            Self::Function { f, .. } => f(p),
            Self::Grid(g) => g.eval(p.x, p.omega),
        }
    }

    pub fn bound(&self) -> f64 {
        match self {
            Self::Function { bound, .. } => *bound,
            Self::Grid(g) => g.bound(),
        }
    }
}

/// Integral operator `[TF](y) = ∫ R(y, g) F(g) dg` restricted to an output
/// envelope.
#[derive(Clone)]
pub struct KernelOp {
    pub kernel: KernelFn,
    pub output_domain: PhaseDomain,
    /// Declared bound for `sup_y ‖R(y, ·)‖₂`.
    pub bound: f64,
}

impl fmt::Debug for KernelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelOp(bound={}, output μ={})", self.bound, self.output_domain.measure())
    }
}

impl KernelOp {
    pub fn new<F>(output_domain: PhaseDomain, bound: f64, kernel: F) -> Self
    where
        F: Fn(&PhasePoint, &PhasePoint) -> Complex64 + Send + Sync + 'static,
    {
        Self { kernel: Arc::new(kernel), output_domain, bound }
    }
}

/// The phase-space operator `T` of a pipeline.
#[derive(Debug, Clone)]
pub enum PhaseOpSpec {
    Identity,
    Diffeo(Diffeo),
    Multiplier(Symbol),
    Kernel(KernelOp),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_csv_parses_and_looks_up() {
        let g = SymbolGrid::from_csv_str("x,omega,value\n0,0,1\n0,10,0\n1,0,2\n1,10,3\n").unwrap();
        assert_eq!(g.eval(0.1, 2.0), 1.0);
        assert_eq!(g.eval(0.9, 8.0), 3.0);
        assert_eq!(g.eval(-5.0, 100.0), 0.0);
        assert_eq!(g.bound(), 3.0);
    }

    #[test]
    fn mask_csv_errors_name_the_row() {
        let e = SymbolGrid::from_csv_str("x,omega,value\n0,0,1\n0,abc,0\n").unwrap_err();
        assert!(e.to_string().contains("row 2"), "{e}");
        let e = SymbolGrid::from_csv_str("x,omega,value\n0,0,1\n0,0,2\n").unwrap_err();
        assert!(e.to_string().contains("row 2"), "{e}");
        let e = SymbolGrid::from_csv_str("x,omega,value\n0,0,1\n1,1,1\n").unwrap_err();
        assert!(e.to_string().contains("missing point"), "{e}");
        assert!(SymbolGrid::from_csv_str("a,b,c\n1,2,3\n").is_err());
    }

    #[test]
    fn dilation_round_trip() {
        let d = Diffeo::time_dilation(3.0).unwrap();
        let pts: Vec<_> = (0..10).map(|i| PhasePoint::new(i as f64 * 0.1, 5.0, 4.0)).collect();
        d.check_bijection(&pts, 1e-12).unwrap();
        assert!(Diffeo::time_dilation(0.0).is_err());
    }
}
