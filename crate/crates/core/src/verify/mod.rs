//! Oracles, statistical fits and report rows for the acceptance criteria.
//!
//! Each numbered criterion has one runner in [`criteria`] that returns its
//! [`ReportRow`]s; the acceptance test target and the command line tool both
//! call these runners.

pub mod criteria;

use std::io::Write;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Error, Result};
use crate::frames::{dense_analysis, dense_synthesis, DenseGrid, Frame, LtftFrame, StftFrame};
use crate::phase_space::PhaseDomain;
use crate::signal::Signal;
use crate::window::Window;

/// One machine-readable check.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub test_id: String,
    pub params: String,
    pub metric: String,
    pub value: f64,
    /// Human-readable acceptance condition, `-` for informational rows.
    pub threshold: String,
    pub pass: bool,
}

impl ReportRow {
    pub const HEADER: [&'static str; 6] = ["test_id", "params", "metric", "value", "threshold", "pass"];

    pub fn check(test_id: &str, params: impl Into<String>, metric: &str, value: f64, threshold: impl Into<String>, pass: bool) -> Self {
        Self {
            test_id: test_id.to_string(),
            params: params.into(),
            metric: metric.to_string(),
            value,
            threshold: threshold.into(),
            pass,
        }
    }

    /// A row that records a value without gating.
    pub fn info(test_id: &str, params: impl Into<String>, metric: &str, value: f64) -> Self {
        Self::check(test_id, params, metric, value, "-", true)
    }

    pub fn below(test_id: &str, params: impl Into<String>, metric: &str, value: f64, limit: f64) -> Self {
        Self::check(test_id, params, metric, value, format!("< {limit}"), value < limit)
    }

    pub fn within(test_id: &str, params: impl Into<String>, metric: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self::check(test_id, params, metric, value, format!("[{lo}, {hi}]"), value >= lo && value <= hi)
    }
}

/// Writes rows as CSV with [`ReportRow::HEADER`].
pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(ReportRow::HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.test_id.as_str(),
            r.params.as_str(),
            r.metric.as_str(),
            &format!("{:.6e}", r.value),
            r.threshold.as_str(),
            if r.pass { "true" } else { "false" },
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares line with a 95% confidence half-width on the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci95: f64,
    pub n: usize,
}

/// Ordinary least squares of `ys` on `xs`. The interval uses the Student t
/// quantile with `n − 2` degrees of freedom (zero when the fit is exact).
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Degenerate("slope fit needs at least 3 paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("slope fit input is not finite".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * (1.0 + mx * mx) * n {
        return Err(Error::Degenerate("slope fit has zero variance in x".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0).map_err(|e| Error::Degenerate(e.to_string()))?.inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, ci95: t * se, n: xs.len() })
}

/// Monte Carlo errors per sample count, one column per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub ks: Vec<usize>,
    /// `errors[i][j]`: error at `ks[i]` for seed `j`.
    pub errors: Vec<Vec<f64>>,
}

impl ConvergenceRun {
    pub const MIN_KS: usize = 4;
    pub const MIN_SEEDS: usize = 20;

    /// Requires at least four K values spanning a factor of four or more and
    /// twenty seeds per K.
    pub fn new(ks: Vec<usize>, errors: Vec<Vec<f64>>) -> Result<Self> {
        if ks.len() < Self::MIN_KS || ks.len() != errors.len() {
            return Err(invalid(format!("a convergence run needs >= {} K values with errors", Self::MIN_KS)));
        }
        let (lo, hi) = (ks.iter().min().copied().unwrap_or(0), ks.iter().max().copied().unwrap_or(0));
        if lo == 0 || hi < 4 * lo {
            return Err(invalid("K values must span at least a factor of 4"));
        }
        if errors.iter().any(|e| e.len() < Self::MIN_SEEDS) {
            return Err(invalid(format!("a convergence run needs >= {} seeds per K", Self::MIN_SEEDS)));
        }
        Ok(Self { ks, errors })
    }

    pub fn mean_errors(&self) -> Vec<f64> {
        self.errors.iter().map(|e| e.iter().sum::<f64>() / e.len() as f64).collect()
    }

    pub fn std_errors(&self) -> Vec<f64> {
        self.errors
            .iter()
            .zip(self.mean_errors())
            .map(|(e, m)| (e.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (e.len() as f64 - 1.0)).sqrt())
            .collect()
    }

    /// Slope of `log₂(mean error)` against `log₂ K`.
    pub fn fit(&self) -> Result<SlopeFit> {
        let xs: Vec<f64> = self.ks.iter().map(|&k| (k as f64).log2()).collect();
        let ys: Vec<f64> = self.mean_errors().iter().map(|e| e.log2()).collect();
        slope_fit(&xs, &ys)
    }
}

/// Zero padding (in samples) that holds every atom touching `s`, twice over.
pub fn synthesis_padding(frame: &dyn Frame, s: &Signal) -> usize {
    (2.0 * frame.max_support() * s.rate()).ceil() as usize + 4
}

/// Box domain covering `s` in time (plus the longest atom support) and
/// `|ω| ≤ W·R/2`.
pub fn covering_domain(frame: &dyn Frame, s: &Signal, w: f64) -> Result<PhaseDomain> {
    let l = frame.max_support();
    let top = 0.5 * w * s.rate();
    PhaseDomain::boxed((s.origin() - l, s.end() + l), vec![(-top, top)], frame.tau_range())
}

/// `V_f* V_f s` by dense quadrature on a padded copy of `s`.
pub fn dense_frame_op(frame: &dyn Frame, s: &Signal, domain: &PhaseDomain, grid: &DenseGrid) -> Result<Signal> {
    let pad = synthesis_padding(frame, s);
    let template = s.padded(pad, pad);
    let coeffs = dense_analysis(frame, s, domain, grid)?;
    dense_synthesis(frame, &coeffs, &template)
}

/// `‖S_f⁻¹ V_f* V_f s − s‖ / ‖s‖` with `V_f* V_f` by dense quadrature.
pub fn pseudo_inverse_residuals(frame: &dyn Frame, s: &Signal, domain: &PhaseDomain, grid: &DenseGrid) -> Result<f64> {
    if s.energy() == 0.0 {
        return Ok(0.0);
    }
    let pad = synthesis_padding(frame, s);
    let y = frame.apply_inverse(&dense_frame_op(frame, s, domain, grid)?)?;
    y.relative_error(&s.padded(pad, pad))
}

/// Relative discrepancy between the dense-quadrature frame operator and the
/// frame's own (frequency-domain) `S_f`.
pub fn frame_op_equivalence(frame: &dyn Frame, s: &Signal, domain: &PhaseDomain, grid: &DenseGrid) -> Result<f64> {
    if s.energy() == 0.0 {
        return Ok(0.0);
    }
    let pad = synthesis_padding(frame, s);
    let dense = dense_frame_op(frame, s, domain, grid)?;
    let direct = frame.apply_frame_op(&s.padded(pad, pad))?;
    dense.relative_error(&direct)
}

/// `‖V_f s‖² / ‖s‖²` by dense quadrature.
pub fn parseval_ratio(frame: &dyn Frame, s: &Signal, domain: &PhaseDomain, grid: &DenseGrid) -> Result<f64> {
    let e = s.energy();
    if e == 0.0 {
        return Err(Error::Degenerate("Parseval ratio of a zero signal".into()));
    }
    Ok(dense_analysis(frame, s, domain, grid)?.energy() / e)
}

/// Frame diagnostics for one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub a_est: f64,
    pub b_est: f64,
    /// STFT `‖V s‖²/‖s‖²` for a Hann window as long as the longest LTFT atom.
    pub parseval_ratio: f64,
    /// `‖S_f⁻¹ S_f s − s‖/‖s‖` through the frame filter.
    pub reconstruction_error: f64,
    /// `‖S_f⁻¹ V_f* V_f s − s‖/‖s‖` with dense quadrature.
    pub pseudo_inverse_residual: f64,
}

impl FrameReport {
    /// Computes every entry; the dense paths use the `|ω| ≤ W·R/2` covering
    /// domain.
    pub fn measure(frame: &LtftFrame, s: &Signal, w: f64, grid: &DenseGrid) -> Result<Self> {
        let (a_est, b_est) = frame.filter().bounds();
        let stft = StftFrame::new(Window::Hann, frame.max_support())?;
        let parseval_ratio = parseval_ratio(&stft, s, &covering_domain(&stft, s, w)?, grid)?;
        let pad = synthesis_padding(frame, s);
        let padded = s.padded(pad, pad);
        let reconstruction_error = frame.apply_inverse(&frame.apply_frame_op(&padded)?)?.relative_error(&padded)?;
        let pseudo_inverse_residual = pseudo_inverse_residuals(frame, s, &covering_domain(frame, s, w)?, grid)?;
        Ok(Self { a_est, b_est, parseval_ratio, reconstruction_error, pseudo_inverse_residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let ks: Vec<f64> = (10..=16).map(|p| (1u64 << p) as f64).collect();
        let xs: Vec<f64> = ks.iter().map(|k| k.log2()).collect();
        let half: Vec<f64> = ks.iter().map(|k| (3.0 * k.powf(-0.5)).log2()).collect();
        let fit = slope_fit(&xs, &half).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-6 && fit.ci95 < 1e-6);
        let one: Vec<f64> = ks.iter().map(|k| (0.2 / k).log2()).collect();
        assert!((slope_fit(&xs, &one).unwrap().slope + 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_fit_is_reported() {
        assert!(matches!(slope_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(slope_fit(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn noisy_fit_interval_covers_truth() {
        let xs: Vec<f64> = (0..8).map(f64::from).collect();
        let noise = [0.03, -0.02, 0.01, -0.04, 0.02, 0.0, -0.01, 0.03];
        let ys: Vec<f64> = xs.iter().zip(noise).map(|(x, e)| 1.0 - 0.5 * x + e).collect();
        let fit = slope_fit(&xs, &ys).unwrap();
        assert!(fit.ci95 > 0.0 && (fit.slope + 0.5).abs() < fit.ci95);
    }

    #[test]
    fn convergence_run_invariants() {
        let ks = vec![1024, 2048, 4096, 8192];
        let errs = |n: usize| ks.iter().map(|&k| vec![1.0 / (k as f64).sqrt(); n]).collect::<Vec<_>>();
        assert!(ConvergenceRun::new(ks.clone(), errs(19)).is_err());
        assert!(ConvergenceRun::new(vec![1024, 1100, 1200, 1300], errs(20)).is_err());
        let run = ConvergenceRun::new(ks.clone(), errs(20)).unwrap();
        assert!((run.fit().unwrap().slope + 0.5).abs() < 1e-9);
        assert!(run.std_errors().iter().all(|&s| s < 1e-15));
    }

    #[test]
    fn csv_rows() {
        let rows = vec![ReportRow::below("c1", "M=8", "err", 0.01, 0.02), ReportRow::info("c1", "M=8", "A", 0.3)];
        let mut buf = Vec::new();
        write_report(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "test_id,params,metric,value,threshold,pass");
        assert!(lines.next().unwrap().ends_with(",< 0.02,true"));
        assert!(lines.next().unwrap().ends_with(",-,true"));
    }
}
