//! Runners for the numbered acceptance criteria. Each `Default` is the
//! acceptance configuration.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{covering_domain, frame_op_equivalence, parseval_ratio, pseudo_inverse_residuals, ConvergenceRun, ReportRow};
use crate::error::Result;
use crate::frames::{
    CwtFrame, DenseGrid, Frame, FrameShape, LtftFrame, LtftParams, MotherWavelet, PhasePoint, StftFrame, Transition,
};
use crate::phase_space::{
    cwt_domain, cwt_measure, cwt_volume_threshold, enveloped_trig_poly, ltft_domain, rc_membership, truncation_ratio,
    LvdReport, Sidedness,
};
use crate::pipelines::{
    dense_pipeline, op_count, phase_vocoder, run_mc_pipeline, Nonlinearity, PhaseOpSpec, PipelineConfig, SampleCount,
};
use crate::signal::{bandlimited_signal, Signal};
use crate::window::Window;

/// Rows produced by one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub rows: Vec<ReportRow>,
    /// Truncation reports (criteria 4 and 5).
    pub lvd: Vec<LvdReport>,
}

impl Outcome {
    fn new(id: u8, name: &'static str) -> Self {
        Self { id, name, rows: Vec::new(), lvd: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    /// `criterion N (name): PASS|FAIL` followed by the failing rows.
    pub fn summary(&self) -> String {
        let mut line = format!("criterion {} ({}): {}", self.id, self.name, if self.passed() { "PASS" } else { "FAIL" });
        for r in self.rows.iter().filter(|r| !r.pass) {
            line.push_str(&format!("\n    {} [{}] {} = {:.4e}, want {}", r.test_id, r.params, r.metric, r.value, r.threshold));
        }
        line
    }
}

fn test_signal(m: usize, rate: f64, real: bool, seed: u64) -> Result<Signal> {
    bandlimited_signal(m, rate, rate / 4.0, 8, real, seed)
}

/// Criterion 1: the frame filter is bounded below and matches the dense
/// frame operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameValidity {
    /// Samples per signal; the rate is `m` Hz.
    pub m: usize,
    pub signals: usize,
    pub w: f64,
    pub seed: u64,
    pub grid: DenseGrid,
    pub shape: FrameShape,
}

impl Default for FrameValidity {
    fn default() -> Self {
        Self { m: 512, signals: 10, w: 2.0, seed: 100, grid: DenseGrid::default(), shape: FrameShape::default() }
    }
}

impl FrameValidity {
    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(1, "frame filter validity");
        let rate = self.m as f64;
        let frame = LtftFrame::new(self.shape.at_rate(rate)?, rate)?;
        let (a, b) = frame.filter().bounds();
        let params = format!("M={};R={};{}", self.m, rate, self.shape);
        out.rows.push(ReportRow::check("frame_bounds", params.clone(), "A_est", a, "> 0", a > 0.0));
        out.rows.push(ReportRow::info("frame_bounds", params.clone(), "B_est", b));
        for i in 0..self.signals {
            let s = test_signal(self.m, rate, false, self.seed + i as u64)?;
            let err = frame_op_equivalence(&frame, &s, &covering_domain(&frame, &s, self.w)?, &self.grid)?;
            out.rows.push(ReportRow::below("frame_op_equivalence", format!("{params};signal={i}"), "rel_err", err, 0.02));
        }
        Ok(out)
    }
}

/// Criterion 2: `S_f⁻¹ V_f* V_f` reconstructs in-class signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub m: usize,
    pub w: f64,
    pub signals: usize,
    pub seed: u64,
    pub grid: DenseGrid,
    pub shape: FrameShape,
}

impl Default for Reconstruction {
    fn default() -> Self {
        Self { m: 1024, w: 2.0, signals: 5, seed: 200, grid: DenseGrid::default(), shape: FrameShape::default() }
    }
}

impl Reconstruction {
    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(2, "reconstruction");
        let rate = self.m as f64;
        let params = self.shape.at_rate(rate)?;
        let frame = LtftFrame::new(params.clone(), rate)?;
        let domain = ltft_domain(self.m, rate, self.w, &params, Sidedness::TwoSided)?;
        for i in 0..self.signals {
            let s = test_signal(self.m, rate, false, self.seed + i as u64)?;
            let r = pseudo_inverse_residuals(&frame, &s, &domain, &self.grid)?;
            let p = format!("M={};W={};signal={i}", self.m, self.w);
            out.rows.push(ReportRow::below("pseudo_inverse_residual", p, "rel_err", r, 0.05));
        }
        Ok(out)
    }
}

/// Criterion 3: Monte Carlo error of the identity pipeline decays like
/// `K^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct McConvergence {
    pub m: usize,
    pub log2_k: (u32, u32),
    pub seeds: usize,
    pub seed: u64,
    pub shape: FrameShape,
}

impl Default for McConvergence {
    fn default() -> Self {
        Self { m: 256, log2_k: (10, 16), seeds: 20, seed: 300, shape: FrameShape::default() }
    }
}

impl McConvergence {
    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(3, "Monte Carlo convergence");
        let rate = self.m as f64;
        let frame = LtftFrame::new(self.shape.at_rate(rate)?, rate)?;
        let s = test_signal(self.m, rate, true, self.seed)?;
        let cfg = PipelineConfig::default();
        let (op, r) = (PhaseOpSpec::Identity, Nonlinearity::Identity);
        let oracle = dense_pipeline(&s, &frame, &cfg, &op, &r, &DenseGrid::default())?;
        let ks: Vec<usize> = (self.log2_k.0..=self.log2_k.1).map(|p| 1usize << p).collect();
        let mut errors = Vec::with_capacity(ks.len());
        for &k in &ks {
            let row: Vec<f64> = (0..self.seeds)
                .into_par_iter()
                .map(|j| -> Result<f64> {
                    let c = cfg.clone().with_samples(SampleCount::Fixed(k)).with_seed(self.seed + j as u64);
                    run_mc_pipeline(&s, &frame, &c, &op, &r)?.signal.relative_error(&oracle)
                })
                .collect::<Result<_>>()?;
            for (j, e) in row.iter().enumerate() {
                out.rows.push(ReportRow::info("mc_error", format!("M={};K={k};seed={}", self.m, self.seed + j as u64), "rel_err", *e));
            }
            errors.push(row);
        }
        let run = ConvergenceRun::new(ks, errors)?;
        let fit = run.fit()?;
        let p = format!("M={};K=2^{}..2^{};seeds={}", self.m, self.log2_k.0, self.log2_k.1, self.seeds);
        out.rows.push(ReportRow::within("mc_slope", p.clone(), "slope", fit.slope, -0.65, -0.35));
        out.rows.push(ReportRow::info("mc_slope", p, "slope_ci95", fit.ci95));
        Ok(out)
    }
}

/// Criterion 4: LTFT phase-space volume grows linearly in M and truncation
/// error is small and decreasing in W.
#[derive(Debug, Clone, PartialEq)]
pub struct LvdLinearity {
    pub ms: Vec<usize>,
    /// Transition frequencies in Hz, fixed across M.
    pub a: f64,
    pub b: f64,
    pub w: f64,
    pub sweep: Vec<f64>,
    pub sweep_m: usize,
    pub signals: usize,
    pub seed: u64,
    pub grid: DenseGrid,
}

impl Default for LvdLinearity {
    fn default() -> Self {
        Self {
            ms: vec![256, 512, 1024, 2048],
            a: 12.8,
            b: 102.4,
            w: 2.0,
            sweep: vec![1.0, 2.0, 4.0],
            sweep_m: 256,
            signals: 2,
            seed: 400,
            grid: DenseGrid::default(),
        }
    }
}

impl LvdLinearity {
    fn frame(&self, rate: f64) -> Result<(LtftParams, LtftFrame)> {
        let params = LtftParams::new(3.0, 8.0, Transition::Constant { a: self.a, b: self.b }, Window::Hann)?;
        Ok((params.clone(), LtftFrame::new(params, rate)?))
    }

    fn measure(&self, frame: &LtftFrame, params: &LtftParams, s: &Signal, m: usize, w: f64) -> Result<LvdReport> {
        let rate = m as f64;
        let d = ltft_domain(m, rate, w, params, Sidedness::TwoSided)?;
        let r = ltft_domain(m, rate, 4.0 * w, params, Sidedness::TwoSided)?;
        truncation_ratio(frame, s, &d, &r, &self.grid)
    }

    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(4, "linear volume discretization");
        let mut cvs = Vec::new();
        for &m in &self.ms {
            let (params, frame) = self.frame(m as f64)?;
            for i in 0..self.signals {
                let s = test_signal(m, m as f64, true, self.seed + i as u64)?;
                let rep = self.measure(&frame, &params, &s, m, self.w)?;
                let p = format!("M={m};R={m};W={};signal={i}", self.w);
                out.rows.push(ReportRow::below("lvd_truncation", p, "trunc_error", rep.trunc_error, 0.1));
                if i == 0 {
                    cvs.push(rep.ratio_cv);
                    out.rows.push(ReportRow::info("lvd_volume", format!("M={m};W={}", self.w), "ratio_Cv", rep.ratio_cv));
                }
                out.lvd.push(rep);
            }
        }
        let lo = cvs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cvs.iter().copied().fold(0.0, f64::max);
        let spread = (hi - lo) / lo;
        out.rows.push(ReportRow::below("lvd_volume", format!("M={:?}", self.ms), "ratio_Cv_spread", spread, 0.1));

        let m = self.sweep_m;
        let (params, frame) = self.frame(m as f64)?;
        for i in 0..self.signals {
            let s = test_signal(m, m as f64, true, self.seed + i as u64)?;
            let mut prev: Option<f64> = None;
            let mut first = None;
            for &w in &self.sweep {
                let rep = self.measure(&frame, &params, &s, m, w)?;
                let p = format!("M={m};W={w};signal={i}");
                out.rows.push(ReportRow::info("lvd_sweep", p.clone(), "trunc_error", rep.trunc_error));
                if let Some(pv) = prev {
                    let step = rep.trunc_error - pv;
                    out.rows.push(ReportRow::below("lvd_sweep", p, "increase_vs_previous_W", step, 1e-3));
                }
                first.get_or_insert(rep.trunc_error);
                prev = Some(rep.trunc_error);
                out.lvd.push(rep);
            }
            if let (Some(f), Some(l)) = (first, prev) {
                let p = format!("M={m};W={:?};signal={i}", self.sweep);
                out.rows.push(ReportRow::check("lvd_sweep", p, "last_minus_first", l - f, "< 0", l < f));
            }
        }
        Ok(out)
    }
}

/// Criterion 5: CWT domain volume bound and truncation for enveloped
/// trigonometric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtVolume {
    /// Trigonometric polynomial order.
    pub m: usize,
    pub w: f64,
    pub w_ref: f64,
    pub support: f64,
    /// Samples per unit time.
    pub rate: usize,
    pub class_c: f64,
    pub signals: usize,
    pub volume_ws: Vec<f64>,
    pub max_m: usize,
    pub seed: u64,
    pub grid: DenseGrid,
}

impl Default for CwtVolume {
    fn default() -> Self {
        Self {
            m: 256,
            w: 4.0,
            w_ref: 16.0,
            support: 0.5,
            rate: 2048,
            class_c: 100.0,
            signals: 3,
            volume_ws: vec![1.0, 2.0, 4.0],
            max_m: 4096,
            seed: 500,
            grid: DenseGrid::default(),
        }
    }
}

impl CwtVolume {
    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(5, "CWT volume bound");
        for &w in &self.volume_ws {
            let m0 = cwt_volume_threshold(w, self.support, self.max_m);
            let p = format!("W={w};S={};M<={}", self.support, self.max_m);
            out.rows.push(ReportRow::check("cwt_volume", p, "M0", m0.map_or(f64::NAN, |v| v as f64), "reported", m0.is_some()));
            if let Some(m0) = m0 {
                for m in [m0, self.m, self.max_m].into_iter().filter(|&m| m >= m0) {
                    let mu = cwt_measure(m, w, self.support);
                    let bound = 3.0 * w * m as f64;
                    let p = format!("W={w};S={};M={m}", self.support);
                    out.rows.push(ReportRow::check("cwt_volume", p, "measure", mu, format!("<= {bound}"), mu <= bound));
                }
            }
        }
        let domain = cwt_domain(self.m, self.w, self.support)?;
        let reference = cwt_domain(self.m, self.w_ref, self.support)?;
        let frame = CwtFrame::new(MotherWavelet::default_hann(), reference.min_abs_omega())?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut made = 0;
        while made < self.signals {
            let coeffs: Vec<Complex64> =
                (0..2 * self.m + 1).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let s = enveloped_trig_poly(&coeffs, &Window::Hann, self.rate)?;
            if !rc_membership(&s, &Window::Hann, self.class_c).member {
                continue;
            }
            let rep = truncation_ratio(&frame, &s, &domain, &reference, &self.grid)?;
            let p = format!("M={};W={};W_ref={};signal={made}", self.m, self.w, self.w_ref);
            out.rows.push(ReportRow::below("cwt_truncation", p, "trunc_error", rep.trunc_error, 0.15));
            out.lvd.push(rep);
            made += 1;
        }
        Ok(out)
    }
}

/// Criterion 6: the STFT with a unit-norm window is Parseval.
#[derive(Debug, Clone, PartialEq)]
pub struct StftParseval {
    pub m: usize,
    pub length: f64,
    pub w: f64,
    pub signals: usize,
    pub seed: u64,
    pub grid: DenseGrid,
}

impl Default for StftParseval {
    fn default() -> Self {
        Self { m: 256, length: 0.125, w: 2.0, signals: 5, seed: 600, grid: DenseGrid::default() }
    }
}

impl StftParseval {
    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(6, "STFT Parseval");
        let rate = self.m as f64;
        let frame = StftFrame::new(Window::Hann, self.length)?;
        for i in 0..self.signals {
            let s = test_signal(self.m, rate, false, self.seed + i as u64)?;
            let ratio = parseval_ratio(&frame, &s, &covering_domain(&frame, &s, self.w)?, &self.grid)?;
            let p = format!("M={};L={};signal={i}", self.m, self.length);
            out.rows.push(ReportRow::within("stft_parseval", p, "energy_ratio", ratio, 0.98, 1.02));
        }
        Ok(out)
    }
}

/// Criterion 7: the vocoder doubles duration without moving a tone, and
/// `Δ = 1` reproduces the input.
#[derive(Debug, Clone, PartialEq)]
pub struct VocoderSanity {
    pub rate: f64,
    pub m: usize,
    pub tone: f64,
    pub z: f64,
    pub seed: u64,
    pub shape: FrameShape,
}

impl Default for VocoderSanity {
    fn default() -> Self {
        Self { rate: 4096.0, m: 4096, tone: 440.0, z: 64.0, seed: 700, shape: FrameShape::default() }
    }
}

/// Frequency of the largest positive-frequency DFT bin and the bin width.
pub fn spectral_peak(s: &Signal) -> (f64, f64) {
    let sp = s.dft();
    let mut best = (0.0, 0.0);
    for j in 0..sp.len() {
        let (z, v) = (sp.freq(j), sp.bins()[j].norm());
        if z > 0.0 && v > best.1 {
            best = (z, v);
        }
    }
    (best.0, sp.bin_hz())
}

/// `10 log₁₀(‖reference‖² / ‖s − reference‖²)`.
pub fn snr_db(s: &Signal, reference: &Signal) -> Result<f64> {
    Ok(-20.0 * s.relative_error(reference)?.log10())
}

impl VocoderSanity {
    pub fn tone_signal(&self) -> Result<Signal> {
        let half = self.m as f64 / (2.0 * self.rate);
        let x: Vec<f64> = (0..=self.m).map(|i| (2.0 * PI * self.tone * (-half + i as f64 / self.rate)).sin()).collect();
        Signal::from_real(&x, self.rate, -half)
    }

    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(7, "vocoder sanity");
        let frame = LtftFrame::new(self.shape.at_rate(self.rate)?, self.rate)?;
        let s = self.tone_signal()?;
        let cfg = PipelineConfig::default().with_samples(SampleCount::PerVolume(self.z)).with_seed(self.seed);
        let p = format!("R={};M={};tone={};Z={}", self.rate, self.m, self.tone, self.z);

        let stretched = phase_vocoder(&s, &frame, 2, &cfg)?.signal;
        let dur = (stretched.len() - 1) as f64 / (s.len() - 1) as f64;
        out.rows.push(ReportRow::check("vocoder_stretch", format!("{p};delta=2"), "duration_ratio", dur, "= 2", (dur - 2.0).abs() < 1e-12));
        let (peak, bin) = spectral_peak(&stretched);
        let off = (peak - self.tone).abs();
        out.rows.push(ReportRow::check("vocoder_stretch", format!("{p};delta=2"), "peak_offset_hz", off, format!("<= {bin:.4} (one bin)"), off <= bin));

        let same = phase_vocoder(&s, &frame, 1, &cfg)?.signal;
        let snr = snr_db(&same, &s)?;
        out.rows.push(ReportRow::check("vocoder_identity", format!("{p};delta=1"), "snr_db", snr, "> 20", snr > 20.0));
        Ok(out)
    }
}

/// Criterion 8: measured per-sample work against the operation-count formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Complexity {
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub tau: (f64, f64),
    pub z: f64,
    pub seeds: usize,
    pub seed: u64,
}

impl Default for Complexity {
    fn default() -> Self {
        Self { m: 4096, alpha: 0.1, beta: 0.5, tau: (2.5, 7.5), z: 4.0, seeds: 20, seed: 800 }
    }
}

impl Complexity {
    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(8, "operation count");
        let rate = self.m as f64;
        let params = LtftParams::new(
            self.tau.0,
            self.tau.1,
            Transition::Constant { a: self.alpha * rate, b: self.beta * rate },
            Window::Hann,
        )?;
        let seeds: Vec<u64> = (0..self.seeds as u64).map(|j| self.seed + j).collect();
        let c = op_count(&params, rate, self.m, self.z, &seeds)?;
        let p = format!("M={};alpha={};beta={};tau={:?};Z={};seeds={}", self.m, self.alpha, self.beta, self.tau, self.z, self.seeds);
        out.rows.push(ReportRow::info("op_count", p.clone(), "predicted", c.predicted));
        out.rows.push(ReportRow::info("op_count", p.clone(), "measured_mean", c.measured));
        out.rows.push(ReportRow::within("op_count", p.clone(), "measured_over_predicted", c.ratio, 0.75, 1.25));
        out.rows.push(ReportRow::info("op_count", p, "fft_term", c.fft_term));
        Ok(out)
    }
}

/// Criterion 9: closed-form atom spectra agree with the DFT of sampled atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFtIdentity {
    pub rate: f64,
    pub points: usize,
    pub seed: u64,
    pub shape: FrameShape,
}

impl Default for AtomFtIdentity {
    fn default() -> Self {
        Self { rate: 1024.0, points: 20, seed: 900, shape: FrameShape::default() }
    }
}

/// `‖dft(sampled atom) − f̂‖ / ‖f̂‖` over the DFT bins. The lattice rate is a
/// power-of-two multiple of `rate` leaving 16 scale units between the atom
/// band and Nyquist, so aliasing stays negligible.
pub fn atom_ft_error(frame: &dyn Frame, p: &PhasePoint, rate: f64) -> Result<f64> {
    let atom = frame.atom(p)?;
    let mut fine = rate;
    while 0.5 * fine - atom.freq.abs() < 16.0 * atom.scale {
        fine *= 2.0;
    }
    let (lo, hi) = atom.support();
    let n = ((hi - lo) * fine).ceil() as usize + 16;
    let template = Signal::zeros(n, fine, lo - 8.0 / fine)?;
    let sp = atom.sampled_like(&template).dft();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, b) in sp.bins().iter().enumerate() {
        let exact = atom.ft(sp.freq(j));
        num += (b - exact).norm_sqr();
        den += exact.norm_sqr();
    }
    Ok((num / den).sqrt())
}

impl AtomFtIdentity {
    pub fn run(&self) -> Result<Outcome> {
        let mut out = Outcome::new(9, "atom Fourier transform");
        let params = self.shape.at_rate(self.rate)?;
        let frame = LtftFrame::with_filter(params.clone(), crate::frames::FrameFilter::constant(&params, 1.0, self.rate))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for i in 0..self.points {
            let p = PhasePoint::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5 * self.rate..0.5 * self.rate),
                rng.gen_range(params.tau_min..=params.tau_max),
            );
            let err = atom_ft_error(&frame, &p, self.rate)?;
            let label = format!("R={};point={i};x={:.4};omega={:.3};tau={:.3}", self.rate, p.x, p.omega, p.tau);
            out.rows.push(ReportRow::check("atom_ft", label, "rel_err", err, "<= 0.001", err <= 1e-3));
        }
        Ok(out)
    }
}
