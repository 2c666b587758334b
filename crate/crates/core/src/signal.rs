//! Uniformly sampled signals and the DFT grid convention.
//!
//! A [`Signal`] holds complex samples `s_n` at times `t_n = origin + n / rate`.
//! Norms use the quadrature weight `1/R`, so `‖s‖² = (1/R) Σ |s_n|²`
//! approximates the continuous `L²` energy. The DFT uses the matching
//! convention `ŝ(z_k) = (1/R) Σ s_n e^{-2πi z_k t_n}` on the centered bins
//! `z_k = k R / N`, `k ∈ [-N/2, N/2)`, which makes it unitary on the grid.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn fft_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Lowest centered bin index for a length-`n` DFT.
#[inline]
pub(crate) fn first_bin(n: usize) -> i64 {
    -(n as i64 / 2)
}

/// Bin frequency of raw FFT index `i` (wrapped to the centered range).
#[inline]
pub(crate) fn fft_index_freq(i: usize, n: usize, rate: f64) -> f64 {
    let k = if (i as i64) < n as i64 + first_bin(n) {
        i as i64
    } else {
        i as i64 - n as i64
    };
    k as f64 * rate / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<Complex64>,
    rate: f64,
    origin: f64,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, rate: f64, origin: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("sample rate must be positive, got {rate}")));
        }
        if samples.is_empty() {
            return Err(invalid("signal needs at least one sample"));
        }
        if !origin.is_finite() {
            return Err(invalid("origin must be finite"));
        }
        Ok(Self { samples, rate, origin })
    }

    /// Signal whose samples sit symmetrically about `t = 0`.
    pub fn centered(samples: Vec<Complex64>, rate: f64) -> Result<Self> {
        let origin = -((samples.len() as f64 - 1.0) / 2.0) / rate;
        Self::new(samples, rate, origin)
    }

    pub fn from_real(samples: &[f64], rate: f64, origin: f64) -> Result<Self> {
        Self::new(samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(), rate, origin)
    }

    pub fn zeros(len: usize, rate: f64, origin: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], rate, origin)
    }

    /// Zero signal on the same grid.
    pub fn zeros_like(&self) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); self.len()],
            rate: self.rate,
            origin: self.origin,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn time(&self, n: usize) -> f64 {
        self.origin + n as f64 / self.rate
    }

    /// Time of the last sample.
    pub fn end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    /// Fractional sample index of time `t`.
    #[inline]
    pub fn index_of(&self, t: f64) -> f64 {
        (t - self.origin) * self.rate
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.rate
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.samples.iter().all(|c| c.im.abs() <= tol * (1.0 + c.re.abs()))
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.re).collect()
    }

    pub fn scaled(mut self, k: f64) -> Self {
        for c in &mut self.samples {
            *c *= k;
        }
        self
    }

    /// `2·Re(s)`: recovers a real signal from its positive-frequency part.
    pub fn twice_real(mut self) -> Self {
        for c in &mut self.samples {
            *c = Complex64::new(2.0 * c.re, 0.0);
        }
        self
    }

    fn same_grid(&self, other: &Signal) -> bool {
        self.len() == other.len()
            && (self.rate - other.rate).abs() <= 1e-12 * self.rate
            && (self.origin - other.origin).abs() <= 1e-9 / self.rate
    }

    /// `‖self − other‖ / ‖other‖` on a shared grid.
    pub fn relative_error(&self, reference: &Signal) -> Result<f64> {
        if !self.same_grid(reference) {
            return Err(invalid("relative_error needs signals on the same grid"));
        }
        let num: f64 = self
            .samples
            .iter()
            .zip(&reference.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.samples.iter().map(|c| c.norm_sqr()).sum();
        if den == 0.0 {
            return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok((num / den).sqrt())
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        if !self.same_grid(other) {
            return Err(invalid("sub needs signals on the same grid"));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        Ok(Signal { samples, ..*self })
    }

    /// Zero-pads `before` and `after` samples, keeping sample times fixed.
    pub fn padded(&self, before: usize, after: usize) -> Signal {
        let mut samples = vec![Complex64::new(0.0, 0.0); before];
        samples.extend_from_slice(&self.samples);
        samples.resize(before + self.len() + after, Complex64::new(0.0, 0.0));
        Signal {
            samples,
            rate: self.rate,
            origin: self.origin - before as f64 / self.rate,
        }
    }

    /// `len` samples starting at index `start`.
    pub fn crop(&self, start: usize, len: usize) -> Result<Signal> {
        if start + len > self.len() || len == 0 {
            return Err(invalid(format!(
                "crop [{start}, {}) outside signal of length {}",
                start + len,
                self.len()
            )));
        }
        Ok(Signal {
            samples: self.samples[start..start + len].to_vec(),
            rate: self.rate,
            origin: self.time(start),
        })
    }

    pub fn dft(&self) -> Spectrum {
        let n = self.len();
        let mut buf = self.samples.clone();
        fft_forward(n).process(&mut buf);
        let k0 = first_bin(n);
        let bin_hz = self.rate / n as f64;
        let bins = (0..n)
            .map(|j| {
                let k = k0 + j as i64;
                let idx = k.rem_euclid(n as i64) as usize;
                let z = k as f64 * bin_hz;
                buf[idx] * Complex64::from_polar(1.0 / self.rate, -2.0 * PI * z * self.origin)
            })
            .collect();
        Spectrum { bins, bin_hz, rate: self.rate, origin: self.origin }
    }

    /// Multiplies the spectrum by a real response `g(z)` (circular on the grid).
    pub fn filter_real<F: Fn(f64) -> f64>(&self, g: F) -> Signal {
        let n = self.len();
        let mut buf = self.samples.clone();
        fft_forward(n).process(&mut buf);
        for (i, c) in buf.iter_mut().enumerate() {
            *c *= g(fft_index_freq(i, n, self.rate)) / n as f64;
        }
        fft_inverse(n).process(&mut buf);
        Signal { samples: buf, rate: self.rate, origin: self.origin }
    }

    /// Circular translation by `x` seconds: exact sample shift when `x·R`
    /// is an integer, otherwise a band-limited phase ramp.
    pub fn translate(&self, x: f64) -> Signal {
        let n = self.len();
        let shift = x * self.rate;
        if (shift - shift.round()).abs() < 1e-12 {
            let k = (shift.round() as i64).rem_euclid(n as i64) as usize;
            let mut samples = vec![Complex64::new(0.0, 0.0); n];
            for (i, &c) in self.samples.iter().enumerate() {
                samples[(i + k) % n] = c;
            }
            return Signal { samples, ..*self };
        }
        let mut buf = self.samples.clone();
        fft_forward(n).process(&mut buf);
        for (i, c) in buf.iter_mut().enumerate() {
            let z = fft_index_freq(i, n, self.rate);
            *c *= Complex64::from_polar(1.0 / n as f64, -2.0 * PI * z * x);
        }
        fft_inverse(n).process(&mut buf);
        Signal { samples: buf, ..*self }
    }

    /// Multiplication by `e^{2πiωt}` at the sample times.
    pub fn modulate(&self, omega: f64) -> Signal {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex64::from_polar(1.0, 2.0 * PI * omega * self.time(i)))
            .collect();
        Signal { samples, ..*self }
    }

    /// `|τ|^{-1/2} s(t/τ)` evaluated through the trigonometric interpolant
    /// of `s`. Quadratic in the signal length.
    pub fn dilate(&self, tau: f64) -> Result<Signal> {
        if tau == 0.0 || !tau.is_finite() {
            return Err(invalid("dilation parameter must be finite and nonzero"));
        }
        let spec = self.dft();
        let amp = tau.abs().powf(-0.5);
        let samples = (0..self.len())
            .map(|i| amp * spec.interpolate(self.time(i) / tau))
            .collect();
        Ok(Signal { samples, ..*self })
    }

    /// Integer-factor band-limited upsampling (spectral zero padding).
    pub fn upsample(&self, factor: usize) -> Signal {
        if factor <= 1 {
            return self.clone();
        }
        let n = self.len();
        let m = n * factor;
        let mut buf = self.samples.clone();
        fft_forward(n).process(&mut buf);
        let mut big = vec![Complex64::new(0.0, 0.0); m];
        let k0 = first_bin(n);
        for j in 0..n {
            let k = k0 + j as i64;
            let src = k.rem_euclid(n as i64) as usize;
            let dst = k.rem_euclid(m as i64) as usize;
            big[dst] = buf[src] / n as f64;
        }
        fft_inverse(m).process(&mut big);
        Signal { samples: big, rate: self.rate * factor as f64, origin: self.origin }
    }

    /// Integer-factor decimation after an ideal low-pass to the new Nyquist band.
    pub fn downsample(&self, factor: usize) -> Result<Signal> {
        if factor <= 1 {
            return Ok(self.clone());
        }
        let m = self.len();
        if !m.is_multiple_of(factor) {
            return Err(invalid(format!("length {m} not divisible by {factor}")));
        }
        let n = m / factor;
        let mut buf = self.samples.clone();
        fft_forward(m).process(&mut buf);
        let mut small = vec![Complex64::new(0.0, 0.0); n];
        let k0 = first_bin(n);
        for j in 0..n {
            let k = k0 + j as i64;
            small[k.rem_euclid(n as i64) as usize] = buf[k.rem_euclid(m as i64) as usize] / m as f64;
        }
        fft_inverse(n).process(&mut small);
        Signal::new(small, self.rate / factor as f64, self.origin)
    }

    /// Adds `other`, which must share rate and lie on the same time lattice.
    pub fn add_assign_aligned(&mut self, other: &Signal) -> Result<()> {
        let off = self.index_of(other.origin);
        if (off - off.round()).abs() > 1e-6 || (other.rate - self.rate).abs() > 1e-9 * self.rate {
            return Err(invalid("signals are not on a shared lattice"));
        }
        let off = off.round() as i64;
        for (i, &c) in other.samples.iter().enumerate() {
            let j = off + i as i64;
            if j >= 0 && (j as usize) < self.len() {
                self.samples[j as usize] += c;
            }
        }
        Ok(())
    }
}

/// Centered DFT of a [`Signal`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    bin_hz: f64,
    rate: f64,
    origin: f64,
}

impl Spectrum {
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bin_hz(&self) -> f64 {
        self.bin_hz
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Frequency of the `j`-th stored (centered) bin.
    pub fn freq(&self, j: usize) -> f64 {
        (first_bin(self.len()) + j as i64) as f64 * self.bin_hz
    }

    /// Index of the bin at frequency `z`, if `z` lies on the grid.
    pub fn bin_of(&self, z: f64) -> Option<usize> {
        let k = (z / self.bin_hz).round();
        if (z / self.bin_hz - k).abs() > 1e-9 {
            return None;
        }
        let j = k as i64 - first_bin(self.len());
        (j >= 0 && (j as usize) < self.len()).then_some(j as usize)
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.bin_hz
    }

    /// Trigonometric interpolant `Σ ŝ_k e^{2πi z_k t} · Δz` at time `t`.
    pub fn interpolate(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &b) in self.bins.iter().enumerate() {
            acc += b * Complex64::from_polar(1.0, 2.0 * PI * self.freq(j) * t);
        }
        acc * self.bin_hz
    }

    pub fn idft(&self) -> Signal {
        let n = self.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, &b) in self.bins.iter().enumerate() {
            let k = first_bin(n) + j as i64;
            let z = k as f64 * self.bin_hz;
            buf[k.rem_euclid(n as i64) as usize] =
                b * Complex64::from_polar(self.rate / n as f64, 2.0 * PI * z * self.origin);
        }
        fft_inverse(n).process(&mut buf);
        Signal { samples: buf, rate: self.rate, origin: self.origin }
    }
}

/// Random smooth signal on the canonical support `[-M/(2R), M/(2R)]`
/// (`M + 1` samples) whose spectrum is concentrated in `|z| ≤ max_freq`.
///
/// A sum of `tones` random-amplitude tones, tapered by a raised cosine so
/// that spectral leakage decays quickly. With `real = true` the result is
/// real valued; otherwise tones are drawn on both sides of zero.
pub fn bandlimited_signal(
    m: usize,
    rate: f64,
    max_freq: f64,
    tones: usize,
    real: bool,
    seed: u64,
) -> Result<Signal> {
    if m == 0 || max_freq <= 0.0 {
        return Err(invalid("bandlimited_signal needs m ≥ 1 and max_freq > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m + 1;
    let half = m as f64 / (2.0 * rate);
    let comps: Vec<(f64, Complex64)> = (0..tones.max(1))
        .map(|_| {
            let f = if real {
                rng.gen_range(0.0..max_freq)
            } else {
                rng.gen_range(-max_freq..max_freq)
            };
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (f, a)
        })
        .collect();
    let samples = (0..n)
        .map(|i| {
            let t = -half + i as f64 / rate;
            let taper = (PI * (t + half) / (2.0 * half).max(1.0 / rate)).sin().powi(2);
            let mut v = Complex64::new(0.0, 0.0);
            for &(f, a) in &comps {
                let e = a * Complex64::from_polar(1.0, 2.0 * PI * f * t);
                v += if real { Complex64::new(e.re, 0.0) } else { e };
            }
            v * taper
        })
        .collect();
    Signal::new(samples, rate, -half)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_signal(n: usize, seed: u64) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Signal::new(s, 64.0, -0.3).unwrap()
    }

    #[test]
    fn rejects_bad_rate_and_empty() {
        assert!(Signal::new(vec![], 1.0, 0.0).is_err());
        assert!(Signal::new(vec![Complex64::new(1.0, 0.0)], 0.0, 0.0).is_err());
    }

    #[test]
    fn dc_signal_has_all_energy_at_zero() {
        let s = Signal::centered(vec![Complex64::new(1.0, 0.0); 8], 8.0).unwrap();
        let sp = s.dft();
        let j0 = sp.bin_of(0.0).unwrap();
        for (j, b) in sp.bins().iter().enumerate() {
            if j == j0 {
                assert!((b.norm() - 1.0).abs() < 1e-12);
            } else {
                assert!(b.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_tone_has_single_bin() {
        let n = 32;
        let rate = 32.0;
        let duration = n as f64 / rate;
        let s = Signal::new(
            (0..n)
                .map(|i| Complex64::from_polar(1.0, 2.0 * PI * 4.0 * (i as f64 / rate) / duration))
                .collect(),
            rate,
            0.0,
        )
        .unwrap();
        let sp = s.dft();
        let j = sp.bin_of(4.0 / duration).unwrap();
        for (i, b) in sp.bins().iter().enumerate() {
            assert_eq!(b.norm() > 1e-9, i == j);
        }
    }

    #[test]
    fn round_trip_and_plancherel() {
        let s = random_signal(64, 1);
        let sp = s.dft();
        let back = sp.idft();
        assert!(back.relative_error(&s).unwrap() < 1e-12);
        assert!((sp.energy() - s.energy()).abs() < 1e-10 * s.energy());
    }

    #[test]
    fn integer_translation_moves_delta() {
        let mut v = vec![Complex64::new(0.0, 0.0); 16];
        v[0] = Complex64::new(1.0, 0.0);
        let s = Signal::new(v, 10.0, 0.0).unwrap();
        let t = s.translate(3.0 / 10.0);
        assert!((t.samples()[3].re - 1.0).abs() < 1e-15);
        assert!((t.energy() - s.energy()).abs() < 1e-15);
    }

    #[test]
    fn modulate_constant_gives_tone() {
        let rate = 16.0;
        let s = Signal::new(vec![Complex64::new(1.0, 0.0); 16], rate, 0.0).unwrap();
        let m = s.modulate(rate / 4.0);
        let sp = m.dft();
        let j = sp.bin_of(rate / 4.0).unwrap();
        assert!((sp.bins()[j].norm() - 1.0).abs() < 1e-12);
        assert!((m.energy() - s.energy()).abs() < 1e-12);
    }

    #[test]
    fn dilate_rejects_zero() {
        let s = random_signal(8, 3);
        assert!(s.dilate(0.0).is_err());
    }

    #[test]
    fn up_and_down_sampling_round_trip() {
        let s = bandlimited_signal(64, 64.0, 8.0, 4, false, 5).unwrap();
        let up = s.upsample(3);
        assert_eq!(up.len(), 3 * s.len());
        assert!((up.energy() - s.energy()).abs() < 1e-6 * s.energy());
        let down = up.downsample(3).unwrap();
        assert!(down.relative_error(&s).unwrap() < 1e-10);
    }

    #[test]
    fn padding_keeps_times() {
        let s = random_signal(10, 2);
        let p = s.padded(3, 4);
        assert_eq!(p.len(), 17);
        assert!((p.time(3) - s.time(0)).abs() < 1e-15);
        let c = p.crop(3, 10).unwrap();
        assert!(c.relative_error(&s).unwrap() == 0.0);
    }
}
