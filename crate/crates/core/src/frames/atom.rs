use std::f64::consts::PI;

use num_complex::Complex64;

use crate::signal::Signal;
use crate::window::Window;

/// A time-frequency atom of the form
/// `amp · w(scale·(t − x)) · (e^{2πi·freq·(t − x)} − dc)`.
///
/// Every family in this crate (STFT, CWT, LTFT) produces atoms of this shape;
/// `dc` is nonzero only for DC-compensated mother wavelets.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub center: f64,
    pub scale: f64,
    pub amp: f64,
    pub freq: f64,
    pub dc: f64,
    pub window: Window,
}

impl Atom {
    /// Support half-width in seconds.
    #[inline]
    pub fn half_width(&self) -> f64 {
        0.5 / self.scale
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width(), self.center + self.half_width())
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        let u = t - self.center;
        let w = self.window.eval(self.scale * u);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (Complex64::from_polar(1.0, 2.0 * PI * self.freq * u) - self.dc) * (self.amp * w)
    }

    /// Closed-form Fourier transform
    /// `(amp/scale)·[ŵ((z − freq)/scale) − dc·ŵ(z/scale)]·e^{−2πixz}`.
    pub fn ft(&self, z: f64) -> Complex64 {
        let mut v = self.window.ft((z - self.freq) / self.scale);
        if self.dc != 0.0 {
            v -= self.dc * self.window.ft(z / self.scale);
        }
        v * Complex64::from_polar(self.amp / self.scale, -2.0 * PI * self.center * z)
    }

    /// Number of lattice points `n / rate` inside the support (unclipped).
    pub fn support_samples(&self, rate: f64) -> usize {
        let (lo, hi) = self.support();
        let first = (lo * rate).ceil();
        let last = (hi * rate).floor();
        if last < first {
            0
        } else {
            (last - first) as usize + 1
        }
    }

    /// Sample index range of `grid` covered by the support, clipped to the grid.
    fn index_range(&self, origin: f64, rate: f64, len: usize) -> Option<(usize, usize)> {
        let (lo, hi) = self.support();
        let first = ((lo - origin) * rate).ceil().max(0.0);
        let last = ((hi - origin) * rate).floor().min(len as f64 - 1.0);
        if last < first {
            return None;
        }
        Some((first as usize, last as usize))
    }

    /// Walks the samples of the support on a lattice, calling
    /// `visit(index, atom value)`.
    #[inline]
    fn walk<F: FnMut(usize, Complex64)>(&self, origin: f64, rate: f64, len: usize, mut visit: F) -> usize {
        let Some((i0, i1)) = self.index_range(origin, rate, len) else {
            return 0;
        };
        let dt = 1.0 / rate;
        let u0 = origin + i0 as f64 * dt - self.center;
        match self.window {
            Window::Hann => {
                // Rotator recurrences for the carrier and the raised cosine.
                let mut carrier = Complex64::from_polar(1.0, 2.0 * PI * self.freq * u0);
                let step_c = Complex64::from_polar(1.0, 2.0 * PI * self.freq * dt);
                let mut env = Complex64::from_polar(1.0, 2.0 * PI * self.scale * u0);
                let step_e = Complex64::from_polar(1.0, 2.0 * PI * self.scale * dt);
                let half_amp = 0.5 * self.amp;
                for i in i0..=i1 {
                    let w = half_amp * (1.0 + env.re);
                    visit(i, (carrier - self.dc) * w);
                    carrier *= step_c;
                    env *= step_e;
                    if (i - i0) % 256 == 255 {
                        carrier /= carrier.norm();
                        env /= env.norm();
                    }
                }
            }
            Window::Table(_) => {
                for i in i0..=i1 {
                    let u = u0 + (i - i0) as f64 * dt;
                    visit(i, self.eval(u + self.center));
                }
            }
        }
        i1 - i0 + 1
    }

    /// Rectangle-rule inner product `⟨s, f⟩ = (1/R) Σ s(t_n)·conj(f(t_n))`
    /// over the support samples. Returns the coefficient and the number of
    /// samples visited.
    pub fn analyze(&self, s: &Signal) -> (Complex64, usize) {
        let samples = s.samples();
        let mut acc = Complex64::new(0.0, 0.0);
        let n = self.walk(s.origin(), s.rate(), s.len(), |i, f| {
            acc += samples[i] * f.conj();
        });
        (acc / s.rate(), n)
    }

    /// `out += coeff · f` on the lattice described by `(origin, rate)`.
    pub fn synthesize_into(&self, out: &mut [Complex64], origin: f64, rate: f64, coeff: Complex64) -> usize {
        if coeff == Complex64::new(0.0, 0.0) {
            return 0;
        }
        let len = out.len();
        self.walk(origin, rate, len, |i, f| {
            out[i] += coeff * f;
        })
    }

    /// Discretized atom on the lattice of `template`.
    pub fn sampled_like(&self, template: &Signal) -> Signal {
        let mut out = template.zeros_like();
        let (o, r) = (out.origin(), out.rate());
        self.synthesize_into(out.samples_mut(), o, r, Complex64::new(1.0, 0.0));
        out
    }

    /// `‖f‖²` from the window energy (exact when `dc = 0`).
    pub fn norm_sqr(&self) -> f64 {
        if self.dc == 0.0 {
            self.amp * self.amp * self.window.energy() / self.scale
        } else {
            // fall back to quadrature on a fine lattice
            let rate = 4096.0 * self.scale;
            let mut buf = vec![Complex64::new(0.0, 0.0); 4098];
            let origin = self.center - self.half_width() - 1.0 / rate;
            self.synthesize_into(&mut buf, origin, rate, Complex64::new(1.0, 0.0));
            buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / rate
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(window: Window) -> Atom {
        Atom { center: 0.013, scale: 7.0, amp: 1.3, freq: 31.0, dc: 0.0, window }
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let a = atom(Window::Hann);
        let s = Signal::zeros(4000, 2000.0, -1.0).unwrap();
        let fast = a.sampled_like(&s);
        for (i, v) in fast.samples().iter().enumerate() {
            let direct = a.eval(s.time(i));
            assert!((v - direct).norm() < 1e-11, "sample {i}");
        }
    }

    #[test]
    fn norm_matches_quadrature() {
        let a = atom(Window::Hann);
        let s = Signal::zeros(40_000, 20_000.0, -1.0).unwrap();
        let e = a.sampled_like(&s).energy();
        assert!((e - a.norm_sqr()).abs() < 1e-6);
    }

    #[test]
    fn support_count() {
        let a = Atom { center: 0.0, scale: 2.0, amp: 1.0, freq: 0.0, dc: 0.0, window: Window::Hann };
        // support [-0.25, 0.25] at rate 8 → points -2..=2
        assert_eq!(a.support_samples(8.0), 5);
    }
}
