//! Cosine sums at uniform sample indices from nonuniform frequencies,
//! evaluated with Gaussian gridding (type-1 nonuniform FFT).
//!
//! Computes out[j] = Σ_b c_b cos(j x_b) for j = 0..n, where the x_b are fixed
//! at construction and the coefficients change per call.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Oversampling ratio of the fine grid.
const RATIO: usize = 2;
/// Kernel half-width in fine-grid cells.
const SPREAD: usize = 12;

pub struct CosineSynth {
    n: usize,
    fine: usize,
    start: Vec<usize>,
    weights: Vec<f64>,
    deconv: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl CosineSynth {
    /// Prepares evaluation of `n` outputs for the frequencies `x` (radians per index).
    pub fn new(x: &[f64], n: usize) -> Self {
        let modes = (2 * n).max(2 * SPREAD);
        let fine = RATIO * modes;
        let tau = PI * SPREAD as f64 / ((modes * modes) as f64 * RATIO as f64 * (RATIO as f64 - 0.5));
        let h = 2.0 * PI / fine as f64;
        let width = 2 * SPREAD;
        let mut start = Vec::with_capacity(x.len());
        let mut weights = Vec::with_capacity(x.len() * width);
        for &xb in x {
            let xr = xb.rem_euclid(2.0 * PI);
            let m0 = (xr / h).floor() as i64 - SPREAD as i64 + 1;
            start.push(m0.rem_euclid(fine as i64) as usize);
            for l in 0..width as i64 {
                let d = xr - (m0 + l) as f64 * h;
                weights.push((-d * d / (4.0 * tau)).exp());
            }
        }
        let norm = h / (4.0 * PI * tau).sqrt();
        let deconv = (0..n).map(|j| norm * ((j * j) as f64 * tau).exp()).collect();
        let fft = FftPlanner::new().plan_fft_inverse(fine);
        Self {
            n,
            fine,
            start,
            weights,
            deconv,
            fft,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Scratch buffer sized for [`CosineSynth::eval`].
    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.fine + self.fft.get_inplace_scratch_len()]
    }

    /// Writes Σ_b coeffs[b]·cos(j x_b) into `out[j]`.
    pub fn eval(&self, coeffs: &[f64], out: &mut [f64], scratch: &mut [Complex64]) {
        assert_eq!(coeffs.len(), self.start.len());
        assert_eq!(out.len(), self.n);
        let (grid, fft_scratch) = scratch.split_at_mut(self.fine);
        grid.iter_mut().for_each(|v| *v = Complex64::default());
        let width = 2 * SPREAD;
        for (b, (&c, &m0)) in coeffs.iter().zip(&self.start).enumerate() {
            if c == 0.0 {
                continue;
            }
            let w = &self.weights[b * width..(b + 1) * width];
            if m0 + width <= self.fine {
                for (g, &wl) in grid[m0..m0 + width].iter_mut().zip(w) {
                    g.re += c * wl;
                }
            } else {
                for (l, &wl) in w.iter().enumerate() {
                    grid[(m0 + l) % self.fine].re += c * wl;
                }
            }
        }
        self.fft.process_with_scratch(grid, fft_scratch);
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.deconv[j] * grid[j].re;
        }
    }
}
