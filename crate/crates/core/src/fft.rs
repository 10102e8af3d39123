//! Multidimensional FFTs over row-major buffers and the continuous-transform
//! scaling used throughout: Â(k) = ∫ A(r) e^{−ik·r} dr.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{ensure, Result};
use crate::grid::{GridSpec, ObjectField, Spectrum};

/// Columns gathered per batch when transforming a strided axis.
const BATCH: usize = 16;

/// In-place unnormalized DFT along every axis. `Forward` uses e^{−i…}.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    assert_eq!(data.len(), shape.iter().product::<usize>());
    let mut planner = FftPlanner::new();
    for axis in 0..shape.len() {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft(n, direction);
        let stride: usize = shape[axis + 1..].iter().product();
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * stride;
        let mut lines = vec![Complex64::default(); n * BATCH];
        for chunk in data.chunks_exact_mut(block) {
            for col0 in (0..stride).step_by(BATCH) {
                let width = BATCH.min(stride - col0);
                for i in 0..n {
                    let src = &chunk[i * stride + col0..i * stride + col0 + width];
                    for (b, v) in src.iter().enumerate() {
                        lines[b * n + i] = *v;
                    }
                }
                fft.process_with_scratch(&mut lines[..width * n], &mut scratch);
                for i in 0..n {
                    let dst = &mut chunk[i * stride + col0..i * stride + col0 + width];
                    for (b, v) in dst.iter_mut().enumerate() {
                        *v = lines[b * n + i];
                    }
                }
            }
        }
    }
}

/// Multiplies a row-major buffer by Π_a factors[a][i_a].
pub fn scale_separable(data: &mut [Complex64], shape: &[usize], factors: &[Vec<Complex64>]) {
    let dim = shape.len();
    assert_eq!(factors.len(), dim);
    assert!(factors.iter().zip(shape).all(|(f, &n)| f.len() == n));
    let last = &factors[dim - 1];
    let mut idx = vec![0usize; dim - 1];
    for row in data.chunks_exact_mut(shape[dim - 1]) {
        let outer: Complex64 = idx.iter().enumerate().map(|(a, &i)| factors[a][i]).product();
        for (v, f) in row.iter_mut().zip(last) {
            *v *= outer * f;
        }
        for a in (0..dim - 1).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Signed frequency index of natural-order DFT bin `m` on an axis of length `n`.
pub fn signed_bin(m: usize, n: usize) -> i64 {
    if m < n - n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// k-space spacing 2π/(n·h) of an `n`-point DFT of samples spaced `h`.
pub fn k_spacing(n: usize, h: f64) -> f64 {
    2.0 * std::f64::consts::PI / (n as f64 * h)
}

/// Continuous-transform samples of an object, zero-padded to `padded`, in
/// natural DFT order: entry `m` holds Â(k) at k_a = signed_bin(m_a)·2π/(padded_a·h_a).
pub fn object_transform_natural(object: &ObjectField, padded: &[usize]) -> Result<Vec<Complex64>> {
    let grid = object.grid();
    let dim = grid.dim();
    ensure!(padded.len() == dim, "padded shape {padded:?} has the wrong rank");
    ensure!(
        padded.iter().zip(grid.shape()).all(|(p, n)| p >= n),
        "padded shape {padded:?} is smaller than the object {:?}",
        grid.shape()
    );
    let total: usize = padded.iter().product();
    let mut buf = vec![Complex64::default(); total];
    let padded_grid = GridSpec::new(padded.to_vec(), grid.spacing().to_vec(), grid.origin().to_vec())?;
    for (flat, &v) in object.values().iter().enumerate() {
        if v != 0.0 {
            let idx = grid.unravel(flat);
            buf[padded_grid.ravel(&idx)] = Complex64::new(v, 0.0);
        }
    }
    fft_nd(&mut buf, padded, FftDirection::Forward);

    // Origin phase e^{−ik·origin}, separable per axis.
    let phases: Vec<Vec<Complex64>> = (0..dim)
        .map(|a| {
            let dk = k_spacing(padded[a], grid.spacing()[a]);
            (0..padded[a])
                .map(|m| Complex64::from_polar(1.0, -(signed_bin(m, padded[a]) as f64) * dk * grid.origin()[a]))
                .collect()
        })
        .collect();
    let scale = grid.cell_volume();
    for (flat, v) in buf.iter_mut().enumerate() {
        let idx = padded_grid.unravel(flat);
        let mut ph = Complex64::new(scale, 0.0);
        for a in 0..dim {
            ph *= phases[a][idx[a]];
        }
        *v *= ph;
    }
    Ok(buf)
}

/// Continuous-transform samples of an object on a centered k-grid of shape
/// `padded` (DC at `padded / 2`, spacing 2π/(padded·h)).
pub fn object_spectrum(object: &ObjectField, padded: &[usize]) -> Result<Spectrum> {
    let natural = object_transform_natural(object, padded)?;
    let grid = object.grid();
    let dk: Vec<f64> = padded
        .iter()
        .zip(grid.spacing())
        .map(|(&n, &h)| k_spacing(n, h))
        .collect();
    let kgrid = GridSpec::centered(padded.to_vec(), dk)?;
    let mut values = vec![Complex64::default(); natural.len()];
    for (flat, v) in natural.into_iter().enumerate() {
        let idx = kgrid.unravel(flat);
        let centered: Vec<usize> = idx
            .iter()
            .zip(padded)
            .map(|(&m, &n)| (signed_bin(m, n) + (n / 2) as i64) as usize)
            .collect();
        values[kgrid.ravel(&centered)] = v;
    }
    Spectrum::new(kgrid, values)
}
