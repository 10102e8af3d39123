//! Pressure data from an object: the k-space imaging model, a closed-form
//! uniform-sphere solution, and additive noise.
//!
//! The k-space model evaluates
//!
//! p(r_s, t) = K (Δk/2π)^d Σ_k Â(k) cos(c|k|t) e^{ik·r_s},  K = βc²/C_p,
//!
//! on the DFT grid of the object zero-padded far enough that periodic images
//! cannot reach any sensor within the record. The sum runs over the ball
//! |k| < π/Δx. Wave vectors are grouped into shells of equal |k|, so each
//! sensor needs one pass over k-space followed by a nonuniform cosine
//! synthesis in time.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::acquisition::{AcousticConstants, PressureSeries, TimeAxis};
use crate::error::{ensure, PactError, Result};
use crate::fft::{k_spacing, object_transform_natural, signed_bin};
use crate::geometry::SensorGeometry;
use crate::grid::ObjectField;
use crate::nufft::CosineSynth;
use crate::special::sine_integral;

/// Upper bound on padded grid samples (about 1.5 GB of complex values).
const MAX_PADDED_LEN: usize = 100_000_000;

/// Object spectrum on the half ball, grouped into shells of equal |k|.
pub struct SpectralModel {
    dim: usize,
    c: f64,
    /// K (Δk/2π)^d.
    scale: f64,
    /// Per-axis signed frequency indices, `dim` per point.
    index: Vec<i32>,
    /// Â at each point, doubled off the origin to account for the other half.
    values: Vec<Complex64>,
    shell: Vec<u32>,
    /// |k| of each shell (rad/mm).
    shell_k: Vec<f64>,
    padded: usize,
    dk: f64,
}

impl SpectralModel {
    /// Transforms `object` on a grid large enough that sources are free of
    /// periodic images out to distance `reach` (mm) from the origin. With
    /// `k_max`, wave vectors with |k| > k_max are dropped as well, which
    /// low-passes every trace at ω = c·k_max.
    pub fn new(object: &ObjectField, consts: &AcousticConstants, reach: f64, k_max: Option<f64>) -> Result<Self> {
        let grid = object.grid();
        let dim = grid.dim();
        ensure!(
            grid.is_isotropic(),
            "the k-space forward model needs isotropic grid spacing"
        );
        let h = grid.spacing()[0];
        let needed = ((reach + grid.max_corner_radius()) / h).ceil() as usize + 4;
        let base = needed.max(*grid.shape().iter().max().unwrap());
        let padded = next_smooth(base + base % 2);
        ensure!(
            padded.pow(dim as u32) <= MAX_PADDED_LEN,
            "forward model needs a {padded}^{dim} transform; use a coarser grid or a shorter record"
        );
        let shape = vec![padded; dim];
        let natural = object_transform_natural(object, &shape)?;
        let dk = k_spacing(padded, h);
        let half = (padded / 2) as i64;
        let limit = (half * half) as u64;

        let mut shell_of_q = vec![u32::MAX; limit as usize];
        let mut qs = Vec::new();
        let mut index = Vec::new();
        let mut values = Vec::new();
        let mut shell_q = Vec::new();
        let mut m = vec![0i64; dim];
        for (flat, v) in natural.iter().enumerate() {
            let mut rest = flat;
            for a in (0..dim).rev() {
                m[a] = signed_bin(rest % padded, padded);
                rest /= padded;
            }
            let q: u64 = m.iter().map(|&x| (x * x) as u64).sum();
            if q >= limit || k_max.is_some_and(|km| dk * (q as f64).sqrt() > km) {
                continue;
            }
            let weight = match m.iter().find(|&&x| x != 0) {
                None => 1.0,
                Some(&x) if x > 0 => 2.0,
                Some(_) => continue,
            };
            index.extend(m.iter().map(|&x| x as i32));
            values.push(v * weight);
            shell_q.push(q);
            if shell_of_q[q as usize] == u32::MAX {
                shell_of_q[q as usize] = 0;
                qs.push(q);
            }
        }
        qs.sort_unstable();
        for (i, &q) in qs.iter().enumerate() {
            shell_of_q[q as usize] = i as u32;
        }
        let shell = shell_q.iter().map(|&q| shell_of_q[q as usize]).collect();
        let shell_k = qs.iter().map(|&q| dk * (q as f64).sqrt()).collect();
        let scale = consts.pressure_scale() * (dk / (2.0 * std::f64::consts::PI)).powi(dim as i32);
        Ok(Self {
            dim,
            c: consts.c(),
            scale,
            index,
            values,
            shell,
            shell_k,
            padded,
            dk,
        })
    }

    /// Side length of the padded transform.
    pub fn padded_len(&self) -> usize {
        self.padded
    }

    pub fn num_shells(&self) -> usize {
        self.shell_k.len()
    }

    /// Σ over each shell of Re(Â(k) e^{ik·r}), in shell order.
    fn shell_sums(&self, r: &[f64]) -> Vec<f64> {
        let half = (self.padded / 2) as i64;
        let tables: Vec<Vec<Complex64>> = r
            .iter()
            .map(|&x| {
                (-half..=half)
                    .map(|m| Complex64::from_polar(1.0, m as f64 * self.dk * x))
                    .collect()
            })
            .collect();
        let off = half as i32;
        let mut sums = vec![0.0; self.shell_k.len()];
        let d = self.dim;
        for ((idx, v), &b) in self.index.chunks_exact(d).zip(&self.values).zip(&self.shell) {
            let mut z = *v * tables[0][(idx[0] + off) as usize];
            for a in 1..d - 1 {
                z *= tables[a][(idx[a] + off) as usize];
            }
            let e = tables[d - 1][(idx[d - 1] + off) as usize];
            sums[b as usize] += z.re * e.re - z.im * e.im;
        }
        sums
    }

    /// Pressure at `r` for arbitrary (possibly negative) times, by direct
    /// summation over shells.
    pub fn pressure_at(&self, r: &[f64], times: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.dim);
        let sums = self.shell_sums(r);
        times
            .iter()
            .map(|&t| {
                let acc: f64 = sums
                    .iter()
                    .zip(&self.shell_k)
                    .map(|(s, k)| s * (self.c * k * t).cos())
                    .sum();
                self.scale * acc
            })
            .collect()
    }
}

/// Smallest 2^a 3^b 5^c ≥ n.
fn next_smooth(n: usize) -> usize {
    (n.max(1)..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .unwrap()
}

fn check_support_inside(object: &ObjectField, geom: &SensorGeometry) -> Result<()> {
    let grid = object.grid();
    ensure!(
        grid.dim() == geom.dim(),
        "object is {}D but the sensors are {}D",
        grid.dim(),
        geom.dim()
    );
    let r2 = geom.radius() * geom.radius();
    for (flat, &v) in object.values().iter().enumerate() {
        if v != 0.0 {
            let p = grid.position(flat);
            let d2: f64 = p.iter().map(|x| x * x).sum();
            ensure!(
                d2 < r2,
                "object support reaches {:.4} mm, not inside the aperture of radius {}",
                d2.sqrt(),
                geom.radius()
            );
        }
    }
    Ok(())
}

/// Simulated pressure traces at every sensor from the k-space imaging model.
pub fn spectral_forward(
    object: &ObjectField,
    geom: &SensorGeometry,
    time: TimeAxis,
    consts: &AcousticConstants,
) -> Result<PressureSeries> {
    spectral_forward_band(object, geom, time, consts, None)
}

/// [`spectral_forward`] restricted to |k| ≤ `k_max` when given.
pub fn spectral_forward_band(
    object: &ObjectField,
    geom: &SensorGeometry,
    time: TimeAxis,
    consts: &AcousticConstants,
    k_max: Option<f64>,
) -> Result<PressureSeries> {
    check_support_inside(object, geom)?;
    let reach = consts.c() * time.t_max() + geom.radius();
    let model = SpectralModel::new(object, consts, reach, k_max)?;
    let x: Vec<f64> = model.shell_k.iter().map(|k| model.c * k * time.dt()).collect();
    let synth = CosineSynth::new(&x, time.nt());
    let traces: Vec<Vec<f64>> = (0..geom.len())
        .into_par_iter()
        .map_init(
            || synth.scratch(),
            |scratch, s| {
                let sums = model.shell_sums(geom.position(s));
                let mut trace = vec![0.0; time.nt()];
                synth.eval(&sums, &mut trace, scratch);
                trace.iter_mut().for_each(|v| *v *= model.scale);
                trace
            },
        )
        .collect();
    PressureSeries::new(geom.clone(), time, traces.concat())
}

/// Closed-form traces of a uniformly heated sphere: initial pressure
/// p0 = K·A0 inside radius `a`, observed as the N-wave
/// p(d, t) = p0 (d − ct)/(2d) for |d − ct| ≤ a, with d the sensor distance.
pub fn analytic_sphere_forward(
    center: [f64; 3],
    a: f64,
    amplitude: f64,
    geom: &SensorGeometry,
    time: TimeAxis,
    consts: &AcousticConstants,
) -> Result<PressureSeries> {
    sphere_traces(center, a, amplitude, geom, time, consts, |d, t, p0, c| {
        let u = d - c * t;
        if u.abs() <= a {
            p0 * u / (2.0 * d)
        } else {
            0.0
        }
    })
}

/// The uniform-sphere traces passed through an ideal low-pass filter with
/// cutoff `omega_max` (rad/μs) before sampling. With `omega_max = π/dt` the
/// samples are free of aliasing from the N-wave discontinuities.
pub fn analytic_sphere_forward_bandlimited(
    center: [f64; 3],
    a: f64,
    amplitude: f64,
    geom: &SensorGeometry,
    time: TimeAxis,
    consts: &AcousticConstants,
    omega_max: f64,
) -> Result<PressureSeries> {
    ensure!(
        omega_max.is_finite() && omega_max > 0.0,
        "cutoff frequency must be positive"
    );
    let w = omega_max;
    sphere_traces(center, a, amplitude, geom, time, consts, |d, t, p0, c| {
        // p = α + βτ on τ ∈ [τ1, τ2], convolved with sin(wτ)/(πτ).
        let alpha = 0.5 * p0;
        let beta = -0.5 * p0 * c / d;
        let (s1, s2) = (t - (d - a) / c, t - (d + a) / c);
        (alpha + beta * t) / PI * (sine_integral(w * s1) - sine_integral(w * s2))
            + beta / (PI * w) * ((w * s1).cos() - (w * s2).cos())
    })
}

fn sphere_traces(
    center: [f64; 3],
    a: f64,
    amplitude: f64,
    geom: &SensorGeometry,
    time: TimeAxis,
    consts: &AcousticConstants,
    trace: impl Fn(f64, f64, f64, f64) -> f64,
) -> Result<PressureSeries> {
    if geom.dim() != 3 {
        return Err(PactError::UnsupportedDimension(geom.dim()));
    }
    ensure!(a.is_finite() && a > 0.0, "sphere radius must be positive");
    ensure!(amplitude.is_finite(), "sphere amplitude is not finite");
    let off = center.iter().map(|x| x * x).sum::<f64>().sqrt();
    ensure!(
        off + a < geom.radius(),
        "sphere reaches {} mm, not inside the aperture of radius {}",
        off + a,
        geom.radius()
    );
    let p0 = consts.pressure_scale() * amplitude;
    let c = consts.c();
    let mut samples = Vec::with_capacity(geom.len() * time.nt());
    for r in geom.positions() {
        let d = r
            .iter()
            .zip(&center)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        samples.extend((0..time.nt()).map(|j| trace(d, time.time(j), p0, c)));
    }
    PressureSeries::new(geom.clone(), time, samples)
}

/// Adds i.i.d. Gaussian noise with σ = level · max|p| over the whole data set.
pub fn add_noise(data: &PressureSeries, level: f64, seed: u64) -> Result<PressureSeries> {
    ensure!(
        level.is_finite() && level >= 0.0,
        "noise level must be >= 0, got {level}"
    );
    if level == 0.0 {
        return Ok(data.clone());
    }
    let sigma = level * data.max_abs();
    let normal = Normal::new(0.0, sigma).map_err(|e| PactError::Validation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = data.samples().iter().map(|v| v + normal.sample(&mut rng)).collect();
    data.with_samples(samples)
}
