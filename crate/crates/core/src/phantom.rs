//! Numerical phantoms: blurred uniform disks, and Gaussians whose continuous
//! Fourier transform is known in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::fft::{fft_nd, k_spacing, signed_bin};
use crate::grid::{GridSpec, ObjectField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskPhantomSpec {
    pub disks: Vec<Disk>,
    /// Full width at half maximum of the isotropic Gaussian blur (mm).
    pub fwhm: f64,
    pub grid: GridSpec,
}

impl DiskPhantomSpec {
    /// Five disks of different radius and contrast inside a 10 mm field,
    /// blurred with a 0.3 mm FWHM Gaussian. Three of them sit on the x = 0
    /// line so the central profile crosses them.
    pub fn default_layout(grid: GridSpec) -> Self {
        let disk = |x: f64, y: f64, radius: f64, amplitude: f64| Disk {
            center: vec![x, y],
            radius,
            amplitude,
        };
        Self {
            disks: vec![
                disk(0.0, 0.0, 1.2, 1.0),
                disk(0.0, 3.0, 0.8, 0.7),
                disk(0.0, -3.2, 1.0, 0.5),
                disk(-3.0, 1.0, 1.5, 0.8),
                disk(3.0, -1.0, 1.5, 0.9),
            ],
            fwhm: 0.3,
            grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        ensure!(self.fwhm.is_finite() && self.fwhm >= 0.0, "blur FWHM must be >= 0");
        for (i, d) in self.disks.iter().enumerate() {
            ensure!(
                d.radius.is_finite() && d.radius > 0.0,
                "disk {i} radius must be positive"
            );
            ensure!(d.amplitude.is_finite(), "disk {i} amplitude is not finite");
            ensure!(
                d.center.len() == g.dim(),
                "disk {i} center has {} coordinates, grid is {}D",
                d.center.len(),
                g.dim()
            );
            for a in 0..g.dim() {
                let lo = g.coord(a, 0);
                let hi = g.coord(a, g.shape()[a] - 1);
                ensure!(
                    d.center[a] - d.radius >= lo && d.center[a] + d.radius <= hi,
                    "disk {i} extends outside the render grid on axis {a}"
                );
            }
        }
        Ok(())
    }
}

/// Standard deviation of a Gaussian with the given full width at half maximum.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt())
}

pub fn make_disk_phantom(spec: &DiskPhantomSpec) -> Result<ObjectField> {
    spec.validate()?;
    let grid = &spec.grid;
    let mut values = vec![0.0; grid.len()];
    for (flat, v) in values.iter_mut().enumerate() {
        let r = grid.position(flat);
        for d in &spec.disks {
            let dist2: f64 = r.iter().zip(&d.center).map(|(x, c)| (x - c) * (x - c)).sum();
            if dist2 <= d.radius * d.radius {
                *v += d.amplitude;
            }
        }
    }
    let sigma = fwhm_to_sigma(spec.fwhm);
    if sigma > 0.0 {
        values = gaussian_blur(grid, &values, sigma);
    }
    ObjectField::new(grid.clone(), values)
}

/// Convolution with a unit-integral isotropic Gaussian, by multiplication
/// with exp(−σ²|k|²/2) on a zero-padded DFT grid (no wrap-around).
fn gaussian_blur(grid: &GridSpec, values: &[f64], sigma: f64) -> Vec<f64> {
    let dim = grid.dim();
    let padded: Vec<usize> = grid
        .shape()
        .iter()
        .zip(grid.spacing())
        .map(|(&n, &h)| n + (8.0 * sigma / h).ceil() as usize)
        .collect();
    let pgrid =
        GridSpec::new(padded.clone(), grid.spacing().to_vec(), grid.origin().to_vec()).expect("padding a valid grid");
    let mut buf = vec![Complex64::default(); pgrid.len()];
    for (flat, &v) in values.iter().enumerate() {
        buf[pgrid.ravel(&grid.unravel(flat))] = Complex64::new(v, 0.0);
    }
    fft_nd(&mut buf, &padded, FftDirection::Forward);
    let k2: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            let dk = k_spacing(padded[a], grid.spacing()[a]);
            (0..padded[a])
                .map(|m| (signed_bin(m, padded[a]) as f64 * dk).powi(2))
                .collect()
        })
        .collect();
    for (flat, v) in buf.iter_mut().enumerate() {
        let idx = pgrid.unravel(flat);
        let kk: f64 = (0..dim).map(|a| k2[a][idx[a]]).sum();
        *v *= (-0.5 * sigma * sigma * kk).exp();
    }
    fft_nd(&mut buf, &padded, FftDirection::Inverse);
    let norm = 1.0 / pgrid.len() as f64;
    (0..grid.len())
        .map(|flat| buf[pgrid.ravel(&grid.unravel(flat))].re * norm)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPhantomSpec {
    pub center: Vec<f64>,
    pub sigma: f64,
    pub amplitude: f64,
}

impl GaussianPhantomSpec {
    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// A(r) = A0·exp(−|r − r0|²/(2σ²)) sampled on `grid`, which must contain r0 ± 4σ.
pub fn make_gaussian_phantom(spec: &GaussianPhantomSpec, grid: &GridSpec) -> Result<ObjectField> {
    ensure!(
        spec.sigma.is_finite() && spec.sigma > 0.0,
        "Gaussian sigma must be positive"
    );
    ensure!(
        spec.center.len() == grid.dim(),
        "Gaussian center is {}D but the grid is {}D",
        spec.center.len(),
        grid.dim()
    );
    for a in 0..grid.dim() {
        let lo = grid.coord(a, 0);
        let hi = grid.coord(a, grid.shape()[a] - 1);
        ensure!(
            spec.center[a] - 4.0 * spec.sigma >= lo && spec.center[a] + 4.0 * spec.sigma <= hi,
            "grid clips the Gaussian support (r0 ± 4σ) on axis {a}"
        );
    }
    let inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
    let values = (0..grid.len())
        .map(|flat| {
            let r = grid.position(flat);
            let d2: f64 = r.iter().zip(&spec.center).map(|(x, c)| (x - c) * (x - c)).sum();
            spec.amplitude * (-d2 * inv).exp()
        })
        .collect();
    ObjectField::new(grid.clone(), values)
}

/// Exact continuous transform A0(2πσ²)^{d/2} exp(−σ²|k|²/2) exp(−ik·r0).
pub fn gaussian_spectrum(spec: &GaussianPhantomSpec, k: &[f64]) -> Complex64 {
    let d = spec.dim() as i32;
    let s2 = spec.sigma * spec.sigma;
    let k2: f64 = k.iter().map(|x| x * x).sum();
    let kr: f64 = k.iter().zip(&spec.center).map(|(a, b)| a * b).sum();
    let mag = spec.amplitude * (2.0 * PI * s2).powf(d as f64 / 2.0) * (-0.5 * s2 * k2).exp();
    Complex64::from_polar(mag, -kr)
}

/// Phantom description accepted by the CLI (`{"kind": "disks", ...}` or
/// `{"kind": "gaussian", ...}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhantomConfig {
    Disks(DiskPhantomSpec),
    Gaussian {
        #[serde(flatten)]
        spec: GaussianPhantomSpec,
        grid: GridSpec,
    },
}

impl PhantomConfig {
    pub fn render(&self) -> Result<ObjectField> {
        match self {
            PhantomConfig::Disks(spec) => make_disk_phantom(spec),
            PhantomConfig::Gaussian { spec, grid } => make_gaussian_phantom(spec, grid),
        }
    }
}
