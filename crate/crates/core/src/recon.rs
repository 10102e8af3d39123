//! Fourier-domain reconstruction:
//!
//! Â(k) = (2C_p / (R_S β)) Σ_s w_s e^{−ik·r_s} Re P_s(ω = c|k|),
//!
//! where P_s(ω) = ∫ t p(r_s, t) e^{−iωt} dt, followed by an inverse spatial FFT.

use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::acquisition::{AcousticConstants, PressureSeries};
use crate::error::{ensure, PactError, Result};
use crate::fft::{fft_nd, k_spacing, scale_separable};
use crate::geometry::SensorGeometry;
use crate::grid::{GridSpec, ObjectField, Spectrum};

/// How the temporal spectrum is read off at ω = c|k|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Nearest,
    Linear,
}

impl FromStr for Interpolation {
    type Err = PactError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "linear" => Ok(Self::Linear),
            other => Err(PactError::Validation(format!(
                "unknown interpolation {other:?} (expected nearest or linear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconParams {
    pub grid: GridSpec,
    /// k-grid shape is `oversample` times the image shape.
    pub oversample: usize,
    /// Temporal zero-padding factor.
    pub pad: usize,
    pub interpolation: Interpolation,
}

impl ReconParams {
    /// Two-fold k-space oversampling, eight-fold temporal padding, nearest interpolation.
    pub fn with_defaults(grid: GridSpec) -> Self {
        Self {
            grid,
            oversample: 2,
            pad: 8,
            interpolation: Interpolation::Nearest,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.oversample >= 1, "k-space oversampling must be >= 1");
        ensure!(self.pad >= 1, "temporal zero-padding must be >= 1");
        for &n in self.grid.shape() {
            ensure!(
                (n * (self.oversample - 1)) % 2 == 0,
                "image axis of {n} samples cannot sit centered in a {}x k-grid",
                self.oversample
            );
        }
        Ok(())
    }

    /// Centered k-grid with spacing 2π/(oversample·N·Δx) per axis.
    pub fn k_grid(&self) -> Result<GridSpec> {
        let shape: Vec<usize> = self.grid.shape().iter().map(|n| n * self.oversample).collect();
        let dk = shape
            .iter()
            .zip(self.grid.spacing())
            .map(|(&m, &h)| k_spacing(m, h))
            .collect();
        GridSpec::centered(shape, dk)
    }
}

/// Nonnegative-frequency half spectrum of t·p(r_s, t) for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpectrum {
    d_omega: f64,
    nyquist: f64,
    bins: Vec<Complex64>,
}

impl SensorSpectrum {
    /// Bin spacing (rad/μs).
    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    /// π/dt of the underlying record.
    pub fn nyquist(&self) -> f64 {
        self.nyquist
    }

    /// Bin `j` holds the transform at ω = j·dω.
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }
}

/// Per-sensor DFT of t_j·p(r_s, t_j), zero-padded to `pad·nt` samples and
/// scaled by dt.
pub fn modified_data_spectrum(data: &PressureSeries, pad: usize) -> Result<Vec<SensorSpectrum>> {
    ensure!(pad >= 1, "temporal zero-padding must be >= 1");
    let dt = data.dt();
    let n = pad * data.nt();
    let keep = n / 2 + 1;
    let fft = FftPlanner::new().plan_fft(n, FftDirection::Forward);
    let d_omega = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let nyquist = data.time().nyquist();
    let spectra = (0..data.num_sensors())
        .into_par_iter()
        .map(|s| {
            let mut buf = vec![Complex64::default(); n];
            for (j, (b, &p)) in buf.iter_mut().zip(data.trace(s)).enumerate() {
                b.re = j as f64 * dt * p;
            }
            fft.process(&mut buf);
            buf.truncate(keep);
            buf.iter_mut().for_each(|v| *v *= dt);
            SensorSpectrum {
                d_omega,
                nyquist,
                bins: buf,
            }
        })
        .collect();
    Ok(spectra)
}

/// Where ω = c|k| falls on the bin axis.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Tap {
    Truncated,
    Nearest(usize),
    Linear(usize, f64),
}

fn tap(omega: f64, d_omega: f64, nyquist: f64, nbins: usize, mode: Interpolation) -> Tap {
    if omega > nyquist {
        return Tap::Truncated;
    }
    let x = omega / d_omega;
    match mode {
        Interpolation::Nearest => {
            let i = x.round() as usize;
            if i < nbins {
                Tap::Nearest(i)
            } else {
                Tap::Truncated
            }
        }
        Interpolation::Linear => {
            let i = x.floor() as usize;
            let f = x - i as f64;
            if i + 1 < nbins {
                Tap::Linear(i, f)
            } else if i < nbins && f == 0.0 {
                Tap::Nearest(i)
            } else {
                Tap::Truncated
            }
        }
    }
}

/// Re P_s(c·k_mag) and whether the frequency was beyond the recorded band
/// (in which case the value is 0).
pub fn sample_at_ck(spec: &SensorSpectrum, k_mag: f64, c: f64, mode: Interpolation) -> (f64, bool) {
    match tap(c * k_mag, spec.d_omega, spec.nyquist, spec.bins.len(), mode) {
        Tap::Truncated => (0.0, true),
        Tap::Nearest(i) => (spec.bins[i].re, false),
        Tap::Linear(i, f) => ((1.0 - f) * spec.bins[i].re + f * spec.bins[i + 1].re, false),
    }
}

/// Plane-wave weighted sensor sum of the sampled spectra on every point of
/// `kgrid`. Returns the spectrum and the fraction of k-points beyond the band.
pub fn accumulate_spectrum(
    spectra: &[SensorSpectrum],
    geom: &SensorGeometry,
    kgrid: &GridSpec,
    consts: &AcousticConstants,
    mode: Interpolation,
) -> Result<(Spectrum, f64)> {
    let dim = kgrid.dim();
    ensure!(
        dim == geom.dim(),
        "k-grid is {dim}D but the sensors are {}D",
        geom.dim()
    );
    ensure!(
        spectra.len() == geom.len(),
        "{} sensor spectra for {} sensors",
        spectra.len(),
        geom.len()
    );
    let ns = geom.len();
    let first = &spectra[0];
    ensure!(
        spectra
            .iter()
            .all(|s| s.bins.len() == first.bins.len() && s.d_omega == first.d_omega),
        "sensor spectra have differing frequency axes"
    );
    let nbins = first.bins.len();

    // Real parts transposed to [bin][sensor] so each k-point reads one row,
    // keeping only the bins the grid corner can reach.
    let k_corner = (0..dim)
        .map(|a| {
            let ends = [kgrid.coord(a, 0), kgrid.coord(a, kgrid.shape()[a] - 1)];
            ends[0].abs().max(ends[1].abs()).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let reach = ((consts.c() * k_corner / first.d_omega) as usize).saturating_add(3);
    let used = nbins.min(reach);
    let mut table = vec![0.0; used * ns];
    for (s, spec) in spectra.iter().enumerate() {
        for (j, v) in spec.bins[..used].iter().enumerate() {
            table[j * ns + s] = v.re;
        }
    }

    // Per-axis plane-wave factors e^{−ik_a x_{s,a}}, laid out [index][sensor];
    // the first axis also carries the quadrature weight and prefactor.
    let prefactor = 2.0 / (geom.radius() * consts.beta_over_cp());
    let phases: Vec<Vec<Complex64>> = (0..dim)
        .map(|a| {
            let mut t = Vec::with_capacity(kgrid.shape()[a] * ns);
            for m in 0..kgrid.shape()[a] {
                let k = kgrid.coord(a, m);
                for s in 0..ns {
                    let scale = if a == 0 { prefactor * geom.weight(s) } else { 1.0 };
                    t.push(Complex64::from_polar(scale, -k * geom.position(s)[a]));
                }
            }
            t
        })
        .collect();

    let k2: Vec<Vec<f64>> = (0..dim)
        .map(|a| kgrid.axis_coords(a).iter().map(|k| k * k).collect())
        .collect();
    let last = kgrid.shape()[dim - 1];
    let c = consts.c();
    let mut values = vec![Complex64::default(); kgrid.len()];
    let truncated: usize = values
        .par_chunks_mut(last)
        .enumerate()
        .map_init(
            || vec![Complex64::default(); ns],
            |row, (r, out)| {
                let lead = kgrid.unravel(r * last);
                row.copy_from_slice(&phases[0][lead[0] * ns..(lead[0] + 1) * ns]);
                let mut lead_k2 = k2[0][lead[0]];
                for a in 1..dim - 1 {
                    let p = &phases[a][lead[a] * ns..(lead[a] + 1) * ns];
                    row.iter_mut().zip(p).for_each(|(q, e)| *q *= e);
                    lead_k2 += k2[a][lead[a]];
                }
                let mut dropped = 0;
                let tail = &phases[dim - 1];
                for (m, o) in out.iter_mut().enumerate() {
                    let kmag = (lead_k2 + k2[dim - 1][m]).sqrt();
                    let p = &tail[m * ns..(m + 1) * ns];
                    let mut acc = Complex64::default();
                    match tap(c * kmag, first.d_omega, first.nyquist, nbins, mode) {
                        Tap::Truncated => dropped += 1,
                        Tap::Nearest(i) => {
                            let v = &table[i * ns..(i + 1) * ns];
                            for s in 0..ns {
                                acc += row[s] * p[s] * v[s];
                            }
                        }
                        Tap::Linear(i, f) => {
                            let v0 = &table[i * ns..(i + 1) * ns];
                            let v1 = &table[(i + 1) * ns..(i + 2) * ns];
                            for s in 0..ns {
                                acc += row[s] * p[s] * ((1.0 - f) * v0[s] + f * v1[s]);
                            }
                        }
                    }
                    *o = acc;
                }
                dropped
            },
        )
        .sum();
    let fraction = truncated as f64 / kgrid.len() as f64;
    Ok((Spectrum::new(kgrid.clone(), values)?, fraction))
}

/// Diagnostics from [`invert_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InversionStats {
    /// max |Â(k) − conj Â(−k)| / max |Â| over true conjugate pairs, before symmetrization.
    pub hermitian_asymmetry: f64,
    /// max |Im| / max |Re| of the image before the imaginary part is dropped.
    pub imaginary_residue: f64,
}

/// Per-axis layout shared by the inverse transform.
struct AxisMap {
    m: usize,
    offset: usize,
}

/// Inverse transform of `spec` onto `recon_grid`, which sits centered in the
/// (oversampled) spatial grid dual to the k-grid.
pub fn invert_spectrum(spec: &Spectrum, recon_grid: &GridSpec) -> Result<(ObjectField, InversionStats)> {
    let kg = spec.grid();
    let dim = kg.dim();
    ensure!(
        recon_grid.dim() == dim,
        "spectrum is {dim}D but the image grid is {}D",
        recon_grid.dim()
    );
    let mut axes = Vec::with_capacity(dim);
    for a in 0..dim {
        let (m, n, h) = (kg.shape()[a], recon_grid.shape()[a], recon_grid.spacing()[a]);
        ensure!(
            m >= n && m % n == 0 && (m - n) % 2 == 0,
            "k-grid axis {a} has {m} samples, not a centered multiple of the image's {n}"
        );
        let dk = k_spacing(m, h);
        ensure!(
            (kg.spacing()[a] - dk).abs() <= 1e-9 * dk,
            "k-grid spacing {} on axis {a} does not match 2π/({m}·{h})",
            kg.spacing()[a]
        );
        ensure!(
            (kg.origin()[a] + (m / 2) as f64 * kg.spacing()[a]).abs() <= 1e-9 * dk,
            "k-grid is not centered on axis {a}"
        );
        axes.push(AxisMap { m, offset: (m - n) / 2 });
    }
    let hermitian_asymmetry = paired_asymmetry(spec);

    // Move to a frame whose spatial origin is the image center, so pairing
    // under k → −k is the conjugation symmetry of a real image.
    let center: Vec<f64> = (0..dim)
        .map(|a| recon_grid.origin()[a] + ((axes[a].m / 2 - axes[a].offset) as f64) * recon_grid.spacing()[a])
        .collect();
    let shift: Vec<Vec<Complex64>> = (0..dim)
        .map(|a| {
            (0..axes[a].m)
                .map(|i| Complex64::from_polar(1.0, kg.coord(a, i) * center[a]))
                .collect()
        })
        .collect();
    let mut framed = spec.clone();
    scale_separable(framed.values_mut(), kg.shape(), &shift);
    framed.symmetrize();

    // Σ_m B_m e^{2πi(m−h)(j−h)/M} = e^{2πih²/M} e^{−2πihj/M} Σ_m [B_m e^{−2πimh/M}] e^{2πimj/M}.
    let tau = 2.0 * std::f64::consts::PI;
    let pre: Vec<Vec<Complex64>> = axes
        .iter()
        .map(|ax| {
            let h = (ax.m / 2) as f64;
            (0..ax.m)
                .map(|i| Complex64::from_polar(1.0, -tau * (i as f64) * h / ax.m as f64))
                .collect()
        })
        .collect();
    let scale: f64 = kg.spacing().iter().map(|dk| dk / tau).product();
    let post: Vec<Vec<Complex64>> = axes
        .iter()
        .map(|ax| {
            let h = (ax.m / 2) as f64;
            (0..ax.m)
                .map(|j| Complex64::from_polar(1.0, tau * h * (h - j as f64) / ax.m as f64))
                .collect()
        })
        .collect();
    let mut buf: Vec<Complex64> = framed.values().to_vec();
    scale_separable(&mut buf, kg.shape(), &pre);
    fft_nd(&mut buf, kg.shape(), FftDirection::Inverse);

    // Crop the centered window, then apply the output phases on it.
    let mut cropped = Vec::with_capacity(recon_grid.len());
    let last = recon_grid.shape()[dim - 1];
    for row in 0..recon_grid.len() / last {
        let mut start = axes[dim - 1].offset;
        let (mut rest, mut stride) = (row, kg.shape()[dim - 1]);
        for a in (0..dim - 1).rev() {
            let n = recon_grid.shape()[a];
            start += (rest % n + axes[a].offset) * stride;
            rest /= n;
            stride *= kg.shape()[a];
        }
        cropped.extend_from_slice(&buf[start..start + last]);
    }
    let post: Vec<Vec<Complex64>> = (0..dim)
        .map(|a| {
            let (off, n) = (axes[a].offset, recon_grid.shape()[a]);
            let s = if a == 0 { scale } else { 1.0 };
            post[a][off..off + n].iter().map(|v| v * s).collect()
        })
        .collect();
    scale_separable(&mut cropped, recon_grid.shape(), &post);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    let values: Vec<f64> = cropped
        .iter()
        .map(|v| {
            max_re = max_re.max(v.re.abs());
            max_im = max_im.max(v.im.abs());
            v.re
        })
        .collect();
    let imaginary_residue = if max_re > 0.0 { max_im / max_re } else { 0.0 };
    let image = ObjectField::new(recon_grid.clone(), values)?;
    Ok((
        image,
        InversionStats {
            hermitian_asymmetry,
            imaginary_residue,
        },
    ))
}

/// Hermitian asymmetry over samples whose −k partner is on the grid (the
/// most-negative frequency of an even axis has none).
fn paired_asymmetry(spec: &Spectrum) -> f64 {
    let g = spec.grid();
    let peak = spec.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let v = spec.values();
    let mut worst = 0.0f64;
    for i in 0..v.len() {
        let mut rest = i;
        let mut unpaired = false;
        for &n in g.shape().iter().rev() {
            unpaired |= n % 2 == 0 && rest % n == 0;
            rest /= n;
        }
        if unpaired {
            continue;
        }
        worst = worst.max((v[i] - v[spec.partner_index(i)].conj()).norm());
    }
    worst / peak
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub temporal_fft: f64,
    pub accumulate: f64,
    pub inverse_fft: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReconReport {
    /// Fraction of k-grid points with c|k| beyond the temporal Nyquist rate.
    pub truncated_fraction: f64,
    pub hermitian_asymmetry: f64,
    pub imaginary_residue: f64,
    pub timings: StageTimings,
}

/// Full reconstruction pipeline, returning the image and the accumulated spectrum.
pub fn reconstruct_with_spectrum(
    data: &PressureSeries,
    params: &ReconParams,
    consts: &AcousticConstants,
) -> Result<(ObjectField, Spectrum, ReconReport)> {
    params.validate()?;
    ensure!(
        params.grid.dim() == data.geometry().dim(),
        "image grid is {}D but the sensors are {}D",
        params.grid.dim(),
        data.geometry().dim()
    );
    let kgrid = params.k_grid()?;
    let t0 = Instant::now();
    let spectra = modified_data_spectrum(data, params.pad)?;
    let t1 = Instant::now();
    let (spectrum, truncated_fraction) =
        accumulate_spectrum(&spectra, data.geometry(), &kgrid, consts, params.interpolation)?;
    let t2 = Instant::now();
    let (image, stats) = invert_spectrum(&spectrum, &params.grid)?;
    let t3 = Instant::now();
    let report = ReconReport {
        truncated_fraction,
        hermitian_asymmetry: stats.hermitian_asymmetry,
        imaginary_residue: stats.imaginary_residue,
        timings: StageTimings {
            temporal_fft: (t1 - t0).as_secs_f64(),
            accumulate: (t2 - t1).as_secs_f64(),
            inverse_fft: (t3 - t2).as_secs_f64(),
            total: (t3 - t0).as_secs_f64(),
        },
    };
    Ok((image, spectrum, report))
}

pub fn reconstruct(
    data: &PressureSeries,
    params: &ReconParams,
    consts: &AcousticConstants,
) -> Result<(ObjectField, ReconReport)> {
    reconstruct_with_spectrum(data, params, consts).map(|(image, _, report)| (image, report))
}
