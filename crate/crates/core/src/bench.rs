//! Timing sweeps of the Fourier reconstruction stages and the delay-and-sum
//! baseline over image size.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::acquisition::{AcousticConstants, PressureSeries, TimeAxis};
use crate::baseline::delay_and_sum;
use crate::error::{ensure, Result};
use crate::geometry::SensorGeometry;
use crate::grid::GridSpec;
use crate::recon::{reconstruct, Interpolation, ReconParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub stage: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub sensors: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Image side lengths to sweep (2D, N×N).
    pub sizes: Vec<usize>,
    pub sensors: usize,
    pub radius: f64,
    pub time: TimeAxis,
    /// Field of view side (mm); the pixel size is fov / N.
    pub fov: f64,
    pub oversample: usize,
    pub pad: usize,
    /// Each timing is the minimum over this many runs.
    pub repeats: usize,
    pub baseline: bool,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![64, 128, 256],
            sensors: 256,
            radius: 12.8,
            time: TimeAxis::from_rate(30.0, 2048).expect("valid time axis"),
            fov: 25.6,
            oversample: 2,
            pad: 8,
            repeats: 3,
            baseline: true,
            seed: 0,
        }
    }
}

/// Gaussian white-noise traces; reconstruction cost does not depend on content.
pub fn synthetic_data(sensors: usize, radius: f64, time: TimeAxis, seed: u64) -> Result<PressureSeries> {
    let geom = SensorGeometry::circle(sensors, radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..sensors * time.nt())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    PressureSeries::new(geom, time, samples)
}

fn best_of<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        let out = f()?;
        best = best.min(t0.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((last.expect("at least one run"), best))
}

/// Rows per size: `temporal_fft`, `accumulate`, `inverse_fft`, `kspace`
/// (accumulate + inverse), `fourier_total`, and `delay_and_sum` when enabled.
pub fn run_bench(cfg: &BenchConfig, consts: &AcousticConstants) -> Result<Vec<BenchRow>> {
    ensure!(!cfg.sizes.is_empty(), "no sizes to benchmark");
    ensure!(cfg.fov > 0.0, "field of view must be positive");
    let data = synthetic_data(cfg.sensors, cfg.radius, cfg.time, cfg.seed)?;
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let grid = GridSpec::cube(2, n, cfg.fov / n as f64)?;
        let params = ReconParams {
            grid: grid.clone(),
            oversample: cfg.oversample,
            pad: cfg.pad,
            interpolation: Interpolation::Nearest,
        };
        let mut stage = [f64::INFINITY; 4];
        for _ in 0..cfg.repeats.max(1) {
            let (_, report) = reconstruct(&data, &params, consts)?;
            let t = report.timings;
            stage[0] = stage[0].min(t.temporal_fft);
            stage[1] = stage[1].min(t.accumulate);
            stage[2] = stage[2].min(t.inverse_fft);
            stage[3] = stage[3].min(t.total);
        }
        let row = |name: &str, seconds: f64| BenchRow {
            stage: name.to_string(),
            n,
            sensors: cfg.sensors,
            seconds,
        };
        rows.push(row("temporal_fft", stage[0]));
        rows.push(row("accumulate", stage[1]));
        rows.push(row("inverse_fft", stage[2]));
        rows.push(row("kspace", stage[1] + stage[2]));
        rows.push(row("fourier_total", stage[3]));
        if cfg.baseline {
            let (_, secs) = best_of(cfg.repeats, || delay_and_sum(&data, &grid, consts))?;
            rows.push(row("delay_and_sum", secs));
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("stage,N,sensors,seconds\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{:.6e}\n", r.stage, r.n, r.sensors, r.seconds));
    }
    out
}

/// Operation-count model N_k log2 N_k + N_s N_k of the k-space stages for an
/// N^d image with `oversample`-fold k-grid.
pub fn kspace_model(n: usize, dim: usize, oversample: usize, sensors: usize) -> f64 {
    let nk = ((n * oversample) as f64).powi(dim as i32);
    nk * nk.log2() + sensors as f64 * nk
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
