//! Image comparison, central profiles, and CSV/PGM export.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, PactError, Result};
use crate::grid::{GridSpec, ObjectField};

/// Half-open index box `lo[a] ≤ i < hi[a]` per axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl Roi {
    /// Box covering the samples of `grid` within `radius` mm of the origin
    /// along every axis.
    pub fn centered_box(grid: &GridSpec, radius: f64) -> Self {
        let mut lo = Vec::with_capacity(grid.dim());
        let mut hi = Vec::with_capacity(grid.dim());
        for a in 0..grid.dim() {
            let inside: Vec<usize> = (0..grid.shape()[a])
                .filter(|&i| grid.coord(a, i).abs() <= radius + 1e-9 * grid.spacing()[a])
                .collect();
            lo.push(inside.first().copied().unwrap_or(0));
            hi.push(inside.last().map_or(0, |i| i + 1));
        }
        Self { lo, hi }
    }

    fn contains(&self, idx: &[usize]) -> bool {
        idx.iter().enumerate().all(|(a, &i)| i >= self.lo[a] && i < self.hi[a])
    }
}

/// sqrt(mean((a − b)²)) / max|b| over `roi` (whole grid by default).
pub fn nrmse(a: &ObjectField, b: &ObjectField, roi: Option<&Roi>) -> Result<f64> {
    ensure!(
        a.grid().same_layout(b.grid()),
        "images are on different grids ({:?} vs {:?})",
        a.grid().shape(),
        b.grid().shape()
    );
    if let Some(r) = roi {
        let dim = a.grid().dim();
        ensure!(
            r.lo.len() == dim && r.hi.len() == dim,
            "region of interest has the wrong rank"
        );
        ensure!(
            (0..dim).all(|i| r.lo[i] < r.hi[i] && r.hi[i] <= a.grid().shape()[i]),
            "region of interest {r:?} is empty or outside the grid"
        );
    }
    let grid = a.grid();
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut peak = 0.0f64;
    for (flat, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
        if roi.map_or(true, |r| r.contains(&grid.unravel(flat))) {
            sum += (x - y) * (x - y);
            count += 1;
            peak = peak.max(y.abs());
        }
    }
    ensure!(peak > 0.0, "reference image is zero inside the region of interest");
    Ok((sum / count as f64).sqrt() / peak)
}

/// Samples along one axis through the grid center, with physical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn max_abs_deviation(&self, other: &Profile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = String::from("coordinate,value\n");
        for (x, v) in self.coords.iter().zip(&self.values) {
            text.push_str(&format!("{x},{v}\n"));
        }
        std::fs::write(path, text).map_err(|e| PactError::io(path, e))
    }
}

/// Line along `axis` through index `shape / 2` of every other axis.
pub fn central_profile(img: &ObjectField, axis: usize) -> Result<Profile> {
    let grid = img.grid();
    ensure!(
        axis < grid.dim(),
        "axis {axis} out of range for a {}D image",
        grid.dim()
    );
    let mut idx = grid.center_index();
    let mut values = Vec::with_capacity(grid.shape()[axis]);
    for i in 0..grid.shape()[axis] {
        idx[axis] = i;
        values.push(img.get(&idx));
    }
    Ok(Profile {
        coords: grid.axis_coords(axis),
        values,
    })
}

/// 2D slice of a 3D image at index `shape[0] / 2` of the first axis; 2D
/// images are returned unchanged.
pub fn central_slice(img: &ObjectField) -> Result<ObjectField> {
    let g = img.grid();
    if g.dim() == 2 {
        return Ok(img.clone());
    }
    let plane = g.shape()[1] * g.shape()[2];
    let start = (g.shape()[0] / 2) * plane;
    let grid = GridSpec::new(
        g.shape()[1..].to_vec(),
        g.spacing()[1..].to_vec(),
        g.origin()[1..].to_vec(),
    )?;
    ObjectField::new(grid, img.values()[start..start + plane].to_vec())
}

/// 16-bit binary PGM (P5, big-endian) with `window` mapped linearly onto
/// [0, 65535] and values outside it clamped. Rows run along the first axis.
pub fn encode_pgm(img: &ObjectField, window: (f64, f64)) -> Result<Vec<u8>> {
    let (lo, hi) = window;
    ensure!(
        lo.is_finite() && hi.is_finite() && hi > lo,
        "window [{lo}, {hi}] is empty"
    );
    ensure!(img.grid().dim() == 2, "PGM export needs a 2D image");
    let (rows, cols) = (img.grid().shape()[0], img.grid().shape()[1]);
    let mut out = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    out.reserve(2 * rows * cols);
    for &v in img.values() {
        let level = ((v - lo) / (hi - lo) * 65535.0).round().clamp(0.0, 65535.0) as u16;
        out.extend_from_slice(&level.to_be_bytes());
    }
    Ok(out)
}

pub fn write_pgm(path: &Path, img: &ObjectField, window: (f64, f64)) -> Result<()> {
    let bytes = encode_pgm(img, window)?;
    let mut f = std::fs::File::create(path).map_err(|e| PactError::io(path, e))?;
    f.write_all(&bytes).map_err(|e| PactError::io(path, e))
}
