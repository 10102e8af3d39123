//! Uniform Cartesian grids and the fields sampled on them.
//!
//! Samples are stored row-major: the last axis varies fastest. Axis `a`
//! of a grid has physical coordinate `origin[a] + i * spacing[a]` at
//! index `i`. Spatial grids are in mm; k-space grids are in rad/mm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, PactError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord", into = "GridRecord")]
pub struct GridSpec {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

/// Serialized form of [`GridSpec`]; `origin` defaults to a centered grid.
#[derive(Serialize, Deserialize)]
struct GridRecord {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    #[serde(default)]
    origin: Option<Vec<f64>>,
}

impl TryFrom<GridRecord> for GridSpec {
    type Error = PactError;

    fn try_from(r: GridRecord) -> Result<Self> {
        match r.origin {
            Some(origin) => GridSpec::new(r.shape, r.spacing, origin),
            None => GridSpec::centered(r.shape, r.spacing),
        }
    }
}

impl From<GridSpec> for GridRecord {
    fn from(g: GridSpec) -> Self {
        GridRecord {
            shape: g.shape,
            spacing: g.spacing,
            origin: Some(g.origin),
        }
    }
}

impl GridSpec {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let dim = shape.len();
        if dim != 2 && dim != 3 {
            return Err(PactError::UnsupportedDimension(dim));
        }
        ensure!(
            spacing.len() == dim && origin.len() == dim,
            "grid shape, spacing and origin lengths differ ({}, {}, {})",
            dim,
            spacing.len(),
            origin.len()
        );
        ensure!(shape.iter().all(|&n| n >= 1), "grid shape {shape:?} has an empty axis");
        ensure!(
            spacing.iter().all(|&h| h.is_finite() && h > 0.0),
            "grid spacing {spacing:?} must be positive"
        );
        ensure!(
            origin.iter().all(|o| o.is_finite()),
            "grid origin {origin:?} is not finite"
        );
        Ok(Self { shape, spacing, origin })
    }

    /// Grid whose index `shape / 2` (integer division) sits at the origin.
    /// This is also the k-space layout: DC lives at index `shape / 2`.
    pub fn centered(shape: Vec<usize>, spacing: Vec<f64>) -> Result<Self> {
        let origin = shape
            .iter()
            .zip(&spacing)
            .map(|(&n, &h)| -((n / 2) as f64) * h)
            .collect();
        Self::new(shape, spacing, origin)
    }

    /// Square/cubic centered grid with isotropic spacing.
    pub fn cube(dim: usize, n: usize, spacing: f64) -> Result<Self> {
        Self::centered(vec![n; dim], vec![spacing; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume (area in 2D) of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.spacing[axis]
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Row-major multi-index of a flat index.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn position(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coord(a, i))
            .collect()
    }

    /// Index of the sample nearest the grid center (`shape / 2` per axis).
    pub fn center_index(&self) -> Vec<usize> {
        self.shape.iter().map(|&n| n / 2).collect()
    }

    /// True if every axis has the same spacing to within 1e-12 relative.
    pub fn is_isotropic(&self) -> bool {
        let h0 = self.spacing[0];
        self.spacing.iter().all(|&h| (h - h0).abs() <= 1e-12 * h0)
    }

    /// Largest distance from the coordinate origin to any grid corner.
    pub fn max_corner_radius(&self) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.dim() {
            let lo = self.origin[a];
            let hi = self.coord(a, self.shape[a] - 1);
            let m = lo.abs().max(hi.abs());
            acc += m * m;
        }
        acc.sqrt()
    }

    pub(crate) fn same_layout(&self, other: &GridSpec) -> bool {
        self.shape == other.shape
            && self
                .spacing
                .iter()
                .zip(&other.spacing)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .zip(&self.spacing)
                .all(|((a, b), h)| (a - b).abs() <= 1e-9 * h)
    }
}

/// Real scalar field A(r) (absorbed optical energy density, arbitrary units).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ObjectField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        ensure!(
            values.len() == grid.len(),
            "object has {} samples but grid {:?} needs {}",
            values.len(),
            grid.shape(),
            grid.len()
        );
        ensure!(
            values.iter().all(|v| v.is_finite()),
            "object contains non-finite samples"
        );
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.ravel(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Riemann-sum integral: Σ values · cell volume.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Flat index of the largest sample.
    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
            )
            .0
    }
}

/// Complex field on a centered k-space grid (rad/mm), DC at index `shape / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        ensure!(
            values.len() == grid.len(),
            "spectrum has {} samples but grid {:?} needs {}",
            values.len(),
            grid.shape(),
            grid.len()
        );
        ensure!(
            values.iter().all(|v| v.re.is_finite() && v.im.is_finite()),
            "spectrum contains non-finite samples"
        );
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn dc_index(&self) -> usize {
        self.grid.ravel(&self.grid.center_index())
    }

    /// Wave vector of a flat index.
    pub fn k_at(&self, flat: usize) -> Vec<f64> {
        self.grid.position(flat)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Flat index of the sample at −k, wrapping the unpaired most-negative
    /// frequency of an even axis onto itself (DFT periodicity).
    pub fn partner_index(&self, mut flat: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        for &n in self.grid.shape().iter().rev() {
            let m = flat % n;
            flat /= n;
            out += (2 * (n / 2) + n - m) % n * stride;
            stride *= n;
        }
        out
    }

    /// max |v(k) − conj(v(−k))| divided by max |v| (0 for an all-zero spectrum).
    pub fn hermitian_asymmetry(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let worst = (0..self.values.len())
            .map(|i| (self.values[i] - self.values[self.partner_index(i)].conj()).norm())
            .fold(0.0f64, f64::max);
        worst / peak
    }

    /// Replace each conjugate pair by its average; self-paired samples keep
    /// their real part. This is the orthogonal projection onto spectra of
    /// real images.
    pub fn symmetrize(&mut self) {
        let old = self.values.clone();
        let partner: Vec<usize> = (0..old.len()).map(|i| self.partner_index(i)).collect();
        for (i, v) in self.values.iter_mut().enumerate() {
            let j = partner[i];
            *v = (old[i] + old[j].conj()) * 0.5;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            GridSpec::new(vec![4], vec![1.0], vec![0.0]),
            Err(PactError::UnsupportedDimension(1))
        ));
        assert!(GridSpec::new(vec![4, 0], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(GridSpec::new(vec![4, 4], vec![1.0, -1.0], vec![0.0, 0.0]).is_err());
        assert!(GridSpec::new(vec![4, 4], vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn centered_grid_puts_half_index_at_zero() {
        let g = GridSpec::centered(vec![8, 5], vec![0.5, 2.0]).unwrap();
        assert_eq!(g.coord(0, 4), 0.0);
        assert_eq!(g.coord(1, 2), 0.0);
        assert_eq!(g.origin(), &[-2.0, -4.0]);
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = GridSpec::cube(3, 5, 1.0).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.ravel(&g.unravel(flat)), flat);
        }
        assert_eq!(g.ravel(&[1, 2, 3]), 25 + 2 * 5 + 3);
    }

    #[test]
    fn object_rejects_wrong_length_and_nan() {
        let g = GridSpec::cube(2, 3, 1.0).unwrap();
        assert!(ObjectField::new(g.clone(), vec![0.0; 8]).is_err());
        let mut v = vec![0.0; 9];
        v[4] = f64::NAN;
        assert!(ObjectField::new(g, v).is_err());
    }

    #[test]
    fn partner_of_even_and_odd_axes() {
        let g = GridSpec::centered(vec![4, 5], vec![1.0, 1.0]).unwrap();
        let s = Spectrum::zeros(g.clone());
        // DC maps to itself.
        assert_eq!(s.partner_index(s.dc_index()), s.dc_index());
        // (m0, m1) = (1, 0) is k = (-1, -2): partner (3, 4).
        assert_eq!(s.partner_index(g.ravel(&[1, 0])), g.ravel(&[3, 4]));
        // Unpaired most-negative row of the even axis wraps to itself.
        assert_eq!(s.partner_index(g.ravel(&[0, 2])), g.ravel(&[0, 2]));
    }

    #[test]
    fn symmetrize_gives_hermitian_spectrum() {
        let g = GridSpec::centered(vec![6, 5], vec![0.3, 0.3]).unwrap();
        let values = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut s = Spectrum::new(g, values).unwrap();
        assert!(s.hermitian_asymmetry() > 0.1);
        s.symmetrize();
        assert!(s.hermitian_asymmetry() <= 1e-15);
    }
}
