//! Measurement apertures: point sensors on a circle (2D) or sphere (3D).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, PactError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryRecord", into = "GeometryRecord")]
pub struct SensorGeometry {
    dim: usize,
    radius: f64,
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl SensorGeometry {
    /// `n` sensors uniformly spaced in angle on a circle, the first on the +x axis.
    pub fn circle(n: usize, radius: f64) -> Result<Self> {
        Self::circle_with_phase(n, radius, 0.0)
    }

    /// Uniform circle rotated by `phase` radians.
    pub fn circle_with_phase(n: usize, radius: f64, phase: f64) -> Result<Self> {
        ensure!(n >= 1, "need at least one sensor");
        ensure!(radius.is_finite() && radius > 0.0, "aperture radius must be positive");
        let mut positions = Vec::with_capacity(2 * n);
        for s in 0..n {
            let theta = phase + 2.0 * PI * s as f64 / n as f64;
            positions.push(radius * theta.cos());
            positions.push(radius * theta.sin());
        }
        let w = 2.0 * PI * radius / n as f64;
        Self::new(2, radius, positions, vec![w; n])
    }

    /// `n` sensors on a sphere placed on a Fibonacci (golden-angle) lattice,
    /// each carrying an equal share of the sphere area.
    pub fn fibonacci_sphere(n: usize, radius: f64) -> Result<Self> {
        ensure!(n >= 1, "need at least one sensor");
        ensure!(radius.is_finite() && radius > 0.0, "aperture radius must be positive");
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut positions = Vec::with_capacity(3 * n);
        for i in 0..n {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            positions.push(radius * rho * phi.cos());
            positions.push(radius * rho * phi.sin());
            positions.push(radius * z);
        }
        let w = 4.0 * PI * radius * radius / n as f64;
        Self::new(3, radius, positions, vec![w; n])
    }

    /// Arbitrary sensor layout. `positions` is flat, `dim` values per sensor.
    pub fn new(dim: usize, radius: f64, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(PactError::UnsupportedDimension(dim));
        }
        ensure!(radius.is_finite() && radius > 0.0, "aperture radius must be positive");
        ensure!(
            !weights.is_empty() && positions.len() == dim * weights.len(),
            "{} position values do not describe {} sensors in {dim}D",
            positions.len(),
            weights.len()
        );
        for (s, p) in positions.chunks_exact(dim).enumerate() {
            let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            ensure!(
                (r - radius).abs() <= 1e-9 * radius,
                "sensor {s} lies at radius {r}, not on the aperture of radius {radius}"
            );
        }
        ensure!(
            weights.iter().all(|&w| w.is_finite() && w > 0.0),
            "quadrature weights must be positive"
        );
        let expected = aperture_measure(dim, radius);
        let total: f64 = weights.iter().sum();
        ensure!(
            (total - expected).abs() <= 1e-9 * expected,
            "quadrature weights sum to {total}, expected {expected}"
        );
        Ok(Self {
            dim,
            radius,
            positions,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn position(&self, s: usize) -> &[f64] {
        &self.positions[s * self.dim..(s + 1) * self.dim]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim)
    }

    pub fn weight(&self, s: usize) -> f64 {
        self.weights[s]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Circumference (2D) or surface area (3D) of the aperture.
pub fn aperture_measure(dim: usize, radius: f64) -> f64 {
    if dim == 2 {
        2.0 * PI * radius
    } else {
        4.0 * PI * radius * radius
    }
}

#[derive(Serialize, Deserialize)]
struct GeometryRecord {
    dim: usize,
    radius: f64,
    positions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<GeometryRecord> for SensorGeometry {
    type Error = PactError;

    fn try_from(r: GeometryRecord) -> Result<Self> {
        ensure!(
            r.positions.iter().all(|p| p.len() == r.dim),
            "every sensor position needs {} coordinates",
            r.dim
        );
        SensorGeometry::new(r.dim, r.radius, r.positions.concat(), r.weights)
    }
}

impl From<SensorGeometry> for GeometryRecord {
    fn from(g: SensorGeometry) -> Self {
        GeometryRecord {
            dim: g.dim,
            radius: g.radius,
            positions: g.positions.chunks_exact(g.dim).map(<[f64]>::to_vec).collect(),
            weights: g.weights,
        }
    }
}
