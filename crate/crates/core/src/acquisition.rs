//! Recorded pressure data, its time axis, and the acoustic constants of the medium.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::geometry::SensorGeometry;

/// Uniform sampling t_j = j·dt, j = 0..nt (μs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    dt: f64,
    nt: usize,
}

impl TimeAxis {
    pub fn new(dt: f64, nt: usize) -> Result<Self> {
        ensure!(dt.is_finite() && dt > 0.0, "time step must be positive, got {dt}");
        ensure!(nt >= 2, "need at least two time samples, got {nt}");
        Ok(Self { dt, nt })
    }

    /// Sampling rate in MHz with `nt` samples.
    pub fn from_rate(rate_mhz: f64, nt: usize) -> Result<Self> {
        ensure!(rate_mhz.is_finite() && rate_mhz > 0.0, "sampling rate must be positive");
        Self::new(1.0 / rate_mhz, nt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.nt - 1)
    }

    /// Highest representable angular frequency, π/dt (rad/μs).
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dt
    }
}

/// Speed of sound c (mm/μs) and the ratio β/C_p (arbitrary units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcousticConstants {
    c: f64,
    beta_over_cp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cp: Option<f64>,
}

impl AcousticConstants {
    pub fn new(c: f64, beta_over_cp: f64) -> Result<Self> {
        ensure!(c.is_finite() && c > 0.0, "speed of sound must be positive, got {c}");
        ensure!(
            beta_over_cp.is_finite() && beta_over_cp > 0.0,
            "beta/Cp must be positive, got {beta_over_cp}"
        );
        Ok(Self {
            c,
            beta_over_cp,
            beta: None,
            cp: None,
        })
    }

    /// Constants from β and C_p individually.
    pub fn from_parts(c: f64, beta: f64, cp: f64) -> Result<Self> {
        ensure!(
            beta.is_finite() && beta > 0.0 && cp.is_finite() && cp > 0.0,
            "beta and Cp must be positive"
        );
        let mut k = Self::new(c, beta / cp)?;
        k.beta = Some(beta);
        k.cp = Some(cp);
        Ok(k)
    }

    /// Re-checks the invariants, including β/C_p consistency when both parts
    /// are present (used after deserialization).
    pub fn validate(&self) -> Result<()> {
        Self::new(self.c, self.beta_over_cp)?;
        if let (Some(b), Some(cp)) = (self.beta, self.cp) {
            let ratio = b / cp;
            ensure!(
                (ratio - self.beta_over_cp).abs() <= 1e-12 * self.beta_over_cp,
                "beta/Cp = {ratio} disagrees with beta_over_cp = {}",
                self.beta_over_cp
            );
        }
        Ok(())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta_over_cp(&self) -> f64 {
        self.beta_over_cp
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn cp(&self) -> Option<f64> {
        self.cp
    }

    /// β c² / C_p: initial pressure per unit absorbed energy density.
    pub fn pressure_scale(&self) -> f64 {
        self.beta_over_cp * self.c * self.c
    }
}

/// Pressure traces p(r_s, t_j), one row of `nt` samples per sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSeries {
    geometry: SensorGeometry,
    time: TimeAxis,
    samples: Vec<f64>,
}

impl PressureSeries {
    pub fn new(geometry: SensorGeometry, time: TimeAxis, samples: Vec<f64>) -> Result<Self> {
        ensure!(
            samples.len() == geometry.len() * time.nt(),
            "{} samples do not fill {} sensors x {} times",
            samples.len(),
            geometry.len(),
            time.nt()
        );
        ensure!(
            samples.iter().all(|v| v.is_finite()),
            "pressure data contain non-finite samples"
        );
        Ok(Self {
            geometry,
            time,
            samples,
        })
    }

    pub fn zeros(geometry: SensorGeometry, time: TimeAxis) -> Self {
        let n = geometry.len() * time.nt();
        Self {
            geometry,
            time,
            samples: vec![0.0; n],
        }
    }

    pub fn geometry(&self) -> &SensorGeometry {
        &self.geometry
    }

    pub fn time(&self) -> TimeAxis {
        self.time
    }

    pub fn dt(&self) -> f64 {
        self.time.dt()
    }

    pub fn nt(&self) -> usize {
        self.time.nt()
    }

    pub fn num_sensors(&self) -> usize {
        self.geometry.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn trace(&self, s: usize) -> &[f64] {
        let nt = self.nt();
        &self.samples[s * nt..(s + 1) * nt]
    }

    pub fn traces(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.nt())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Same geometry and time axis, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(self.geometry.clone(), self.time, samples)
    }
}
