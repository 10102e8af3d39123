//! Fourier-domain reconstruction for photoacoustic computed tomography with
//! circular (2D) and spherical (3D) apertures, with a k-space forward model,
//! analytic phantoms, a delay-and-sum baseline and image metrics.
//!
//! Units: mm, μs, MHz, rad/mm throughout.

pub mod acquisition;
pub mod baseline;
pub mod bench;
pub mod cli;
pub mod container;
pub mod error;
pub mod fft;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod metrics;
pub mod nufft;
pub mod phantom;
pub mod recon;
pub mod special;

pub use acquisition::{AcousticConstants, PressureSeries, TimeAxis};
pub use error::{PactError, Result};
pub use geometry::SensorGeometry;
pub use grid::{GridSpec, ObjectField, Spectrum};
