//! The `PACT` container: a small self-describing binary file for object
//! fields, spectra and pressure data.
//!
//! Layout (all integers little-endian):
//!
//! | bytes      | content                                         |
//! |------------|-------------------------------------------------|
//! | 4          | magic `PACT`                                    |
//! | 1          | format version, currently 1                     |
//! | 8          | u64 length `L` of the metadata                  |
//! | L          | UTF-8 JSON metadata                             |
//! | rest       | IEEE-754 float64 samples, little-endian         |
//!
//! Complex samples are interleaved `re, im`. Pressure samples are stored
//! sensor-major (`shape = [sensors, nt]`). See `docs/container.md` for the
//! metadata schema.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::acquisition::{PressureSeries, TimeAxis};
use crate::error::{PactError, Result};
use crate::geometry::SensorGeometry;
use crate::grid::{GridSpec, ObjectField, Spectrum};

pub const MAGIC: [u8; 4] = *b"PACT";
pub const VERSION: u8 = 1;
const PREAMBLE: usize = 4 + 1 + 8;

pub type Attributes = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Object(ObjectField),
    Spectrum(Spectrum),
    Pressure(PressureSeries),
}

impl Payload {
    pub fn kind(&self) -> Kind {
        match self {
            Payload::Object(_) => Kind::Object,
            Payload::Spectrum(_) => Kind::Spectrum,
            Payload::Pressure(_) => Kind::Pressure,
        }
    }

    pub fn into_object(self) -> Result<ObjectField> {
        match self {
            Payload::Object(o) => Ok(o),
            other => Err(wrong_kind(Kind::Object, other.kind())),
        }
    }

    pub fn into_spectrum(self) -> Result<Spectrum> {
        match self {
            Payload::Spectrum(s) => Ok(s),
            other => Err(wrong_kind(Kind::Spectrum, other.kind())),
        }
    }

    pub fn into_pressure(self) -> Result<PressureSeries> {
        match self {
            Payload::Pressure(p) => Ok(p),
            other => Err(wrong_kind(Kind::Pressure, other.kind())),
        }
    }
}

fn wrong_kind(want: Kind, got: Kind) -> PactError {
    PactError::Validation(format!("expected a {want:?} container, found {got:?}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Object,
    Spectrum,
    Pressure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    Float64,
    Complex128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub coordinates: String,
    pub values: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub kind: Kind,
    pub dim: usize,
    pub shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<SensorGeometry>,
    pub units: Units,
    pub dtype: DType,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: Attributes,
}

impl Metadata {
    fn describe(payload: &Payload, attributes: &Attributes) -> Self {
        let attributes = attributes.clone();
        match payload {
            Payload::Object(o) => Metadata {
                kind: Kind::Object,
                dim: o.grid().dim(),
                shape: o.grid().shape().to_vec(),
                spacing: Some(o.grid().spacing().to_vec()),
                origin: Some(o.grid().origin().to_vec()),
                dt: None,
                geometry: None,
                units: Units {
                    coordinates: "mm".into(),
                    values: "absorbed energy density (arbitrary)".into(),
                    time: None,
                },
                dtype: DType::Float64,
                attributes,
            },
            Payload::Spectrum(s) => Metadata {
                kind: Kind::Spectrum,
                dim: s.grid().dim(),
                shape: s.grid().shape().to_vec(),
                spacing: Some(s.grid().spacing().to_vec()),
                origin: Some(s.grid().origin().to_vec()),
                dt: None,
                geometry: None,
                units: Units {
                    coordinates: "rad/mm".into(),
                    values: "arbitrary".into(),
                    time: None,
                },
                dtype: DType::Complex128,
                attributes,
            },
            Payload::Pressure(p) => Metadata {
                kind: Kind::Pressure,
                dim: p.geometry().dim(),
                shape: vec![p.num_sensors(), p.nt()],
                spacing: None,
                origin: None,
                dt: Some(p.dt()),
                geometry: Some(p.geometry().clone()),
                units: Units {
                    coordinates: "mm".into(),
                    values: "pressure (arbitrary)".into(),
                    time: Some("us".into()),
                },
                dtype: DType::Float64,
                attributes,
            },
        }
    }

    /// Number of float64 words the data section must hold.
    fn word_count(&self) -> Result<u64> {
        let n = self
            .shape
            .iter()
            .try_fold(1u64, |acc, &s| acc.checked_mul(s as u64))
            .ok_or_else(|| PactError::Metadata("shape overflows".into()))?;
        let per = match self.dtype {
            DType::Float64 => 1,
            DType::Complex128 => 2,
        };
        n.checked_mul(per)
            .ok_or_else(|| PactError::Metadata("shape overflows".into()))
    }
}

pub fn write_container(path: impl AsRef<Path>, payload: &Payload) -> Result<()> {
    write_container_with(path, payload, &Attributes::new())
}

/// Writes `payload` with extra free-form metadata attributes.
pub fn write_container_with(path: impl AsRef<Path>, payload: &Payload, attributes: &Attributes) -> Result<()> {
    let bytes = encode(payload, attributes)?;
    let path = path.as_ref();
    fs::write(path, bytes).map_err(|e| PactError::io(path, e))
}

pub fn read_container(path: impl AsRef<Path>) -> Result<Payload> {
    read_container_with(path).map(|(p, _)| p)
}

/// Reads a container and its free-form attributes.
pub fn read_container_with(path: impl AsRef<Path>) -> Result<(Payload, Attributes)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PactError::io(path, e))?;
    decode(&bytes)
}

pub fn encode(payload: &Payload, attributes: &Attributes) -> Result<Vec<u8>> {
    let meta = Metadata::describe(payload, attributes);
    let json = serde_json::to_vec(&meta).map_err(|e| PactError::Metadata(e.to_string()))?;
    let words = meta.word_count()? as usize;
    let mut out = Vec::with_capacity(PREAMBLE + json.len() + 8 * words);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    match payload {
        Payload::Object(o) => push_f64s(&mut out, o.values()),
        Payload::Pressure(p) => push_f64s(&mut out, p.samples()),
        Payload::Spectrum(s) => {
            for v in s.values() {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    debug_assert_eq!(out.len(), PREAMBLE + json.len() + 8 * words);
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(Payload, Attributes)> {
    if bytes.len() < 4 {
        return Err(PactError::Truncated {
            expected: PREAMBLE as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("length checked");
    if magic != MAGIC {
        return Err(PactError::BadMagic { found: magic });
    }
    if bytes.len() < PREAMBLE {
        return Err(PactError::Truncated {
            expected: PREAMBLE as u64,
            found: bytes.len() as u64,
        });
    }
    if bytes[4] != VERSION {
        return Err(PactError::UnsupportedVersion(bytes[4]));
    }
    let meta_len = u64::from_le_bytes(bytes[5..13].try_into().expect("length checked"));
    let meta_end = (PREAMBLE as u64)
        .checked_add(meta_len)
        .ok_or_else(|| PactError::Metadata("metadata length overflows".into()))?;
    if (bytes.len() as u64) < meta_end {
        return Err(PactError::Truncated {
            expected: meta_end,
            found: bytes.len() as u64,
        });
    }
    let meta_end = meta_end as usize;
    let meta: Metadata =
        serde_json::from_slice(&bytes[PREAMBLE..meta_end]).map_err(|e| PactError::Metadata(e.to_string()))?;

    let data = &bytes[meta_end..];
    let expected = meta
        .word_count()?
        .checked_mul(8)
        .ok_or_else(|| PactError::Metadata("shape overflows".into()))?;
    let found = data.len() as u64;
    if found < expected {
        return Err(PactError::Truncated {
            expected: meta_end as u64 + expected,
            found: bytes.len() as u64,
        });
    }
    if found > expected {
        return Err(PactError::SizeMismatch { expected, found });
    }
    let words: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();

    let payload = build_payload(&meta, words)?;
    Ok((payload, meta.attributes))
}

fn build_payload(meta: &Metadata, words: Vec<f64>) -> Result<Payload> {
    let need = |what: &str| PactError::Metadata(format!("{:?} container lacks {what}", meta.kind));
    let expect_dtype = |dtype: DType| {
        if meta.dtype == dtype {
            Ok(())
        } else {
            Err(PactError::Metadata(format!(
                "{:?} container must have dtype {dtype:?}, found {:?}",
                meta.kind, meta.dtype
            )))
        }
    };
    match meta.kind {
        Kind::Object | Kind::Spectrum => {
            let grid = GridSpec::new(
                meta.shape.clone(),
                meta.spacing.clone().ok_or_else(|| need("spacing"))?,
                meta.origin.clone().ok_or_else(|| need("origin"))?,
            )?;
            if grid.dim() != meta.dim {
                return Err(PactError::Metadata(format!(
                    "dim {} disagrees with shape {:?}",
                    meta.dim, meta.shape
                )));
            }
            if meta.kind == Kind::Object {
                expect_dtype(DType::Float64)?;
                Ok(Payload::Object(ObjectField::new(grid, words)?))
            } else {
                expect_dtype(DType::Complex128)?;
                let values = words.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
                Ok(Payload::Spectrum(Spectrum::new(grid, values)?))
            }
        }
        Kind::Pressure => {
            expect_dtype(DType::Float64)?;
            let geometry = meta.geometry.clone().ok_or_else(|| need("geometry"))?;
            let dt = meta.dt.ok_or_else(|| need("dt"))?;
            if meta.shape.len() != 2 || meta.shape[0] != geometry.len() || geometry.dim() != meta.dim {
                return Err(PactError::Metadata(format!(
                    "pressure shape {:?} does not match {} sensors in {}D",
                    meta.shape,
                    geometry.len(),
                    geometry.dim()
                )));
            }
            let time = TimeAxis::new(dt, meta.shape[1])?;
            Ok(Payload::Pressure(PressureSeries::new(geometry, time, words)?))
        }
    }
}

fn push_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}
