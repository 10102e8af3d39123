//! C ABI over `pact-core`.
//!
//! Objects and pressure data cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every entry point
//! returns a [`PactStatus`]; on failure a message is kept per thread and can
//! be fetched with [`pact_last_error_message`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pact_core::container::{read_container, write_container, Payload};
use pact_core::forward::spectral_forward;
use pact_core::recon::{reconstruct, Interpolation, ReconParams};
use pact_core::{AcousticConstants, GridSpec, ObjectField, PactError, PressureSeries, SensorGeometry, TimeAxis};

/// Result of every `pact_*` call that can fail.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PactStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument was out of range or not valid UTF-8.
    InvalidArgument = 2,
    /// The input file does not exist.
    NotFound = 3,
    /// Any other I/O failure.
    Io = 4,
    /// The file is not a valid container of the expected kind.
    Format = 5,
    /// Inputs violate a documented invariant.
    Validation = 6,
    /// An internal error; the library state is unaffected.
    Panic = 7,
}

/// Interpolation of sensor spectra at ω = c|k|.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PactInterpolation {
    Nearest = 0,
    Linear = 1,
}

/// Reconstruction settings; start from [`pact_recon_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PactReconOptions {
    /// Image side in samples (the image is square or cubic).
    pub grid_size: usize,
    /// Image spacing (mm).
    pub spacing: f64,
    /// k-grid oversampling relative to the image grid.
    pub oversample: usize,
    /// Temporal zero-padding factor.
    pub pad: usize,
    pub interpolation: PactInterpolation,
    /// Speed of sound (mm/μs).
    pub c: f64,
    /// Ratio β/Cp.
    pub beta_over_cp: f64,
}

impl Default for PactReconOptions {
    fn default() -> Self {
        Self {
            grid_size: 256,
            spacing: 0.1,
            oversample: 2,
            pad: 8,
            interpolation: PactInterpolation::Nearest,
            c: 1.5,
            beta_over_cp: 1000.0,
        }
    }
}

/// Image or absorbed-energy field on a regular 2D or 3D grid.
pub struct PactObjectField(ObjectField);

/// Sampled pressure traces with their sensor geometry and time axis.
pub struct PactPressureSeries(PressureSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(PactStatus, String);

impl From<PactError> for Failure {
    fn from(e: PactError) -> Self {
        let status = match &e {
            PactError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => PactStatus::NotFound,
            PactError::Io { .. } => PactStatus::Io,
            PactError::Validation(_) | PactError::UnsupportedDimension(_) => PactStatus::Validation,
            _ => PactStatus::Format,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PactStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PactStatus::InvalidArgument, msg.into())
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PactStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PactStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal error".into());
            set_last_error(format!("internal error: {msg}"));
            PactStatus::Panic
        }
    }
}

unsafe fn path_arg(path: *const c_char) -> Result<PathBuf, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| invalid("path is not valid UTF-8"))
}

unsafe fn slice_arg<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pact_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `len > 0`) and returns the full message length
/// excluding the terminator, or 0 if the last call succeeded.
///
/// # Safety
/// `buf` must be NULL or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pact_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Defaults: 256 samples at 0.1 mm, oversample 2, pad 8, nearest
/// interpolation, c = 1.5 mm/μs, β/Cp = 1000.
///
/// # Safety
/// `out` must be NULL or point to a writable `PactReconOptions`.
#[no_mangle]
pub unsafe extern "C" fn pact_recon_options_default(out: *mut PactReconOptions) -> PactStatus {
    guard(|| {
        *out.as_mut().ok_or_else(|| null("options"))? = PactReconOptions::default();
        Ok(())
    })
}

/// Creates a field centered on the origin from row-major `values` (last axis
/// fastest). `shape` holds `ndim` entries; `ndim` is 2 or 3.
///
/// # Safety
/// `shape` must point to `ndim` values, `values` to the product of the shape,
/// and `out` to a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pact_object_new(
    ndim: usize,
    shape: *const usize,
    spacing: f64,
    values: *const f64,
    out: *mut *mut PactObjectField,
) -> PactStatus {
    guard(|| {
        if !(2..=3).contains(&ndim) {
            return Err(invalid(format!("ndim must be 2 or 3, got {ndim}")));
        }
        let shape = slice_arg(shape, ndim, "shape")?.to_vec();
        let len = shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        let len = len.ok_or_else(|| invalid("shape overflows"))?;
        let values = slice_arg(values, len, "values")?.to_vec();
        let grid = GridSpec::centered(shape, vec![spacing; ndim])?;
        out_arg(out, PactObjectField(ObjectField::new(grid, values)?))
    })
}

/// Reads an object container.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pact_object_read(path: *const c_char, out: *mut *mut PactObjectField) -> PactStatus {
    guard(|| {
        let field = read_container(path_arg(path)?)?.into_object()?;
        out_arg(out, PactObjectField(field))
    })
}

/// Writes an object container.
///
/// # Safety
/// `object` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pact_object_write(object: *const PactObjectField, path: *const c_char) -> PactStatus {
    guard(|| {
        let object = ref_arg(object, "object")?;
        write_container(path_arg(path)?, &Payload::Object(object.0.clone()))?;
        Ok(())
    })
}

/// Number of axes (2 or 3), or 0 for a NULL handle.
///
/// # Safety
/// `object` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pact_object_ndim(object: *const PactObjectField) -> usize {
    object.as_ref().map_or(0, |o| o.0.grid().dim())
}

/// Total number of samples, or 0 for a NULL handle.
///
/// # Safety
/// `object` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pact_object_len(object: *const PactObjectField) -> usize {
    object.as_ref().map_or(0, |o| o.0.values().len())
}

/// Copies shape, spacing (mm) and origin (mm) into arrays of `ndim` entries;
/// any of them may be NULL.
///
/// # Safety
/// `object` must be a live handle; non-NULL outputs must hold `ndim` values.
#[no_mangle]
pub unsafe extern "C" fn pact_object_grid(
    object: *const PactObjectField,
    shape: *mut usize,
    spacing: *mut f64,
    origin: *mut f64,
) -> PactStatus {
    guard(|| {
        let g = ref_arg(object, "object")?.0.grid();
        let dim = g.dim();
        if !shape.is_null() {
            ptr::copy_nonoverlapping(g.shape().as_ptr(), shape, dim);
        }
        if !spacing.is_null() {
            ptr::copy_nonoverlapping(g.spacing().as_ptr(), spacing, dim);
        }
        if !origin.is_null() {
            ptr::copy_nonoverlapping(g.origin().as_ptr(), origin, dim);
        }
        Ok(())
    })
}

/// Row-major samples, valid until the handle is freed; NULL for a NULL handle.
///
/// # Safety
/// `object` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pact_object_data(object: *const PactObjectField) -> *const f64 {
    object.as_ref().map_or(ptr::null(), |o| o.0.values().as_ptr())
}

/// Releases an object handle; NULL is ignored.
///
/// # Safety
/// `object` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pact_object_free(object: *mut PactObjectField) {
    if !object.is_null() {
        drop(Box::from_raw(object));
    }
}

/// Creates pressure data from `num_sensors` positions (`ndim` coordinates
/// each, row-major) on a circle or sphere of `radius`, quadrature `weights`
/// (NULL for uniform weights), and `num_sensors × nt` samples, sensor-major.
///
/// # Safety
/// Pointers must reference arrays of the sizes above and `out` a writable
/// handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_new(
    ndim: usize,
    num_sensors: usize,
    positions: *const f64,
    weights: *const f64,
    radius: f64,
    dt: f64,
    nt: usize,
    samples: *const f64,
    out: *mut *mut PactPressureSeries,
) -> PactStatus {
    guard(|| {
        if !(2..=3).contains(&ndim) {
            return Err(invalid(format!("ndim must be 2 or 3, got {ndim}")));
        }
        let count = num_sensors
            .checked_mul(ndim)
            .ok_or_else(|| invalid("sensor count overflows"))?;
        let positions = slice_arg(positions, count, "positions")?.to_vec();
        let weights = if weights.is_null() {
            let measure = pact_core::geometry::aperture_measure(ndim, radius);
            vec![measure / num_sensors.max(1) as f64; num_sensors]
        } else {
            slice_arg(weights, num_sensors, "weights")?.to_vec()
        };
        let geom = SensorGeometry::new(ndim, radius, positions, weights)?;
        let total = num_sensors
            .checked_mul(nt)
            .ok_or_else(|| invalid("sample count overflows"))?;
        let samples = slice_arg(samples, total, "samples")?.to_vec();
        let series = PressureSeries::new(geom, TimeAxis::new(dt, nt)?, samples)?;
        out_arg(out, PactPressureSeries(series))
    })
}

/// Simulates pressure from an object with the k-space forward model on
/// `num_sensors` sensors spread uniformly over a circle (2D objects) or a
/// Fibonacci sphere (3D objects) of `radius`.
///
/// # Safety
/// `object` must be a live handle and `out` a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pact_simulate(
    object: *const PactObjectField,
    num_sensors: usize,
    radius: f64,
    dt: f64,
    nt: usize,
    c: f64,
    beta_over_cp: f64,
    out: *mut *mut PactPressureSeries,
) -> PactStatus {
    guard(|| {
        let object = &ref_arg(object, "object")?.0;
        let geom = match object.grid().dim() {
            2 => SensorGeometry::circle(num_sensors, radius)?,
            _ => SensorGeometry::fibonacci_sphere(num_sensors, radius)?,
        };
        let consts = AcousticConstants::new(c, beta_over_cp)?;
        let data = spectral_forward(object, &geom, TimeAxis::new(dt, nt)?, &consts)?;
        out_arg(out, PactPressureSeries(data))
    })
}

/// Reads a pressure container.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_read(path: *const c_char, out: *mut *mut PactPressureSeries) -> PactStatus {
    guard(|| {
        let data = read_container(path_arg(path)?)?.into_pressure()?;
        out_arg(out, PactPressureSeries(data))
    })
}

/// Writes a pressure container.
///
/// # Safety
/// `data` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_write(data: *const PactPressureSeries, path: *const c_char) -> PactStatus {
    guard(|| {
        let data = ref_arg(data, "pressure")?;
        write_container(path_arg(path)?, &Payload::Pressure(data.0.clone()))?;
        Ok(())
    })
}

/// Number of sensors, or 0 for a NULL handle.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_num_sensors(data: *const PactPressureSeries) -> usize {
    data.as_ref().map_or(0, |d| d.0.num_sensors())
}

/// Samples per trace, or 0 for a NULL handle.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_nt(data: *const PactPressureSeries) -> usize {
    data.as_ref().map_or(0, |d| d.0.nt())
}

/// Sampling interval (μs), or 0 for a NULL handle.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_dt(data: *const PactPressureSeries) -> f64 {
    data.as_ref().map_or(0.0, |d| d.0.dt())
}

/// Sensor-major samples (`num_sensors × nt`), valid until the handle is
/// freed; NULL for a NULL handle.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_data(data: *const PactPressureSeries) -> *const f64 {
    data.as_ref().map_or(ptr::null(), |d| d.0.samples().as_ptr())
}

/// Releases a pressure handle; NULL is ignored.
///
/// # Safety
/// `data` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pact_pressure_free(data: *mut PactPressureSeries) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Fourier-domain reconstruction onto a grid centered on the origin.
///
/// # Safety
/// `data` must be a live handle, `options` NULL (defaults) or a valid
/// pointer whose `interpolation` is a declared enumerator, and `out` a
/// writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pact_reconstruct(
    data: *const PactPressureSeries,
    options: *const PactReconOptions,
    out: *mut *mut PactObjectField,
) -> PactStatus {
    guard(|| {
        let data = &ref_arg(data, "pressure")?.0;
        let opts = options.as_ref().copied().unwrap_or_default();
        let dim = data.geometry().dim();
        let params = ReconParams {
            grid: GridSpec::cube(dim, opts.grid_size, opts.spacing)?,
            oversample: opts.oversample,
            pad: opts.pad,
            interpolation: match opts.interpolation {
                PactInterpolation::Nearest => Interpolation::Nearest,
                PactInterpolation::Linear => Interpolation::Linear,
            },
        };
        let consts = AcousticConstants::new(opts.c, opts.beta_over_cp)?;
        let (image, _) = reconstruct(data, &params, &consts)?;
        out_arg(out, PactObjectField(image))
    })
}
