use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use pact_core::forward::spectral_forward;
use pact_core::recon::{reconstruct, ReconParams};
use pact_core::{AcousticConstants, GridSpec, ObjectField, SensorGeometry, TimeAxis};
use pact_ffi::*;

fn last_error() -> String {
    let len = unsafe { pact_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0u8; len + 1];
    unsafe { pact_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    CStr::from_bytes_until_nul(&buf).unwrap().to_str().unwrap().to_owned()
}

fn cpath(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn gaussian(n: usize, h: f64, sigma: f64) -> Vec<f64> {
    let half = (n / 2) as f64;
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 - half) * h, (j as f64 - half) * h);
            v.push((-(x * x + y * y) / (2.0 * sigma * sigma)).exp());
        }
    }
    v
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(pact_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn object_roundtrip_through_container() {
    let dir = tempfile::tempdir().unwrap();
    let path = cpath(&dir.path().join("obj.pact"));
    let values: Vec<f64> = (0..12).map(|i| i as f64 * 0.5 - 1.0).collect();
    let shape = [3usize, 4];
    let mut obj = ptr::null_mut();
    unsafe {
        assert_eq!(
            pact_object_new(2, shape.as_ptr(), 0.25, values.as_ptr(), &mut obj),
            PactStatus::Ok
        );
        assert_eq!(pact_object_write(obj, path.as_ptr()), PactStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(pact_object_read(path.as_ptr(), &mut back), PactStatus::Ok);
        assert_eq!(pact_object_ndim(back), 2);
        assert_eq!(pact_object_len(back), 12);
        let (mut s, mut h, mut o) = ([0usize; 2], [0f64; 2], [0f64; 2]);
        assert_eq!(
            pact_object_grid(back, s.as_mut_ptr(), h.as_mut_ptr(), o.as_mut_ptr()),
            PactStatus::Ok
        );
        assert_eq!(s, shape);
        assert_eq!(h, [0.25, 0.25]);
        assert_eq!(o, [-0.25, -0.5]);
        let data = std::slice::from_raw_parts(pact_object_data(back), 12);
        assert_eq!(data, &values[..]);
        pact_object_free(obj);
        pact_object_free(back);
    }
}

#[test]
fn simulate_and_reconstruct() {
    let (n, h) = (32usize, 0.1);
    let values = gaussian(n, h, 0.3);
    let shape = [n, n];
    let mut obj = ptr::null_mut();
    let mut data = ptr::null_mut();
    let mut img = ptr::null_mut();
    unsafe {
        assert_eq!(
            pact_object_new(2, shape.as_ptr(), h, values.as_ptr(), &mut obj),
            PactStatus::Ok
        );
        assert_eq!(
            pact_simulate(obj, 128, 2.5, 0.025, 256, 1.5, 1000.0, &mut data),
            PactStatus::Ok
        );
        assert_eq!(pact_pressure_num_sensors(data), 128);
        assert_eq!(pact_pressure_nt(data), 256);
        assert_eq!(pact_pressure_dt(data), 0.025);

        let mut opts = PactReconOptions::default();
        assert_eq!(pact_recon_options_default(&mut opts), PactStatus::Ok);
        opts.grid_size = n;
        opts.spacing = h;
        assert_eq!(pact_reconstruct(data, &opts, &mut img), PactStatus::Ok);
        let out = std::slice::from_raw_parts(pact_object_data(img), n * n);

        // Same pipeline through the Rust API.
        let grid = GridSpec::cube(2, n, h).unwrap();
        let object = ObjectField::new(grid.clone(), values.clone()).unwrap();
        let consts = AcousticConstants::new(1.5, 1000.0).unwrap();
        let geom = SensorGeometry::circle(128, 2.5).unwrap();
        let p = spectral_forward(&object, &geom, TimeAxis::new(0.025, 256).unwrap(), &consts).unwrap();
        assert_eq!(
            std::slice::from_raw_parts(pact_pressure_data(data), 128 * 256),
            p.samples()
        );
        let (want, _) = reconstruct(&p, &ReconParams::with_defaults(grid), &consts).unwrap();
        assert_eq!(out, want.values());
        let centre = out[n / 2 * n + n / 2];
        assert!(out.iter().all(|&v| v <= centre));
        pact_object_free(img);
        pact_pressure_free(data);
        pact_object_free(obj);
    }
}

#[test]
fn pressure_from_raw_arrays() {
    let positions = [1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
    let samples = vec![0.5; 4 * 8];
    let mut data = ptr::null_mut();
    let dir = tempfile::tempdir().unwrap();
    let path = cpath(&dir.path().join("p.pact"));
    unsafe {
        assert_eq!(
            pact_pressure_new(
                2,
                4,
                positions.as_ptr(),
                ptr::null(),
                1.0,
                0.1,
                8,
                samples.as_ptr(),
                &mut data
            ),
            PactStatus::Ok
        );
        assert_eq!(pact_pressure_write(data, path.as_ptr()), PactStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(pact_pressure_read(path.as_ptr(), &mut back), PactStatus::Ok);
        let got = std::slice::from_raw_parts(pact_pressure_data(back), 32);
        assert_eq!(got, &samples[..]);
        pact_pressure_free(back);
        pact_pressure_free(data);

        // A sensor off the circle violates the geometry invariant.
        let off = [2.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        assert_eq!(
            pact_pressure_new(
                2,
                4,
                off.as_ptr(),
                ptr::null(),
                1.0,
                0.1,
                8,
                samples.as_ptr(),
                &mut data
            ),
            PactStatus::Validation
        );
        assert!(!last_error().is_empty());
    }
}

#[test]
fn error_statuses_and_messages() {
    let dir = tempfile::tempdir().unwrap();
    let missing = cpath(&dir.path().join("missing.pact"));
    let garbage_path = dir.path().join("garbage.pact");
    std::fs::write(&garbage_path, b"not a container at all").unwrap();
    let garbage = cpath(&garbage_path);
    let mut obj = ptr::null_mut();
    unsafe {
        assert_eq!(pact_object_read(missing.as_ptr(), &mut obj), PactStatus::NotFound);
        assert!(last_error().contains("missing.pact"));
        assert!(obj.is_null());
        assert_eq!(pact_object_read(garbage.as_ptr(), &mut obj), PactStatus::Format);
        assert_eq!(pact_object_read(ptr::null(), &mut obj), PactStatus::NullPointer);
        assert_eq!(
            pact_object_new(4, ptr::null(), 1.0, ptr::null(), &mut obj),
            PactStatus::InvalidArgument
        );
        assert_eq!(
            pact_reconstruct(ptr::null(), ptr::null(), &mut obj),
            PactStatus::NullPointer
        );

        // Success clears the message.
        assert_eq!(
            pact_recon_options_default(&mut PactReconOptions::default()),
            PactStatus::Ok
        );
        assert_eq!(last_error(), "");

        // Truncation keeps the terminator.
        pact_object_read(missing.as_ptr(), &mut obj);
        let mut small = [1 as std::ffi::c_char; 5];
        let full = pact_last_error_message(small.as_mut_ptr(), small.len());
        assert!(full > 4);
        assert_eq!(small[4], 0);

        // NULL handles are tolerated by accessors and free functions.
        assert_eq!(pact_object_len(ptr::null()), 0);
        assert!(pact_pressure_data(ptr::null()).is_null());
        pact_object_free(ptr::null_mut());
        pact_pressure_free(ptr::null_mut());
    }
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include "pact.h"
#include <stdio.h>
#include <string.h>

int main(void) {
    PactReconOptions opts;
    if (pact_recon_options_default(&opts) != PACT_STATUS_OK || opts.grid_size != 256) return 1;
    PactObjectField *obj = NULL;
    if (pact_object_read("/nonexistent/x.pact", &obj) != PACT_STATUS_NOT_FOUND) return 2;
    char msg[256];
    if (pact_last_error_message(msg, sizeof msg) == 0) return 3;
    size_t shape[2] = {2, 2};
    double v[4] = {1, 2, 3, 4};
    if (pact_object_new(2, shape, 0.5, v, &obj) != PACT_STATUS_OK) return 4;
    if (pact_object_len(obj) != 4 || pact_object_data(obj)[3] != 4.0) return 5;
    pact_object_free(obj);
    printf("%s\n", pact_version());
    return 0;
}
"#,
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = profile_dir().join("libpact_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C test program failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C test program exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
