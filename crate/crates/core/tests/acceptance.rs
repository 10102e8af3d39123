//! Acceptance run: one PASS/FAIL line per criterion, written straight to
//! stderr so it shows up whether or not the harness captures output.
//! Lines tagged "info" are supplementary measurements, not verdicts.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use pact_core::bench::{kspace_model, loglog_slope, run_bench, BenchConfig};
use pact_core::container::{decode, encode, Attributes, Payload};
use pact_core::forward::{add_noise, analytic_sphere_forward, analytic_sphere_forward_bandlimited, spectral_forward};
use pact_core::metrics::{central_profile, nrmse, Roi};
use pact_core::phantom::{make_disk_phantom, make_gaussian_phantom, DiskPhantomSpec, GaussianPhantomSpec};
use pact_core::recon::{invert_spectrum, reconstruct, reconstruct_with_spectrum, Interpolation, ReconParams};
use pact_core::{AcousticConstants, GridSpec, ObjectField, PressureSeries, SensorGeometry, Spectrum, TimeAxis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SENSORS: usize = 256;
const RADIUS: f64 = 12.8;
const RATE_MHZ: f64 = 30.0;
const NT: usize = 2048;

fn consts() -> AcousticConstants {
    AcousticConstants::new(1.5, 1000.0).unwrap()
}

fn say(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

struct Verdicts(Vec<(String, bool)>);

impl Verdicts {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        say(&format!(
            "{} criterion {id}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        ));
        self.0.push((id.to_string(), pass));
    }
}

fn info(id: &str, detail: String) {
    say(&format!("info criterion {id}: {detail}"));
}

fn study_time() -> TimeAxis {
    TimeAxis::from_rate(RATE_MHZ, NT).unwrap()
}

fn study_params() -> ReconParams {
    ReconParams {
        grid: GridSpec::cube(2, 256, 0.1).unwrap(),
        oversample: 2,
        pad: 8,
        interpolation: Interpolation::Nearest,
    }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

/// Max |a − b| over grid points with |r| ≤ radius.
fn max_error_within(a: &ObjectField, b: impl Fn(&[f64]) -> f64, radius: f64) -> f64 {
    let g = a.grid();
    (0..g.len())
        .filter_map(|i| {
            let p = g.position(i);
            (p.iter().map(|x| x * x).sum::<f64>() <= radius * radius).then(|| (a.values()[i] - b(&p)).abs())
        })
        .fold(0.0, f64::max)
}

fn criterion_1(v: &mut Verdicts) {
    let c = consts();
    let spec = GaussianPhantomSpec {
        center: vec![2.0, 0.0],
        sigma: 0.5,
        amplitude: 1.0,
    };
    let t0 = Instant::now();
    let (img, acc) = single_thread(|| {
        let obj = make_gaussian_phantom(&spec, &GridSpec::cube(2, 224, 0.05).unwrap()).unwrap();
        let geom = SensorGeometry::circle(SENSORS, RADIUS).unwrap();
        let data = spectral_forward(&obj, &geom, study_time(), &c).unwrap();
        let (img, acc, _) = reconstruct_with_spectrum(&data, &study_params(), &c).unwrap();
        (img, acc)
    });
    let secs = t0.elapsed().as_secs_f64();

    // Closed form ∫A e^{−ik·r} dr of the Gaussian, evaluated independently.
    let two_pi_s2 = 2.0 * PI * spec.sigma * spec.sigma;
    let exact = |k: &[f64]| {
        let k2 = k[0] * k[0] + k[1] * k[1];
        let phase = -(k[0] * spec.center[0] + k[1] * spec.center[1]);
        Complex64::from_polar(
            spec.amplitude * two_pi_s2 * (-0.5 * spec.sigma * spec.sigma * k2).exp(),
            phase,
        )
    };
    let peak = spec.amplitude * two_pi_s2;
    let k_band = PI / (study_time().dt() * c.c());
    let (mut worst, mut worst_k, mut worst_off_dc) = (0.0f64, 0.0, 0.0f64);
    for (i, &a) in acc.values().iter().enumerate() {
        let k = acc.k_at(i);
        let km = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        if km > 0.8 * k_band {
            continue;
        }
        let e = (a - exact(&k)).norm() / peak;
        if e > worst {
            worst = e;
            worst_k = km;
        }
        if km > 0.0 {
            worst_off_dc = worst_off_dc.max(e);
        }
    }
    let pass = worst <= 0.01 && secs < 60.0;
    v.record(
        "1",
        pass,
        format!(
            "max |Â − Â_exact| / peak = {worst:.3e} at |k| = {worst_k:.3} rad/mm (limit 1e-2); runtime {secs:.1} s (limit 60 s)"
        ),
    );
    info("1", format!("max error excluding k = 0: {worst_off_dc:.3e} of peak"));
    let inside = max_error_within(
        &img,
        |p| {
            let d2 = (p[0] - spec.center[0]).powi(2) + (p[1] - spec.center[1]).powi(2);
            spec.amplitude * (-d2 / (2.0 * spec.sigma * spec.sigma)).exp()
        },
        RADIUS,
    );
    info(
        "1",
        format!("image max error inside the aperture: {inside:.3e} of peak"),
    );
}

struct DiskStudy {
    truth: ObjectField,
    spec: DiskPhantomSpec,
    data: PressureSeries,
    clean: ObjectField,
    roi: Roi,
}

/// Blurred disk phantom point-sampled on the reconstruction grid: rendered
/// four times finer and decimated so sample positions coincide.
fn disk_truth(params: &ReconParams) -> (ObjectField, DiskPhantomSpec) {
    let n = params.grid.shape()[0];
    let h = params.grid.spacing()[0];
    let fine = make_disk_phantom(&DiskPhantomSpec::default_layout(
        GridSpec::cube(2, 4 * n, h / 4.0).unwrap(),
    ))
    .unwrap();
    let values = (0..n * n).map(|i| fine.get(&[4 * (i / n), 4 * (i % n)])).collect();
    let truth = ObjectField::new(params.grid.clone(), values).unwrap();
    (truth, DiskPhantomSpec::default_layout(params.grid.clone()))
}

fn criterion_2(v: &mut Verdicts) -> DiskStudy {
    let c = consts();
    let params = study_params();
    let t0 = Instant::now();
    let forward_grid = GridSpec::cube(2, 224, 0.05).unwrap();
    let (data, clean) = single_thread(|| {
        let obj = make_disk_phantom(&DiskPhantomSpec::default_layout(forward_grid.clone())).unwrap();
        let geom = SensorGeometry::circle(SENSORS, RADIUS).unwrap();
        let data = spectral_forward(&obj, &geom, study_time(), &c).unwrap();
        let (clean, _) = reconstruct(&data, &params, &c).unwrap();
        (data, clean)
    });
    let secs = t0.elapsed().as_secs_f64();
    let (truth, spec) = disk_truth(&params);
    let fov = 0.5 * forward_grid.shape()[0] as f64 * forward_grid.spacing()[0];
    let roi = Roi::centered_box(&params.grid, fov);
    let peak = truth.max_abs();
    let err = nrmse(&clean, &truth, Some(&roi)).unwrap();
    let pr = central_profile(&clean, 1).unwrap();
    let pt = central_profile(&truth, 1).unwrap();
    let dev = pr.max_abs_deviation(&pt) / peak;
    let pass = dev <= 0.05 && err <= 0.05 && secs < 120.0;
    v.record(
        "2",
        pass,
        format!(
            "profile max deviation {:.2}% of peak (limit 5%), NRMSE {:.2}% in the {:.1} mm field (limit 5%); runtime {secs:.1} s (limit 120 s)",
            100.0 * dev,
            100.0 * err,
            2.0 * fov
        ),
    );
    let offset = {
        let (mut sum, mut count) = (0.0, 0usize);
        for i in 0..truth.grid().len() {
            if roi_contains(&roi, &truth.grid().unravel(i)) {
                sum += clean.values()[i] - truth.values()[i];
                count += 1;
            }
        }
        sum / count as f64
    };
    let shifted: Vec<f64> = pr.values.iter().map(|x| x - offset).collect();
    let dev_shifted = shifted
        .iter()
        .zip(&pt.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / peak;
    info(
        "2",
        format!(
            "mean image offset in the field {:.4} of peak; profile deviation with it removed {:.2}%",
            offset / peak,
            100.0 * dev_shifted
        ),
    );
    DiskStudy {
        truth,
        spec,
        data,
        clean,
        roi,
    }
}

fn roi_contains(roi: &Roi, idx: &[usize]) -> bool {
    idx.iter().enumerate().all(|(a, &i)| i >= roi.lo[a] && i < roi.hi[a])
}

/// Mean over the inner half radius of each disk minus the mean over
/// phantom-free pixels of the field.
fn disk_contrasts(img: &ObjectField, study: &DiskStudy) -> Vec<f64> {
    let g = img.grid();
    let (mut bg, mut nbg) = (0.0, 0usize);
    for i in 0..g.len() {
        if study.truth.values()[i].abs() < 1e-3 && roi_contains(&study.roi, &g.unravel(i)) {
            bg += img.values()[i];
            nbg += 1;
        }
    }
    let bg = bg / nbg as f64;
    study
        .spec
        .disks
        .iter()
        .map(|d| {
            let (mut s, mut n) = (0.0, 0usize);
            for i in 0..g.len() {
                let p = g.position(i);
                let r2 = (p[0] - d.center[0]).powi(2) + (p[1] - d.center[1]).powi(2);
                if r2 <= (0.5 * d.radius).powi(2) {
                    s += img.values()[i];
                    n += 1;
                }
            }
            s / n as f64 - bg
        })
        .collect()
}

fn criterion_3(v: &mut Verdicts, study: &DiskStudy) {
    let c = consts();
    let noisy = add_noise(&study.data, 0.05, 20_240_917).unwrap();
    let (img, _) = single_thread(|| reconstruct(&noisy, &study_params(), &c).unwrap());
    let clean_err = nrmse(&study.clean, &study.truth, Some(&study.roi)).unwrap();
    let err = nrmse(&img, &study.truth, Some(&study.roi)).unwrap();
    let limit = 2.0 * clean_err + 0.05;
    let clean_c = disk_contrasts(&study.clean, study);
    let noisy_c = disk_contrasts(&img, study);
    let ratios: Vec<f64> = noisy_c.iter().zip(&clean_c).map(|(n, c)| n / c).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = err <= limit && min_ratio > 0.5;
    v.record(
        "3",
        pass,
        format!(
            "noisy NRMSE {:.2}% (limit {:.2}%); lowest disk contrast ratio {min_ratio:.3} (limit > 0.5)",
            100.0 * err,
            100.0 * limit
        ),
    );
    info(
        "3",
        format!(
            "contrast ratios per disk {:?}",
            ratios.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    );
}

/// Transform of a uniform ball of radius `a` and value `amp` at the origin.
fn ball_transform(k: f64, a: f64, amp: f64) -> f64 {
    let x = k * a;
    let vol = 4.0 / 3.0 * PI * a * a * a;
    if x < 1e-3 {
        amp * vol * (1.0 - x * x / 10.0)
    } else {
        amp * 4.0 * PI * (x.sin() - x * x.cos()) / (k * k * k)
    }
}

fn criterion_4(v: &mut Verdicts) {
    let c = consts();
    let (a, amp) = (1.5, 1.0);
    let center = [0.4, -0.2, 0.6];
    let geom = SensorGeometry::fibonacci_sphere(128, RADIUS).unwrap();
    let time = TimeAxis::from_rate(1.0, 32).unwrap();
    let params = ReconParams {
        grid: GridSpec::cube(3, 64, 0.2).unwrap(),
        oversample: 2,
        pad: 8,
        interpolation: Interpolation::Nearest,
    };
    let data = analytic_sphere_forward_bandlimited(center, a, amp, &geom, time, &c, PI / time.dt()).unwrap();
    let (img, _) = single_thread(|| reconstruct(&data, &params, &c).unwrap());

    // Ground truth: exact transform, zeroed beyond the recorded band.
    let kgrid = params.k_grid().unwrap();
    let k_max = PI / (time.dt() * c.c());
    let values = (0..kgrid.len())
        .map(|i| {
            let k = kgrid.position(i);
            let km = k.iter().map(|x| x * x).sum::<f64>().sqrt();
            if c.c() * km > PI / time.dt() || km > k_max {
                return Complex64::new(0.0, 0.0);
            }
            let phase = -(k[0] * center[0] + k[1] * center[1] + k[2] * center[2]);
            Complex64::from_polar(ball_transform(km, a, amp), phase)
        })
        .collect();
    let (truth, _) = invert_spectrum(&Spectrum::new(kgrid, values).unwrap(), &params.grid).unwrap();

    let g = img.grid();
    let idx = g.unravel(img.argmax());
    let pos: Vec<f64> = (0..3).map(|ax| g.coord(ax, idx[ax])).collect();
    let off = (0..3).map(|ax| (pos[ax] - center[ax]).abs()).fold(0.0, f64::max);
    let h = g.spacing()[0];
    let (peak, true_peak) = (img.values()[img.argmax()], truth.values()[truth.argmax()]);
    let rel = (peak - true_peak).abs() / true_peak;
    let pass = off <= h + 1e-9 && rel <= 0.15;
    v.record(
        "4",
        pass,
        format!(
            "peak at {pos:?} mm, {:.2} voxels from the true center (limit 1); peak {peak:.4} vs band-limited truth {true_peak:.4}, {:.1}% off (limit 15%)",
            off / h,
            100.0 * rel
        ),
    );
    let sampled = analytic_sphere_forward(center, a, amp, &geom, time, &c).unwrap();
    let (img_s, _) = single_thread(|| reconstruct(&sampled, &params, &c).unwrap());
    info(
        "4",
        format!(
            "point-sampled N-wave traces without low-pass: peak {:.4}, {:.1}% off the truth",
            img_s.values()[img_s.argmax()],
            100.0 * (img_s.values()[img_s.argmax()] - true_peak).abs() / true_peak
        ),
    );
}

fn criterion_5(v: &mut Verdicts) {
    let c = consts();
    let cfg = BenchConfig {
        sizes: vec![64, 128, 256],
        sensors: SENSORS,
        repeats: 2,
        ..BenchConfig::default()
    };
    let rows = single_thread(|| run_bench(&cfg, &c).unwrap());
    let seconds = |stage: &str, n: usize| rows.iter().find(|r| r.stage == stage && r.n == n).unwrap().seconds;
    let ns: Vec<f64> = cfg.sizes.iter().map(|&n| n as f64).collect();
    let measured: Vec<f64> = cfg.sizes.iter().map(|&n| seconds("kspace", n)).collect();
    let model: Vec<f64> = cfg
        .sizes
        .iter()
        .map(|&n| kspace_model(n, 2, cfg.oversample, SENSORS))
        .collect();
    let (s_meas, s_model) = (loglog_slope(&ns, &measured), loglog_slope(&ns, &model));
    let rel = (s_meas - s_model).abs() / s_model;
    v.record(
        "5a",
        rel <= 0.2,
        format!(
            "k-space time slope {s_meas:.3} vs model {s_model:.3}, {:.1}% apart (limit 20%)",
            100.0 * rel
        ),
    );
    let totals: Vec<f64> = cfg.sizes.iter().map(|&n| seconds("fourier_total", n)).collect();
    info(
        "5a",
        format!(
            "k-space seconds {measured:.4?}; full Fourier seconds {totals:.4?}; full-pipeline slope {:.3}",
            loglog_slope(&ns, &totals)
        ),
    );
    let (fourier, das) = (seconds("fourier_total", 256), seconds("delay_and_sum", 256));
    let speedup = das / fourier;
    v.record(
        "5b",
        speedup >= 20.0,
        format!("Fourier {fourier:.3} s vs delay-and-sum {das:.3} s at N = 256: {speedup:.2}x (limit 20x)"),
    );
    info(
        "5b",
        format!(
            "stage seconds at N = 256: temporal FFT {:.3}, accumulate {:.3}, inverse FFT {:.3}",
            seconds("temporal_fft", 256),
            seconds("accumulate", 256),
            seconds("inverse_fft", 256)
        ),
    );
}

fn random_series(geom: &SensorGeometry, time: TimeAxis, seed: u64) -> PressureSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..geom.len() * time.nt()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PressureSeries::new(geom.clone(), time, samples).unwrap()
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn criterion_6(v: &mut Verdicts) {
    let c = consts();
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    // Container roundtrip identity.
    let grid2 = GridSpec::cube(2, 32, 0.1).unwrap();
    let obj = make_gaussian_phantom(
        &GaussianPhantomSpec {
            center: vec![0.3, -0.2],
            sigma: 0.3,
            amplitude: 1.0,
        },
        &grid2,
    )
    .unwrap();
    let geom = SensorGeometry::circle(48, 2.5).unwrap();
    let time = TimeAxis::new(0.04, 256).unwrap();
    let data = random_series(&geom, time, 3);
    for payload in [Payload::Object(obj.clone()), Payload::Pressure(data.clone())] {
        let back = decode(&encode(&payload, &Attributes::new()).unwrap()).unwrap().0;
        check("container roundtrip", back == payload);
    }

    // Linearity of forward and reconstruction.
    let obj_b = make_gaussian_phantom(
        &GaussianPhantomSpec {
            center: vec![-0.4, 0.1],
            sigma: 0.2,
            amplitude: 2.0,
        },
        &grid2,
    )
    .unwrap();
    let mix = ObjectField::new(
        grid2.clone(),
        obj.values()
            .iter()
            .zip(obj_b.values())
            .map(|(x, y)| 1.5 * x - 0.5 * y)
            .collect(),
    )
    .unwrap();
    let fa = spectral_forward(&obj, &geom, time, &c).unwrap();
    let fb = spectral_forward(&obj_b, &geom, time, &c).unwrap();
    let fm = spectral_forward(&mix, &geom, time, &c).unwrap();
    let want: Vec<f64> = fa
        .samples()
        .iter()
        .zip(fb.samples())
        .map(|(x, y)| 1.5 * x - 0.5 * y)
        .collect();
    let forward_lin = max_rel_diff(fm.samples(), &want);
    check("forward linearity", forward_lin <= 1e-10);

    let params = ReconParams::with_defaults(GridSpec::cube(2, 32, 0.1).unwrap());
    let data_b = random_series(&geom, time, 4);
    let (ra, rep) = reconstruct(&data, &params, &c).unwrap();
    let (rb, _) = reconstruct(&data_b, &params, &c).unwrap();
    let dm = data
        .with_samples(
            data.samples()
                .iter()
                .zip(data_b.samples())
                .map(|(x, y)| 1.5 * x - 0.5 * y)
                .collect(),
        )
        .unwrap();
    let (rm, _) = reconstruct(&dm, &params, &c).unwrap();
    let want: Vec<f64> = ra
        .values()
        .iter()
        .zip(rb.values())
        .map(|(x, y)| 1.5 * x - 0.5 * y)
        .collect();
    let recon_lin = max_rel_diff(rm.values(), &want);
    check("reconstruction linearity", recon_lin <= 1e-10);

    // Zero in, zero out.
    let zero_obj = ObjectField::zeros(grid2.clone());
    check(
        "forward zero",
        spectral_forward(&zero_obj, &geom, time, &c)
            .unwrap()
            .samples()
            .iter()
            .all(|&x| x == 0.0),
    );
    let (zi, _) = reconstruct(&PressureSeries::zeros(geom.clone(), time), &params, &c).unwrap();
    check("reconstruction zero", zi.values().iter().all(|&x| x == 0.0));

    // Hermitian symmetry and realness on synthetic data.
    check("hermitian symmetry", rep.hermitian_asymmetry <= 1e-10);
    check("realness", rep.imaginary_residue <= 1e-10);

    // Quadrature weight sums.
    let circle: f64 = SensorGeometry::circle(257, 3.7).unwrap().weights().iter().sum();
    let sphere: f64 = SensorGeometry::fibonacci_sphere(301, 3.7)
        .unwrap()
        .weights()
        .iter()
        .sum();
    let w_circle = (circle - 2.0 * PI * 3.7).abs() / (2.0 * PI * 3.7);
    let w_sphere = (sphere - 4.0 * PI * 3.7 * 3.7).abs() / (4.0 * PI * 3.7 * 3.7);
    check("quadrature weights", w_circle <= 1e-9 && w_sphere <= 1e-9);

    // Determinism across thread counts.
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let d = spectral_forward(&obj, &geom, time, &c).unwrap();
                let (img, _) = reconstruct(&d, &params, &c).unwrap();
                (d, img)
            })
    };
    let ((d1, i1), (d4, i4)) = (run(1), run(4));
    check(
        "thread determinism",
        d1.samples() == d4.samples() && i1.values() == i4.values(),
    );

    v.record(
        "6",
        failures.is_empty(),
        format!(
            "forward linearity {forward_lin:.1e}, reconstruction linearity {recon_lin:.1e}, hermitian asymmetry {:.1e}, imaginary residue {:.1e}, weight sums {w_circle:.1e}/{w_sphere:.1e} (limits 1e-10, 1e-9); roundtrip, zero and thread checks{}",
            rep.hermitian_asymmetry,
            rep.imaginary_residue,
            if failures.is_empty() {
                " hold".to_string()
            } else {
                format!(" failed: {failures:?}")
            }
        ),
    );
}

#[test]
fn acceptance_criteria() {
    let mut v = Verdicts(Vec::new());
    criterion_1(&mut v);
    let study = criterion_2(&mut v);
    criterion_3(&mut v, &study);
    criterion_4(&mut v);
    criterion_5(&mut v);
    criterion_6(&mut v);
    let failed: Vec<&str> = v.0.iter().filter(|(_, p)| !p).map(|(id, _)| id.as_str()).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
