//! The `pact` command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::acquisition::{AcousticConstants, PressureSeries, TimeAxis};
use crate::baseline::delay_and_sum;
use crate::bench::{rows_to_csv, run_bench, BenchConfig};
use crate::container::{read_container_with, write_container_with, Attributes, Payload};
use crate::error::{PactError, Result};
use crate::forward::{add_noise, analytic_sphere_forward, analytic_sphere_forward_bandlimited, spectral_forward};
use crate::geometry::SensorGeometry;
use crate::grid::{GridSpec, ObjectField};
use crate::metrics::{central_profile, central_slice, nrmse, write_pgm, Roi};
use crate::phantom::{DiskPhantomSpec, PhantomConfig};
use crate::recon::{reconstruct, Interpolation, ReconParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_FORMAT: i32 = 5;
pub const EXIT_IO: i32 = 6;

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  unexpected failure
  2  usage error (unknown flag, missing or malformed argument)
  3  input file not found
  4  validation error (inputs violate a documented invariant)
  5  malformed container or JSON input
  6  other I/O error";

#[derive(Parser, Debug)]
#[command(name = "pact", version, about = "Fourier-domain photoacoustic tomography toolkit", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a phantom from a JSON description into an object container.
    Phantom(PhantomArgs),
    /// Simulate pressure data from an object (or a uniform sphere).
    Simulate(SimulateArgs),
    /// Add Gaussian noise relative to the global peak pressure.
    Noise(NoiseArgs),
    /// Fourier-domain reconstruction of pressure data.
    Reconstruct(ReconstructArgs),
    /// Delay-and-sum backprojection of pressure data.
    Baseline(BaselineArgs),
    /// Compare an image with a reference and extract central profiles.
    Metrics(MetricsArgs),
    /// Export a 2D image (or the central slice of a 3D image) as 16-bit PGM.
    ExportPgm(ExportArgs),
    /// Time the reconstruction stages and the baseline over image sizes.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct PhantomArgs {
    /// Phantom description (JSON, "kind": "disks" or "gaussian").
    #[arg(long, conflicts_with = "default_disks", required_unless_present = "default_disks")]
    spec: Option<PathBuf>,
    /// Use the built-in five-disk layout instead of a spec file.
    #[arg(long)]
    default_disks: bool,
    /// Render grid side for --default-disks.
    #[arg(long, default_value_t = 224)]
    n: usize,
    /// Render grid spacing (mm) for --default-disks.
    #[arg(long, default_value_t = 0.05)]
    dx: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Copy)]
struct MediumArgs {
    /// Speed of sound (mm/us).
    #[arg(long)]
    c: Option<f64>,
    /// Ratio beta/Cp (arbitrary units).
    #[arg(long)]
    beta_over_cp: Option<f64>,
}

impl MediumArgs {
    /// Flags override values recorded in `attrs`, which override the defaults.
    fn resolve(&self, attrs: &Attributes) -> Result<AcousticConstants> {
        let recorded = |key: &str| attrs.get(key).and_then(|v| v.as_f64());
        let c = self.c.or_else(|| recorded("c")).unwrap_or(1.5);
        let ratio = self.beta_over_cp.or_else(|| recorded("beta_over_cp")).unwrap_or(1000.0);
        AcousticConstants::new(c, ratio)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Object container (omit with --analytic-sphere).
    #[arg(long, required_unless_present = "analytic_sphere")]
    object: Option<PathBuf>,
    /// Sensor layout (JSON); otherwise a uniform circle or Fibonacci sphere.
    #[arg(long)]
    geometry: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    sensors: usize,
    /// Aperture radius (mm).
    #[arg(long, default_value_t = 12.8)]
    radius: f64,
    /// Sampling rate (MHz).
    #[arg(long, default_value_t = 30.0)]
    rate: f64,
    #[arg(long, default_value_t = 2048)]
    nt: usize,
    #[command(flatten)]
    medium: MediumArgs,
    /// Closed-form uniform sphere (3D) instead of the k-space model.
    #[arg(long)]
    analytic_sphere: bool,
    /// Sphere center x,y,z (mm).
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0], allow_hyphen_values = true)]
    sphere_center: Vec<f64>,
    /// Sphere radius (mm).
    #[arg(long, default_value_t = 1.5)]
    sphere_radius: f64,
    /// Absorbed energy density inside the sphere.
    #[arg(long, default_value_t = 1.0)]
    sphere_amplitude: f64,
    /// Low-pass the sphere traces at the Nyquist rate before sampling.
    #[arg(long)]
    antialias: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long)]
    input: PathBuf,
    /// Noise standard deviation as a fraction of the global peak |p|.
    #[arg(long)]
    level: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ImageGridArgs {
    /// Image side in samples.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Image spacing (mm).
    #[arg(long, default_value_t = 0.1)]
    dx: f64,
}

impl ImageGridArgs {
    fn grid(&self, dim: usize) -> Result<GridSpec> {
        GridSpec::cube(dim, self.grid, self.dx)
    }
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    image: ImageGridArgs,
    /// k-grid oversampling relative to the image grid.
    #[arg(long, default_value_t = 2)]
    oversample: usize,
    /// Temporal zero-padding factor.
    #[arg(long, default_value_t = 8)]
    pad: usize,
    /// nearest or linear.
    #[arg(long, default_value = "nearest")]
    interp: Interpolation,
    #[command(flatten)]
    medium: MediumArgs,
    /// Write the reconstruction report (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    image: ImageGridArgs,
    #[command(flatten)]
    medium: MediumArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Image under test.
    #[arg(long)]
    image: PathBuf,
    /// Reference image on the same grid (required for --nrmse).
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Report the normalized RMSE against the reference.
    #[arg(long, requires = "reference")]
    nrmse: bool,
    /// Restrict the NRMSE to |coordinate| ≤ this many mm on every axis.
    #[arg(long)]
    roi_radius: Option<f64>,
    /// Write the central profile of the image as CSV.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Axis of the profile.
    #[arg(long, default_value_t = 0)]
    axis: usize,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    /// Greyscale window lo,hi mapped to [0, 65535].
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [-0.2, 1.2], allow_hyphen_values = true)]
    window: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Image sides to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [64, 128, 256])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    sensors: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Skip the delay-and-sum baseline.
    #[arg(long)]
    no_baseline: bool,
    /// CSV output (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(PactError::Validation(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("pact: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &PactError) -> i32 {
    match e {
        PactError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_NOT_FOUND,
        PactError::Io { .. } => EXIT_IO,
        PactError::Validation(_) | PactError::UnsupportedDimension(_) => EXIT_VALIDATION,
        PactError::BadMagic { .. }
        | PactError::UnsupportedVersion(_)
        | PactError::Truncated { .. }
        | PactError::SizeMismatch { .. }
        | PactError::Metadata(_) => EXIT_FORMAT,
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Phantom(a) => phantom(a),
        Command::Simulate(a) => simulate(a),
        Command::Noise(a) => noise(a, cli.seed),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Baseline(a) => baseline(a),
        Command::Metrics(a) => metrics(a),
        Command::ExportPgm(a) => export(a),
        Command::Bench(a) => bench(a, cli.seed),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| PactError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        // Invariant failures surface through serde as custom errors.
        if e.is_data() {
            PactError::Validation(format!("{}: {e}", path.display()))
        } else {
            PactError::Metadata(format!("{}: {e}", path.display()))
        }
    })
}

fn read_object(path: &Path) -> Result<(ObjectField, Attributes)> {
    let (payload, attrs) = read_container_with(path)?;
    Ok((payload.into_object()?, attrs))
}

fn read_pressure(path: &Path) -> Result<(PressureSeries, Attributes)> {
    let (payload, attrs) = read_container_with(path)?;
    Ok((payload.into_pressure()?, attrs))
}

fn phantom(a: &PhantomArgs) -> Result<()> {
    let config = match &a.spec {
        Some(path) => read_json::<PhantomConfig>(path)?,
        None => PhantomConfig::Disks(DiskPhantomSpec::default_layout(GridSpec::cube(2, a.n, a.dx)?)),
    };
    let object = config.render()?;
    let mut attrs = Attributes::new();
    attrs.insert(
        "phantom".into(),
        serde_json::to_value(&config).map_err(|e| PactError::Metadata(e.to_string()))?,
    );
    write_container_with(&a.out, &Payload::Object(object), &attrs)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let time = TimeAxis::from_rate(a.rate, a.nt)?;
    let consts = a.medium.resolve(&Attributes::new())?;
    let mut attrs = Attributes::new();
    attrs.insert("c".into(), json!(consts.c()));
    attrs.insert("beta_over_cp".into(), json!(consts.beta_over_cp()));
    let data = if a.analytic_sphere {
        let geom = match &a.geometry {
            Some(p) => read_json::<SensorGeometry>(p)?,
            None => SensorGeometry::fibonacci_sphere(a.sensors, a.radius)?,
        };
        let center = [a.sphere_center[0], a.sphere_center[1], a.sphere_center[2]];
        attrs.insert(
            "source".into(),
            json!({"sphere": {"center": center, "radius": a.sphere_radius, "amplitude": a.sphere_amplitude, "antialias": a.antialias}}),
        );
        if a.antialias {
            analytic_sphere_forward_bandlimited(
                center,
                a.sphere_radius,
                a.sphere_amplitude,
                &geom,
                time,
                &consts,
                time.nyquist(),
            )?
        } else {
            analytic_sphere_forward(center, a.sphere_radius, a.sphere_amplitude, &geom, time, &consts)?
        }
    } else {
        let path = a.object.as_ref().expect("clap enforces --object");
        let (object, _) = read_object(path)?;
        let geom = match &a.geometry {
            Some(p) => read_json::<SensorGeometry>(p)?,
            None if object.grid().dim() == 2 => SensorGeometry::circle(a.sensors, a.radius)?,
            None => SensorGeometry::fibonacci_sphere(a.sensors, a.radius)?,
        };
        attrs.insert("source".into(), json!({"object": path.display().to_string()}));
        spectral_forward(&object, &geom, time, &consts)?
    };
    write_container_with(&a.out, &Payload::Pressure(data), &attrs)
}

fn noise(a: &NoiseArgs, seed: u64) -> Result<()> {
    let (data, mut attrs) = read_pressure(&a.input)?;
    let noisy = add_noise(&data, a.level, seed)?;
    attrs.insert(
        "noise".into(),
        json!({"level": a.level, "relative_to": "global peak |p|", "seed": seed}),
    );
    write_container_with(&a.out, &Payload::Pressure(noisy), &attrs)
}

fn reconstruct_cmd(a: &ReconstructArgs) -> Result<()> {
    let (data, attrs) = read_pressure(&a.input)?;
    let consts = a.medium.resolve(&attrs)?;
    let params = ReconParams {
        grid: a.image.grid(data.geometry().dim())?,
        oversample: a.oversample,
        pad: a.pad,
        interpolation: a.interp,
    };
    let (image, report) = reconstruct(&data, &params, &consts)?;
    if let Some(path) = &a.report {
        let text = serde_json::to_string_pretty(&report).map_err(|e| PactError::Metadata(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| PactError::io(path, e))?;
    }
    let mut out_attrs = Attributes::new();
    out_attrs.insert(
        "reconstruction".into(),
        json!({"oversample": a.oversample, "pad": a.pad, "interpolation": a.interp, "c": consts.c(), "beta_over_cp": consts.beta_over_cp()}),
    );
    write_container_with(&a.out, &Payload::Object(image), &out_attrs)
}

fn baseline(a: &BaselineArgs) -> Result<()> {
    let (data, attrs) = read_pressure(&a.input)?;
    let consts = a.medium.resolve(&attrs)?;
    let image = delay_and_sum(&data, &a.image.grid(data.geometry().dim())?, &consts)?;
    write_container_with(&a.out, &Payload::Object(image), &Attributes::new())
}

fn metrics(a: &MetricsArgs) -> Result<()> {
    let (image, _) = read_object(&a.image)?;
    let mut summary = serde_json::Map::new();
    if a.nrmse {
        let path = a.reference.as_ref().expect("clap enforces --reference");
        let (reference, _) = read_object(path)?;
        let roi = a.roi_radius.map(|r| Roi::centered_box(image.grid(), r));
        summary.insert("nrmse".into(), json!(nrmse(&image, &reference, roi.as_ref())?));
    }
    if let Some(path) = &a.profile {
        let profile = central_profile(&image, a.axis)?;
        profile.write_csv(path)?;
        summary.insert("profile".into(), json!(path.display().to_string()));
        if let Some(rp) = &a.reference {
            let (reference, _) = read_object(rp)?;
            if reference.grid().shape() == image.grid().shape() {
                let peak = reference.max_abs();
                let dev = profile.max_abs_deviation(&central_profile(&reference, a.axis)?);
                summary.insert("profile_max_deviation".into(), json!(dev / peak));
            }
        }
    }
    println!("{}", serde_json::Value::Object(summary));
    Ok(())
}

fn export(a: &ExportArgs) -> Result<()> {
    let (image, _) = read_object(&a.input)?;
    write_pgm(&a.out, &central_slice(&image)?, (a.window[0], a.window[1]))
}

fn bench(a: &BenchArgs, seed: u64) -> Result<()> {
    let cfg = BenchConfig {
        sizes: a.sizes.clone(),
        sensors: a.sensors,
        repeats: a.repeats,
        baseline: !a.no_baseline,
        seed,
        ..BenchConfig::default()
    };
    let rows = run_bench(&cfg, &AcousticConstants::new(1.5, 1000.0)?)?;
    let csv = rows_to_csv(&rows);
    match &a.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| PactError::io(path, e)),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
