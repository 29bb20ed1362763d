//! Task execution and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nlint_core::biphoton::{joint_spectral_intensity, marginal_spectrum, schmidt_analysis, Kernel};
use nlint_core::coherence::{coherence_grid_for_scan, g1_scan};
use nlint_core::oct::{
    auto_scan_half_span, envelope_peaks, fringe_resolved_points, interferogram_bilayer, interferogram_numeric,
    predicted_peak_shift, scan_axis,
};
use nlint_core::optics::{gamma_param, SampleModel};
use nlint_core::{Crystal, Grid, Interferogram, JointSpectrum, Pump};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{io_error, SimError};
use crate::output::{file_sha256, round9, round9_all, write_json, write_matrix, write_series};
use crate::scenario::{Format, Scenario, Setup, Task, DEFAULT_SCAN_POINTS};

/// Relative refinement change above which a task is flagged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Largest joint-spectrum grid whose Schmidt check refines rather than
/// coarsens; a 2n - 1 SVD beyond this is too slow to be routine.
const SCHMIDT_REFINE_LIMIT: usize = 1024;

/// Automatic grid sizing stops doubling here.
pub const AUTO_GRID_LIMIT: usize = 2048;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: Option<String>,
    /// SHA-256 of the canonical scenario text.
    pub digest: String,
    pub settings: Settings,
    pub tasks: Vec<TaskRecord>,
    pub elapsed_s: f64,
    /// Some task exceeded the convergence tolerance.
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub kernel: &'static str,
    pub format: Format,
    pub grid_points: Option<usize>,
    pub gamma: f64,
    pub scan: Option<ScanSettings>,
    pub convergence_tolerance: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanSettings {
    pub start_um: f64,
    pub stop_um: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskRecord {
    pub task: Task,
    pub files: Vec<FileRecord>,
    pub elapsed_s: f64,
    pub convergence: Convergence,
    pub summary: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Change of a task's result between its grid and a reference grid.
#[derive(Debug, Clone, Serialize)]
pub struct Convergence {
    pub metric: &'static str,
    /// Node count of the reference grid (per axis for joint spectra, total
    /// for coherence quadratures); zero for closed forms.
    pub reference_points: usize,
    pub delta: f64,
    pub flagged: bool,
}

impl Convergence {
    fn new(metric: &'static str, reference_points: usize, delta: f64) -> Self {
        Self { metric, reference_points, delta, flagged: delta.is_nan() || delta > CONVERGENCE_TOLERANCE }
    }

    fn closed_form() -> Self {
        Self::new("closed form", 0, 0.0)
    }
}

struct Outcome {
    files: Vec<PathBuf>,
    convergence: Convergence,
    summary: Value,
}

/// Everything the tasks share, computed once.
struct Context<'a> {
    setup: &'a Setup,
    format: Format,
    dir: &'a Path,
    scan: Option<(Vec<f64>, ScanSettings)>,
    spectrum: Option<SpectralData>,
}

struct SpectralData {
    js: JointSpectrum,
    /// Signal and idler marginals on the refined grid.
    refined_marginals: (Vec<f64>, Vec<f64>),
    refined: Grid,
}

/// Resolved `delta_z` scan in mm.
pub fn scan_delta_z(scenario: &Scenario, setup: &Setup) -> Result<(Vec<f64>, ScanSettings), SimError> {
    let s = &scenario.scan;
    let (start, stop) = match (s.start_um, s.stop_um) {
        (Some(a), Some(b)) => (a * 1e-3, b * 1e-3),
        _ => {
            let half = auto_scan_half_span(&setup.crystal, &setup.pump, &setup.sample);
            (-half, half)
        }
    };
    let mut points = s.points.unwrap_or(DEFAULT_SCAN_POINTS);
    if s.fringes {
        points = points.max(fringe_resolved_points(start, stop, setup.crystal.lambda_signal_nm()));
    }
    let axis = scan_axis(start, stop, points).map_err(|e| SimError::in_section("scan", e))?;
    Ok((axis, ScanSettings { start_um: start * 1e3, stop_um: stop * 1e3, points }))
}

/// Signal and idler marginal densities of `kernel` on `grid`, evaluated
/// row by row.
fn marginals(kernel: Kernel, crystal: &Crystal, pump: &Pump, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>), SimError> {
    let unit = crystal.with_sigma(1.0).map_err(|e| SimError::in_section("crystal", e))?;
    let axis = grid.omega_s_axis();
    let rows: Vec<Vec<f64>> = axis
        .par_iter()
        .map(|&ws| axis.iter().map(|&wi| kernel.amplitude(&unit, pump, ws, wi).norm_sqr()).collect())
        .collect();
    Ok(matrix_marginals(&rows.concat(), axis.len(), grid.step()))
}

/// Normalized row and column sums of a row-major `n x n` intensity.
fn matrix_marginals(cells: &[f64], n: usize, step: f64) -> (Vec<f64>, Vec<f64>) {
    let mut signal = vec![0.0; n];
    let mut idler = vec![0.0; n];
    for (r, row) in cells.chunks(n).enumerate() {
        for (c, &v) in row.iter().enumerate() {
            signal[r] += v;
            idler[c] += v;
        }
    }
    let total: f64 = signal.iter().sum::<f64>() * step;
    for v in signal.iter_mut().chain(idler.iter_mut()) {
        *v /= total;
    }
    (signal, idler)
}

/// Largest change at shared nodes between a marginal and the same marginal
/// on the nested refined grid, relative to its peak.
fn nested_delta(coarse: &[f64], refined: &[f64]) -> f64 {
    let peak = coarse.iter().cloned().fold(0.0, f64::max);
    coarse.iter().enumerate().map(|(k, &s)| (s - refined[2 * k]).abs()).fold(0.0, f64::max) / peak
}

/// Joint spectrum on `grid` plus refined marginals. An automatically sized
/// grid is doubled until its marginals pass the convergence gate.
fn spectral_data(scenario: &Scenario, setup: &Setup, grid: &Grid) -> Result<SpectralData, SimError> {
    let (kernel, crystal, pump) = (setup.kernel, &setup.crystal, &setup.pump);
    let mut grid = grid.clone();
    let refined_marginals = loop {
        let refined = marginals(kernel, crystal, pump, &grid.refined())?;
        if scenario.grid.points.is_some() || grid.len() >= AUTO_GRID_LIMIT {
            break refined;
        }
        let (signal, idler) = marginals(kernel, crystal, pump, &grid)?;
        if nested_delta(&signal, &refined.0).max(nested_delta(&idler, &refined.1)) <= CONVERGENCE_TOLERANCE {
            break refined;
        }
        grid = Grid::symmetric(grid.half_width(), 2 * grid.len()).map_err(SimError::from)?;
    };
    let js = joint_spectral_intensity(kernel, crystal, pump, &grid).map_err(|e| SimError::in_section("grid", e))?;
    Ok(SpectralData { refined: grid.refined(), js, refined_marginals })
}

/// Runs every task of `scenario`, writing into `dir`, and writes
/// `manifest.json` last. On error, files written by this run are removed.
pub fn run_scenario(scenario: &Scenario, dir: &Path) -> Result<RunManifest, SimError> {
    let started = Instant::now();
    let setup = scenario.setup()?;
    let dir_existed = dir.exists();
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let result = execute(scenario, &setup, dir, started);
    if result.is_err() && !dir_existed {
        // only reached when the directory is empty again
        let _ = fs::remove_dir(dir);
    }
    result
}

fn execute(scenario: &Scenario, setup: &Setup, dir: &Path, started: Instant) -> Result<RunManifest, SimError> {
    let needs_scan = scenario.tasks.iter().any(|t| matches!(t, Task::G1Scan | Task::OctScan));
    let scan = if needs_scan { Some(scan_delta_z(scenario, setup)?) } else { None };
    let spectrum = match &setup.grid {
        Some(grid) => Some(spectral_data(scenario, setup, grid)?),
        None => None,
    };
    let ctx = Context { setup, format: scenario.output.format, dir, scan, spectrum };

    let results: Vec<(Task, f64, Result<Outcome, SimError>)> = scenario
        .tasks
        .par_iter()
        .map(|&task| {
            let t = Instant::now();
            let mut written = Vec::new();
            let r = run_task(task, &ctx, &mut written).map_err(|e| e.prefixed(task.name()));
            if r.is_err() {
                remove_all(&written);
            }
            (task, t.elapsed().as_secs_f64(), r)
        })
        .collect();

    let mut records = Vec::new();
    let mut failure = None;
    for (task, elapsed, r) in results {
        match r {
            Ok(out) => records.push((task, elapsed, out)),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    if let Some(e) = failure {
        for (_, _, out) in &records {
            remove_all(&out.files);
        }
        return Err(e);
    }

    let mut tasks = Vec::new();
    for (task, elapsed, out) in records {
        let mut files = Vec::new();
        for path in &out.files {
            let (sha256, bytes) = file_sha256(path)?;
            let name = path.strip_prefix(dir).unwrap_or(path).display().to_string();
            files.push(FileRecord { path: name, sha256, bytes });
        }
        tasks.push(TaskRecord { task, files, elapsed_s: elapsed, convergence: out.convergence, summary: out.summary });
    }
    let flagged = tasks.iter().any(|t| t.convergence.flagged);
    let manifest = RunManifest {
        scenario: scenario.name.clone(),
        digest: scenario.digest(),
        settings: Settings {
            kernel: setup.kernel.name(),
            format: scenario.output.format,
            grid_points: ctx.spectrum.as_ref().map(|d| d.js.dim()),
            gamma: gamma_param(&setup.crystal, &setup.pump),
            scan: ctx.scan.as_ref().map(|s| s.1),
            convergence_tolerance: CONVERGENCE_TOLERANCE,
        },
        tasks,
        elapsed_s: started.elapsed().as_secs_f64(),
        flagged,
    };
    let value = serde_json::to_value(&manifest).expect("manifest serializes");
    if let Err(e) = write_json(dir, "manifest.json", &value) {
        for t in &manifest.tasks {
            remove_all(&t.files.iter().map(|f| dir.join(&f.path)).collect::<Vec<_>>());
        }
        return Err(e);
    }
    Ok(manifest)
}

fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

fn run_task(task: Task, ctx: &Context, written: &mut Vec<PathBuf>) -> Result<Outcome, SimError> {
    match task {
        Task::JointSpectrum => joint_spectrum_task(ctx, written),
        Task::Schmidt => schmidt_task(ctx, written),
        Task::Spectrum => spectrum_task(ctx, written),
        Task::G1Scan => g1_task(ctx, written),
        Task::OctScan => oct_task(ctx, written),
    }
}

fn spectral<'c>(ctx: &'c Context) -> &'c SpectralData {
    ctx.spectrum.as_ref().expect("spectral data is computed for spectral tasks")
}

fn joint_spectrum_task(ctx: &Context, written: &mut Vec<PathBuf>) -> Result<Outcome, SimError> {
    let data = spectral(ctx);
    let js = &data.js;
    let grid = js.grid();
    // a pump ridge narrower than the step has no convergent pointwise
    // density; its marginals do converge
    let (signal, idler) = matrix_marginals(&js.intensity(), grid.len(), grid.step());
    let delta = nested_delta(&signal, &data.refined_marginals.0).max(nested_delta(&idler, &data.refined_marginals.1));
    let path = write_matrix(
        ctx.dir,
        "joint_spectrum",
        ("omega_s", grid.omega_s_axis()),
        ("omega_i", grid.omega_i_axis()),
        &js.intensity(),
        ctx.format,
    )?;
    written.push(path);
    let (_, _, rho) = js.correlation();
    Ok(Outcome {
        files: written.clone(),
        convergence: Convergence::new("max change of signal and idler marginals / peak", data.refined.len(), delta),
        summary: json!({
            "points": grid.len(),
            "half_width_rad_per_fs": round9(grid.half_width()),
            "total_probability": round9(js.total_probability()),
            "correlation": round9(rho),
        }),
    })
}

fn spectrum_task(ctx: &Context, written: &mut Vec<PathBuf>) -> Result<Outcome, SimError> {
    let data = spectral(ctx);
    let crystal = &ctx.setup.crystal;
    let m = marginal_spectrum(&data.js, crystal.lambda_signal_nm()).map_err(SimError::from)?;
    let delta = nested_delta(&m.density, &data.refined_marginals.0);
    let path = write_series(
        ctx.dir,
        "spectrum",
        &[("omega_rad_per_fs", &m.omega), ("wavelength_nm", &m.wavelengths_nm()), ("density", &m.density)],
        ctx.format,
    )?;
    written.push(path);
    Ok(Outcome {
        files: written.clone(),
        convergence: Convergence::new("max change of signal marginal / peak", data.refined.len(), delta),
        summary: json!({
            "carrier_nm": round9(m.carrier_nm),
            "fwhm_nm": round9(m.fwhm_nm),
            "fwhm_rad_per_fs": round9(m.fwhm_omega),
        }),
    })
}

fn schmidt_task(ctx: &Context, written: &mut Vec<PathBuf>) -> Result<Outcome, SimError> {
    let data = spectral(ctx);
    let setup = ctx.setup;
    let report = schmidt_analysis(&data.js).map_err(SimError::from)?;
    let n = data.js.dim();
    let reference = if n <= SCHMIDT_REFINE_LIMIT {
        data.refined.clone()
    } else {
        Grid::symmetric(data.js.grid().half_width(), n / 2).map_err(SimError::from)?
    };
    let js_ref =
        joint_spectral_intensity(setup.kernel, &setup.crystal, &setup.pump, &reference).map_err(SimError::from)?;
    let k_ref = schmidt_analysis(&js_ref).map_err(SimError::from)?.schmidt_number;
    let delta = (report.schmidt_number - k_ref).abs() / k_ref;
    let kept = report.rank(1e-12).max(1);
    let gamma = gamma_param(&setup.crystal, &setup.pump);
    let value = json!({
        "schmidt_number": round9(report.schmidt_number),
        "entropy_bits": round9(report.entropy_bits),
        "gamma": round9(gamma),
        "two_gaussian_schmidt_number": round9((gamma + 1.0 / gamma) / 2.0),
        "grid_points": n,
        "coefficients": round9_all(&report.coefficients[..kept]),
    });
    written.push(write_json(ctx.dir, "schmidt.json", &value)?);
    Ok(Outcome {
        files: written.clone(),
        convergence: Convergence::new("relative change of K", reference.len(), delta),
        summary: json!({
            "schmidt_number": round9(report.schmidt_number),
            "entropy_bits": round9(report.entropy_bits),
        }),
    })
}

fn scan<'c>(ctx: &'c Context) -> &'c [f64] {
    &ctx.scan.as_ref().expect("scan is resolved for scan tasks").0
}

fn g1_task(ctx: &Context, written: &mut Vec<PathBuf>) -> Result<Outcome, SimError> {
    let s = ctx.setup;
    let dz = scan(ctx);
    let err = SimError::from;
    let grid = coherence_grid_for_scan(&s.crystal, &s.pump, &s.geometry, &s.sample, dz).map_err(err)?;
    let g = g1_scan(&s.crystal, &s.pump, &s.geometry, &s.sample, &grid, dz).map_err(err)?;
    let fine = grid.refined();
    let g_ref = g1_scan(&s.crystal, &s.pump, &s.geometry, &s.sample, &fine, dz).map_err(err)?;
    let delta = g.iter().zip(&g_ref).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let abs: Vec<f64> = g.iter().map(|v| v.norm()).collect();
    let phase: Vec<f64> = g.iter().map(|v| v.arg()).collect();
    let path =
        write_series(ctx.dir, "g1_scan", &[("delta_z_mm", dz), ("g1_abs", &abs), ("g1_phase", &phase)], ctx.format)?;
    written.push(path);
    let peak = abs.iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        files: written.clone(),
        convergence: Convergence::new("max |g1 - g1_refined|", fine.nodes(), delta),
        summary: json!({
            "max_g1_abs": round9(peak),
            "quadrature_nodes": grid.nodes(),
        }),
    })
}

fn oct_task(ctx: &Context, written: &mut Vec<PathBuf>) -> Result<Outcome, SimError> {
    let s = ctx.setup;
    let dz = scan(ctx);
    let err = SimError::from;
    let (ifg, convergence): (Interferogram, Convergence) = match &s.sample {
        SampleModel::Bilayer(b) => {
            (interferogram_bilayer(&s.crystal, &s.pump, &s.geometry, b, dz).map_err(err)?, Convergence::closed_form())
        }
        sample => {
            let grid = coherence_grid_for_scan(&s.crystal, &s.pump, &s.geometry, sample, dz).map_err(err)?;
            let ifg = interferogram_numeric(&s.crystal, &s.pump, &s.geometry, sample, &grid, dz).map_err(err)?;
            let fine = grid.refined();
            let reference = interferogram_numeric(&s.crystal, &s.pump, &s.geometry, sample, &fine, dz).map_err(err)?;
            let delta = ifg.flux_norm.iter().zip(&reference.flux_norm).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (ifg, Convergence::new("max |flux_norm - flux_norm_refined|", fine.nodes(), delta))
        }
    };
    let peaks = envelope_peaks(&ifg).map_err(err)?;
    let axial = match peaks.fwhm_um.as_slice() {
        [w] => Some(round9(*w)),
        _ => None,
    };
    let path = write_series(
        ctx.dir,
        "interferogram",
        &[("delta_z_mm", &ifg.delta_z_mm), ("flux_norm", &ifg.flux_norm), ("envelope", &ifg.envelope)],
        ctx.format,
    )?;
    written.push(path);
    let report = json!({
        "positions_mm": round9_all(&peaks.peak_positions_mm),
        "separations_um": round9_all(&peaks.separations_um),
        "fwhm_um": round9_all(&peaks.fwhm_um),
        "resolved": peaks.resolved,
        "predicted_peak_shift": round9(predicted_peak_shift(&s.crystal)),
        "axial_resolution_um": axial,
        "photons_per_pulse": round9(ifg.n_s1),
    });
    written.push(write_json(ctx.dir, "peaks.json", &report)?);
    Ok(Outcome {
        files: written.clone(),
        convergence,
        summary: json!({
            "peaks": peaks.peak_positions_mm.len(),
            "separations_um": round9_all(&peaks.separations_um),
            "resolved": peaks.resolved,
        }),
    })
}
