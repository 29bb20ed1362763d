//! Interferograms of layered samples and envelope analysis.

use num_complex::Complex;
use rayon::prelude::*;

use crate::coherence::{
    carrier_phase, g1_analytic, timing_from_geometry, CoherenceGrid, CoherenceKernel, InterferometerGeometry,
};
use crate::curve::fwhm;
use crate::error::{Error, Result};
use crate::optics::{Bilayer, CrystalParams, PumpPulse, SampleModel};
use crate::scalar::{lit, speed_of_light, to_f64, Real};

/// Peaks below this fraction of the global envelope maximum are ignored.
pub const PEAK_THRESHOLD: f64 = 0.1;
/// An envelope still above this fraction of its maximum at a scan end is clipped.
pub const EDGE_THRESHOLD: f64 = 0.05;
/// Valley depth, relative to the lower peak, needed to call two peaks resolved.
pub const RESOLVED_DEPTH: f64 = 0.5;
/// Local maxima with less prominence than this (relative to the global
/// maximum) are treated as ripple on a neighbouring peak.
const MIN_PROMINENCE: f64 = 0.02;

/// Detected signal flux versus path delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram<T> {
    pub delta_z_mm: Vec<T>,
    /// Flux divided by the single-crystal flux `N_s1`.
    pub flux_norm: Vec<T>,
    pub envelope: Vec<T>,
    /// Signal photons per pulse from one crystal.
    pub n_s1: T,
}

impl<T: Real> Interferogram<T> {
    pub fn len(&self) -> usize {
        self.delta_z_mm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_z_mm.is_empty()
    }

    pub fn flux(&self) -> Vec<T> {
        self.flux_norm.iter().map(|&f| f * self.n_s1).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport<T> {
    pub peak_positions_mm: Vec<T>,
    pub separations_um: Vec<T>,
    pub fwhm_um: Vec<T>,
    pub resolved: bool,
}

/// Closed-form interferogram of a two-interface sample: one sine fringe per
/// interface, each weighted by the coherence at that interface's delays.
pub fn interferogram_bilayer<T: Real>(
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    geometry: &InterferometerGeometry<T>,
    sample: &Bilayer<T>,
    delta_z: &[T],
) -> Result<Interferogram<T>> {
    let n_s1 = crate::coherence::photon_number(crystal)?;
    let tau = sample.delay();
    let back_phase = sample.carrier * tau;
    let (flux_norm, envelope) = delta_z
        .par_iter()
        .map(|&dz| {
            let g = geometry.with_delta_z(crystal, dz);
            let t = timing_from_geometry(&g, crystal);
            let phi = carrier_phase(&g, crystal);
            let g0 = g1_analytic(&t, crystal, pump);
            let g1 = g1_analytic(&t.delayed(tau), crystal, pump);
            let flux = T::one() + sample.r0 * g0 * phi.sin() + sample.r1 * g1 * (phi - back_phase).sin();
            (flux, sample.r0.abs() * g0 + sample.r1.abs() * g1)
        })
        .unzip();
    Ok(Interferogram { delta_z_mm: delta_z.to_vec(), flux_norm, envelope, n_s1 })
}

/// Interferogram from the quadrature route, for any sample:
/// `N / N_s1 = 1 + Im g1`, envelope `|g1|`.
pub fn interferogram_numeric<T: Real>(
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    geometry: &InterferometerGeometry<T>,
    sample: &SampleModel<T>,
    grid: &CoherenceGrid<T>,
    delta_z: &[T],
) -> Result<Interferogram<T>> {
    let n_s1 = crate::coherence::photon_number(crystal)?;
    let kernel = CoherenceKernel::new(crystal, pump, sample, grid)?;
    let points: Result<Vec<(T, T)>> = delta_z
        .par_iter()
        .map(|&dz| {
            let g = geometry.with_delta_z(crystal, dz);
            let t = timing_from_geometry(&g, crystal);
            let bare = kernel.evaluate(&t);
            if !(bare.norm() <= T::one() + lit::<T>(1e-6)) {
                return Err(Error::Numerical(format!(
                    "|g1| = {:.9} exceeds 1 at delta_z = {:.6e} mm",
                    to_f64(bare.norm()),
                    to_f64(dz)
                )));
            }
            let full = bare * Complex::from_polar(T::one(), carrier_phase(&g, crystal));
            Ok((T::one() + full.im, bare.norm()))
        })
        .collect();
    let (flux_norm, envelope) = points?.into_iter().unzip();
    Ok(Interferogram { delta_z_mm: delta_z.to_vec(), flux_norm, envelope, n_s1 })
}

/// Local maxima of the envelope, their widths, and whether the first two
/// adjacent peaks are separated by a deep enough valley.
pub fn envelope_peaks<T: Real>(ifg: &Interferogram<T>) -> Result<PeakReport<T>> {
    let (xs, ys) = (&ifg.delta_z_mm, &ifg.envelope);
    let n = ys.len();
    if n < 3 || xs.len() != n {
        return Err(Error::Analysis("interferogram needs at least three samples".into()));
    }
    let top = ys.iter().copied().fold(T::zero(), T::max);
    if !(top > T::zero()) {
        return Err(Error::Analysis("envelope is identically zero".into()));
    }
    let edge = top * lit::<T>(EDGE_THRESHOLD);
    if ys[0] > edge || ys[n - 1] > edge {
        return Err(Error::Analysis(format!(
            "envelope clipped: {:.3} and {:.3} of its maximum at the scan ends [{:.6e}, {:.6e}] mm",
            to_f64(ys[0] / top),
            to_f64(ys[n - 1] / top),
            to_f64(xs[0]),
            to_f64(xs[n - 1])
        )));
    }

    let floor = top * lit::<T>(PEAK_THRESHOLD);
    let mut candidates: Vec<usize> =
        (1..n - 1).filter(|&i| ys[i] > floor && ys[i] >= ys[i - 1] && ys[i] > ys[i + 1]).collect();
    // drop ripple: merge neighbours whose separating valley is shallow
    let min_prom = top * lit::<T>(MIN_PROMINENCE);
    let mut k = 0;
    while k + 1 < candidates.len() {
        let (a, b) = (candidates[k], candidates[k + 1]);
        let valley = valley_min(ys, a, b);
        if ys[a].min(ys[b]) - valley < min_prom {
            candidates.remove(if ys[a] < ys[b] { k } else { k + 1 });
        } else {
            k += 1;
        }
    }
    if candidates.is_empty() {
        return Err(Error::Analysis("no envelope peak found".into()));
    }

    let peak_positions_mm: Vec<T> = candidates.iter().map(|&i| refine_peak(xs, ys, i)).collect();
    let to_um = lit::<T>(1e3);
    let separations_um = peak_positions_mm.windows(2).map(|w| (w[1] - w[0]) * to_um).collect();
    let fwhm_um = candidates.iter().map(|&i| fwhm(xs, ys, i).map(|w| w * to_um)).collect::<Result<Vec<_>>>()?;
    let resolved = candidates.windows(2).any(|w| {
        let lower = ys[w[0]].min(ys[w[1]]);
        (lower - valley_min(ys, w[0], w[1])) >= lower * lit::<T>(RESOLVED_DEPTH)
    });
    Ok(PeakReport { peak_positions_mm, separations_um, fwhm_um, resolved })
}

fn valley_min<T: Real>(ys: &[T], a: usize, b: usize) -> T {
    ys[a..=b].iter().copied().fold(T::infinity(), T::min)
}

/// Vertex of the parabola through the three samples around `i`.
fn refine_peak<T: Real>(xs: &[T], ys: &[T], i: usize) -> T {
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let denom = y0 - lit::<T>(2.0) * y1 + y2;
    if denom >= T::zero() {
        return xs[i];
    }
    let h = (xs[i + 1] - xs[i - 1]) / lit::<T>(2.0);
    let shift = (lit::<T>(0.5) * (y0 - y2) / denom).max(-T::one()).min(T::one());
    xs[i] + shift * h
}

/// Ratio between the envelope-peak delay of a back reflection and its
/// optical delay, `(D + 2 D+) / (D - 2 D+)`, when the pump sets the width.
pub fn predicted_peak_shift<T: Real>(crystal: &CrystalParams<T>) -> T {
    let (d, dp) = (crystal.gv_mismatch(), crystal.walk_off());
    let two = lit::<T>(2.0);
    (d + two * dp) / (d - two * dp)
}

/// Envelope FWHM (µm) of a single-peaked interferogram.
pub fn axial_resolution<T: Real>(ifg: &Interferogram<T>) -> Result<T> {
    let report = envelope_peaks(ifg)?;
    match report.fwhm_um.as_slice() {
        [w] => Ok(*w),
        ws => Err(Error::Analysis(format!("axial resolution needs a single envelope peak, found {}", ws.len()))),
    }
}

/// Uniform scan `start..=stop` with `points` samples.
pub fn scan_axis<T: Real>(start: T, stop: T, points: usize) -> Result<Vec<T>> {
    if points < 2 || !(stop > start) {
        return Err(Error::domain("scan", "need stop > start and at least two points"));
    }
    let step = (stop - start) / lit::<T>((points - 1) as f64);
    Ok((0..points).map(|k| start + step * lit::<T>(k as f64)).collect())
}

/// Number of samples giving at least eight per carrier fringe of period
/// `lambda_nm` across `[start, stop]` (mm).
pub fn fringe_resolved_points<T: Real>(start: T, stop: T, lambda_nm: T) -> usize {
    let step_mm = lambda_nm * lit::<T>(1e-6) / lit::<T>(8.0);
    to_f64((stop - start) / step_mm).ceil() as usize + 1
}

/// Half-span (mm) of a scan centred on zero delay that contains the whole
/// envelope of every reflection of `sample`.
pub fn auto_scan_half_span<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>, sample: &SampleModel<T>) -> T {
    let skew = (T::one() - lit::<T>(2.0) * crystal.walk_off() / crystal.gv_mismatch()).abs();
    // Gaussian factor of the envelope is below 1e-4 past 12 T0 / |skew|
    let mut support = crystal.walk_off_time();
    if skew > T::zero() {
        support = support.min(lit::<T>(12.0) * pump.duration() / skew);
    }
    let tau = sample.max_delay();
    let shift = if skew > T::zero() { T::one() + lit::<T>(2.0) / skew } else { T::one() };
    (lit::<T>(1.25) * support + tau * shift) * speed_of_light::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::synchronize_pump_path;

    fn setup(l: f64, t0: f64) -> (CrystalParams<f64>, PumpPulse<f64>, InterferometerGeometry<f64>) {
        let c = CrystalParams::mgo_lithium_niobate(l).unwrap();
        let p = PumpPulse::new(t0).unwrap();
        let g = InterferometerGeometry::new(100.0, 50.0, 0.0, 80.0, 0.0).unwrap();
        let g = synchronize_pump_path(&g, &c);
        (c, p, g)
    }

    fn slab(c: &CrystalParams<f64>) -> Bilayer<f64> {
        Bilayer::from_fresnel(1.0, 1.5, 1.3, 20.0, c.omega_idler()).unwrap()
    }

    fn envelope_scan(
        c: &CrystalParams<f64>,
        p: &PumpPulse<f64>,
        g: &InterferometerGeometry<f64>,
        b: &Bilayer<f64>,
    ) -> Interferogram<f64> {
        let half = auto_scan_half_span(c, p, &SampleModel::Bilayer(*b));
        let dz = scan_axis(-half, half, 4001).unwrap();
        interferogram_bilayer(c, p, g, b, &dz).unwrap()
    }

    #[test]
    fn peak_shift_factor() {
        let c = CrystalParams::<f64>::mgo_lithium_niobate(10.0).unwrap();
        assert!((predicted_peak_shift(&c) + 0.711).abs() < 0.005);
        assert_eq!(predicted_peak_shift(&c.without_walk_off()), 1.0);
    }

    #[test]
    fn quasi_cw_thin_crystal_resolves_60_um() {
        let (c, p, g) = setup(0.5, 100_000.0);
        let r = envelope_peaks(&envelope_scan(&c, &p, &g, &slab(&c))).unwrap();
        assert_eq!(r.peak_positions_mm.len(), 2);
        assert!((r.separations_um[0] - 60.0).abs() < 1.0, "{:?}", r.separations_um);
        assert!(r.resolved);
    }

    #[test]
    fn quasi_cw_long_crystal_merges() {
        let (c, p, g) = setup(10.0, 100_000.0);
        let r = envelope_peaks(&envelope_scan(&c, &p, &g, &slab(&c))).unwrap();
        assert!(!r.resolved);
        assert_eq!(r.peak_positions_mm.len(), 1);
    }

    #[test]
    fn short_pulse_long_crystal_shows_shifted_peaks() {
        let (c, p, g) = setup(10.0, 100.0);
        let b = slab(&c);
        let r = envelope_peaks(&envelope_scan(&c, &p, &g, &b)).unwrap();
        assert_eq!(r.peak_positions_mm.len(), 2);
        let expected = predicted_peak_shift(&c).abs() * b.optical_thickness_um();
        assert!((r.separations_um[0] - expected).abs() < 0.05 * expected);
    }

    #[test]
    fn flux_stays_inside_envelope_bound() {
        let (c, p, g) = setup(0.5, 100_000.0);
        let b = slab(&c);
        let dz = scan_axis(-0.1, 0.05, 3001).unwrap();
        let ifg = interferogram_bilayer(&c, &p, &g, &b, &dz).unwrap();
        let bound = b.r0.abs() + b.r1.abs();
        for (f, e) in ifg.flux_norm.iter().zip(&ifg.envelope) {
            assert!((f - 1.0).abs() <= bound + 1e-12);
            assert!((f - 1.0).abs() <= e + 1e-12);
        }
    }

    #[test]
    fn mirror_axial_resolution_is_walk_off_length() {
        let (c, p, g) = setup(0.5, 100_000.0);
        let mirror = Bilayer::new(1.0, 0.0, 0.0, 1.0, c.omega_idler()).unwrap();
        let ifg = envelope_scan(&c, &p, &g, &mirror);
        let r = envelope_peaks(&ifg).unwrap();
        assert!(r.peak_positions_mm[0].abs() < 1e-4);
        let w = axial_resolution(&ifg).unwrap();
        let expected = c.walk_off_time() * crate::scalar::SPEED_OF_LIGHT_MM_PER_FS * 1e3;
        assert!((w - expected).abs() < 0.05 * expected, "{w} vs {expected}");
    }

    #[test]
    fn clipped_scan_is_rejected() {
        let (c, p, g) = setup(0.5, 100_000.0);
        let dz = scan_axis(-0.01, 0.01, 201).unwrap();
        let ifg = interferogram_bilayer(&c, &p, &g, &slab(&c), &dz).unwrap();
        assert!(matches!(envelope_peaks(&ifg), Err(Error::Analysis(_))));
    }

    #[test]
    fn numeric_reproduces_closed_form() {
        let (c, p, g) = setup(0.5, 100_000.0);
        let b = slab(&c);
        let sample = SampleModel::Bilayer(b);
        let dz = scan_axis(-0.09, 0.03, 61).unwrap();
        let grid = crate::coherence::coherence_grid_for_scan(&c, &p, &g, &sample, &dz).unwrap();
        let a = interferogram_bilayer(&c, &p, &g, &b, &dz).unwrap();
        let n = interferogram_numeric(&c, &p, &g, &sample, &grid, &dz).unwrap();
        for (x, y) in a.flux_norm.iter().zip(&n.flux_norm) {
            assert!((x - y).abs() < 1e-3, "{x} vs {y}");
        }
    }

    #[test]
    fn fringe_sampling() {
        assert_eq!(fringe_resolved_points(0.0, 810e-6, 810.0), 9);
        assert!(scan_axis(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn ripple_is_not_a_peak() {
        let xs: Vec<f64> = (0..401).map(|i| -2.0 + i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x * 4.0).exp() * (1.0 + 0.002 * (40.0 * x).sin())).collect();
        let ifg = Interferogram { delta_z_mm: xs, flux_norm: vec![1.0; 401], envelope: ys, n_s1: 1.0 };
        let r = envelope_peaks(&ifg).unwrap();
        assert_eq!(r.peak_positions_mm.len(), 1);
        assert!(!r.resolved);
    }
}
