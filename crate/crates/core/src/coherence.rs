//! First-order coherence between the two signal beams.
//!
//! Two independent routes are provided: the closed form [`g1_analytic`],
//! valid for a lossless idler arm, and [`g1_numeric`], a direct quadrature of
//! the overlap integral that accepts any sample reflectivity.
//!
//! The quadrature runs in sheared coordinates `(Wp, x)` with `Wp = Ws + Wi`
//! and `x = Dk L / 2`. In those coordinates the integrand magnitude
//! factorizes into `|F(Wp)|^2 sinc^2(x)`, so each axis can be sampled at its
//! own scale whatever the pump duration. The Jacobian is
//! `dWs dWi = 2 / (|D| L) dWp dx`, which combined with
//! `N_s = 2 pi sigma^2 L / |D|` leaves an overall factor `1/pi`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optics::{CrystalParams, PumpPulse, SampleModel};
use crate::scalar::{lit, sinc, speed_of_light, to_f64, trapezoid_weight, Real};

/// Free-space path lengths (mm): signal 1 to the beam splitter `z1`, idler
/// to the sample `z2`, signal 2 to the beam splitter `z3`, pump to each
/// crystal `zp1`, `zp2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerGeometry<T> {
    pub z1: T,
    pub z2: T,
    pub z3: T,
    pub zp1: T,
    pub zp2: T,
}

impl<T: Real> InterferometerGeometry<T> {
    pub fn new(z1: T, z2: T, z3: T, zp1: T, zp2: T) -> Result<Self> {
        for (v, field) in [(z1, "z1"), (z2, "z2"), (z3, "z3"), (zp1, "zp1"), (zp2, "zp2")] {
            if !v.is_finite() {
                return Err(Error::domain(field, "path length must be finite"));
            }
        }
        Ok(Self { z1, z2, z3, zp1, zp2 })
    }

    /// `z3 - z1 + z2 + c N_i L`, mm.
    pub fn delta_z(&self, crystal: &CrystalParams<T>) -> T {
        self.z3 - self.z1 + self.z2 + speed_of_light::<T>() * crystal.idler_group_delay() * crystal.length()
    }

    /// Same geometry with `z3` moved so that the path delay equals `delta_z`.
    pub fn with_delta_z(&self, crystal: &CrystalParams<T>, delta_z: T) -> Self {
        let offset = speed_of_light::<T>() * crystal.idler_group_delay() * crystal.length();
        Self { z3: delta_z + self.z1 - self.z2 - offset, ..*self }
    }

    pub fn is_synchronized(&self, crystal: &CrystalParams<T>) -> bool {
        timing_from_geometry(self, crystal).t2.abs() <= lit::<T>(1e-6)
    }
}

/// Delays entering the coherence function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing<T> {
    /// Signal-idler delay, fs.
    pub t1: T,
    /// Pump-idler delay at the second crystal, fs.
    pub t2: T,
    /// `c T1`, mm.
    pub delta_z: T,
}

impl<T: Real> Timing<T> {
    pub fn new(t1: T, t2: T) -> Self {
        Self { t1, t2, delta_z: t1 * speed_of_light::<T>() }
    }

    /// Delays seen by a reflection delayed by `tau`.
    pub fn delayed(&self, tau: T) -> Self {
        Self::new(self.t1 + tau, self.t2 - tau)
    }
}

pub fn timing_from_geometry<T: Real>(geometry: &InterferometerGeometry<T>, crystal: &CrystalParams<T>) -> Timing<T> {
    let c = speed_of_light::<T>();
    let nl = crystal.idler_group_delay() * crystal.length();
    let t1 = (geometry.z3 - geometry.z1 + geometry.z2) / c + nl;
    let t2 = (geometry.zp2 - geometry.zp1 - geometry.z2) / c - nl;
    Timing { t1, t2, delta_z: geometry.delta_z(crystal) }
}

/// Sets `zp2 = zp1 + c N_i L + z2`, which makes `T2 = 0`.
pub fn synchronize_pump_path<T: Real>(
    geometry: &InterferometerGeometry<T>,
    crystal: &CrystalParams<T>,
) -> InterferometerGeometry<T> {
    InterferometerGeometry {
        zp2: geometry.zp1 + speed_of_light::<T>() * crystal.idler_group_delay() * crystal.length() + geometry.z2,
        ..*geometry
    }
}

/// Triangle function `max(0, 1 - |x|)`.
pub fn tri<T: Real>(x: T) -> T {
    (T::one() - x.abs()).max(T::zero())
}

/// Closed-form `|g1|` for a lossless idler arm: a triangle of width `|D| L`
/// times a Gaussian of width set by `T0`.
pub fn g1_analytic<T: Real>(timing: &Timing<T>, crystal: &CrystalParams<T>, pump: &PumpPulse<T>) -> T {
    let d = crystal.gv_mismatch();
    let skew = T::one() - lit::<T>(2.0) * crystal.walk_off() / d;
    let arg = skew * timing.t1 + lit::<T>(2.0) * timing.t2;
    let t0 = pump.duration();
    tri(timing.t1 / crystal.walk_off_time()) * (-(arg * arg) / (lit::<T>(16.0) * t0 * t0)).exp()
}

/// FWHM (fs, in `T1` at `T2 = 0`) of the triangular and Gaussian factors of
/// [`g1_analytic`].
pub fn envelope_widths<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>) -> (T, T) {
    let skew = (T::one() - lit::<T>(2.0) * crystal.walk_off() / crystal.gv_mismatch()).abs();
    let gauss = lit::<T>(8.0) * lit::<T>(2f64.ln()).sqrt() * pump.duration() / skew;
    (crystal.walk_off_time(), gauss)
}

/// Optical carrier phase of the cross term for a given geometry.
pub fn carrier_phase<T: Real>(geometry: &InterferometerGeometry<T>, crystal: &CrystalParams<T>) -> T {
    let (wp, ws, wi) = (crystal.omega_pump(), crystal.omega_signal(), crystal.omega_idler());
    let idler_crystal_path = crystal.idler_phase_index() * crystal.length();
    (wp * (geometry.zp2 - geometry.zp1) - wi * (geometry.z2 + idler_crystal_path) + ws * (geometry.z3 - geometry.z1))
        / speed_of_light::<T>()
}

/// Signal photons per pulse, `2 pi sigma^2 L / |D|`. Independent of the pulse shape.
pub fn photon_number<T: Real>(crystal: &CrystalParams<T>) -> Result<T> {
    let d = crystal.gv_mismatch();
    if d == T::zero() {
        return Err(Error::domain("gv_mismatch", "photon number diverges for D = 0"));
    }
    let s = crystal.sigma();
    Ok(lit::<T>(2.0) * T::PI() * s * s * crystal.length() / d.abs())
}

/// Signal photons per pulse by direct quadrature of `|V|^2` over the
/// detuning plane, in `u = Ws + Wi`, `v = Ws - Wi`.
pub fn photon_number_quadrature<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>) -> Result<T> {
    let d = crystal.gv_mismatch();
    if d == T::zero() {
        return Err(Error::domain("gv_mismatch", "photon number diverges for D = 0"));
    }
    let (dp, l) = (crystal.walk_off(), crystal.length());
    let two = lit::<T>(2.0);
    let (u_axis, hu) = crate::scalar::symmetric_axis(lit::<T>(6.0) / pump.duration(), 161);
    // sinc^2 sampled every 0.05 in its argument out to |x| = 3000
    let hx = lit::<T>(0.05);
    let hv = hx * lit::<T>(4.0) / (d.abs() * l);
    let nv = 60_000i64;
    let rows: Vec<T> = u_axis
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            // centre the v sum on the phase-matching ridge for this u
            let v0 = -two * dp * u / d;
            let mut inner = T::zero();
            for k in -nv..=nv {
                let v = v0 + hv * lit::<T>(k as f64);
                let s = sinc((dp * u + d * v / two) * l / two);
                inner += s * s;
            }
            trapezoid_weight(i, u_axis.len(), hu) * pump.intensity(u) * inner * hv
        })
        .collect();
    let total = rows.into_iter().fold(T::zero(), |a, b| a + b);
    let s = crystal.sigma();
    // dWs dWi = du dv / 2
    Ok(s * s * l * l * total / two)
}

/// Half-width of the mismatch axis (in `x = Dk L / 2`). The neglected
/// `sinc^2` tail costs about `1 / (pi X)` of the peak value.
pub const MISMATCH_HALF_WIDTH: f64 = 1000.0;

/// Quadrature nodes for [`g1_numeric`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceGrid<T> {
    pump_axis: Vec<T>,
    pump_step: T,
    mismatch_axis: Vec<T>,
    mismatch_step: T,
}

impl<T: Real> CoherenceGrid<T> {
    pub fn with_resolution(
        pump_half_width: T,
        pump_points: usize,
        mismatch_half_width: T,
        mismatch_points: usize,
    ) -> Result<Self> {
        if pump_points < 3 || mismatch_points < 3 {
            return Err(Error::Resolution("coherence grid needs at least three nodes per axis".into()));
        }
        if !(pump_half_width > T::zero() && mismatch_half_width > T::zero()) {
            return Err(Error::Resolution("coherence grid spans must be positive".into()));
        }
        let (pump_axis, pump_step) = crate::scalar::symmetric_axis(pump_half_width, pump_points);
        let (mismatch_axis, mismatch_step) = crate::scalar::symmetric_axis(mismatch_half_width, mismatch_points);
        Ok(Self { pump_axis, pump_step, mismatch_axis, mismatch_step })
    }

    /// Grid fine enough to evaluate delays with `|T1|, |T2| <= max_delay`
    /// for a sample imprinting delays up to `sample_delay` (fs).
    pub fn for_delays(crystal: &CrystalParams<T>, pump: &PumpPulse<T>, max_delay: T, sample_delay: T) -> Result<Self> {
        let t0 = pump.duration();
        let share = crystal.signal_share().abs();
        let two_pi = lit::<T>(2.0) * T::PI();
        let pump_half = lit::<T>(6.0) / t0;
        // trapezoid aliasing on the Gaussian pump axis stays below exp(-36)
        let pump_rate = (max_delay.abs() + sample_delay.abs()) * (T::one() + share) + lit::<T>(12.0) * t0;
        let pump_step = (two_pi / pump_rate).min(pump_half / lit::<T>(32.0));
        let pump_points = 2 * (to_f64(pump_half / pump_step).ceil() as usize) + 1;
        // sinc^2 is band-limited to [-2, 2]; keep the shifted band clear of its aliases
        let mismatch_rate = lit::<T>(2.0) * (max_delay.abs() + sample_delay.abs()) / crystal.walk_off_time();
        let mismatch_step = (two_pi / (lit::<T>(4.0) + mismatch_rate)).min(lit::<T>(0.25));
        let half = lit::<T>(MISMATCH_HALF_WIDTH);
        let mismatch_points = 2 * (to_f64(half / mismatch_step).ceil() as usize) + 1;
        Self::with_resolution(pump_half, pump_points, half, mismatch_points)
    }

    /// Same spans, both steps halved.
    pub fn refined(&self) -> Self {
        Self::with_resolution(
            -self.pump_axis[0],
            2 * self.pump_axis.len() - 1,
            -self.mismatch_axis[0],
            2 * self.mismatch_axis.len() - 1,
        )
        .expect("refining a valid grid")
    }

    pub fn pump_axis(&self) -> &[T] {
        &self.pump_axis
    }
    pub fn mismatch_axis(&self) -> &[T] {
        &self.mismatch_axis
    }
    pub fn pump_step(&self) -> T {
        self.pump_step
    }
    pub fn mismatch_step(&self) -> T {
        self.mismatch_step
    }
    pub fn nodes(&self) -> usize {
        self.pump_axis.len() * self.mismatch_axis.len()
    }
}

/// Timing-independent part of the overlap integral,
/// `w |F(Wp)|^2 sinc^2(x) r*(Wi)`, precomputed for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CoherenceKernel<T> {
    pump_axis: Vec<T>,
    mismatch_axis: Vec<T>,
    weights: Vec<Complex<T>>,
    signal_share: T,
    kappa: T,
}

impl<T: Real> CoherenceKernel<T> {
    pub fn new(
        crystal: &CrystalParams<T>,
        pump: &PumpPulse<T>,
        sample: &SampleModel<T>,
        grid: &CoherenceGrid<T>,
    ) -> Result<Self> {
        sample.validate()?;
        let share = crystal.signal_share();
        let kappa = lit::<T>(2.0) / (crystal.gv_mismatch() * crystal.length());
        let (np, nx) = (grid.pump_axis.len(), grid.mismatch_axis.len());
        let mismatch_weights: Vec<T> = grid
            .mismatch_axis
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let s = sinc(x);
                trapezoid_weight(j, nx, grid.mismatch_step) * s * s
            })
            .collect();
        let rows: Result<Vec<Vec<Complex<T>>>> = grid
            .pump_axis
            .par_iter()
            .enumerate()
            .map(|(i, &wp)| {
                let wpump = trapezoid_weight(i, np, grid.pump_step) * pump.intensity(wp);
                grid.mismatch_axis
                    .iter()
                    .zip(&mismatch_weights)
                    .map(|(&x, &wx)| {
                        let omega_s = share * wp + kappa * x;
                        let r = sample.reflectivity(wp - omega_s)?;
                        Ok(r.conj() * (wpump * wx))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            pump_axis: grid.pump_axis.clone(),
            mismatch_axis: grid.mismatch_axis.clone(),
            weights: rows?.concat(),
            signal_share: share,
            kappa,
        })
    }

    /// Carrier-free `g1` at the given delays.
    pub fn evaluate(&self, timing: &Timing<T>) -> Complex<T> {
        let nx = self.mismatch_axis.len();
        let rate_x = self.kappa * timing.t1;
        let phase_x: Vec<Complex<T>> =
            self.mismatch_axis.iter().map(|&x| Complex::from_polar(T::one(), rate_x * x)).collect();
        let rate_p = timing.t2 + self.signal_share * timing.t1;
        let mut total = Complex::new(T::zero(), T::zero());
        for (row, &wp) in self.weights.chunks_exact(nx).zip(&self.pump_axis) {
            let inner = row.iter().zip(&phase_x).fold(Complex::new(T::zero(), T::zero()), |acc, (w, p)| acc + *w * *p);
            total += inner * Complex::from_polar(T::one(), rate_p * wp);
        }
        total / T::PI()
    }
}

fn check_bound<T: Real>(g: Complex<T>, timing: &Timing<T>) -> Result<Complex<T>> {
    if !(g.norm() <= T::one() + lit::<T>(1e-6)) {
        return Err(Error::Numerical(format!(
            "|g1| = {:.9} exceeds 1 at T1 = {:.3} fs, T2 = {:.3} fs; refine the coherence grid",
            to_f64(g.norm()),
            to_f64(timing.t1),
            to_f64(timing.t2)
        )));
    }
    Ok(g)
}

/// Normalized cross-correlation of the two signal fields, including the
/// optical carrier, by direct quadrature.
pub fn g1_numeric<T: Real>(
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    geometry: &InterferometerGeometry<T>,
    sample: &SampleModel<T>,
    grid: &CoherenceGrid<T>,
) -> Result<Complex<T>> {
    let kernel = CoherenceKernel::new(crystal, pump, sample, grid)?;
    let timing = timing_from_geometry(geometry, crystal);
    let g = check_bound(kernel.evaluate(&timing), &timing)?;
    Ok(g * Complex::from_polar(T::one(), carrier_phase(geometry, crystal)))
}

/// [`g1_numeric`] over a path-delay scan (`z3` varied), carrier removed.
pub fn g1_scan<T: Real>(
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    geometry: &InterferometerGeometry<T>,
    sample: &SampleModel<T>,
    grid: &CoherenceGrid<T>,
    delta_z: &[T],
) -> Result<Vec<Complex<T>>> {
    let kernel = CoherenceKernel::new(crystal, pump, sample, grid)?;
    delta_z
        .par_iter()
        .map(|&dz| {
            let timing = timing_from_geometry(&geometry.with_delta_z(crystal, dz), crystal);
            check_bound(kernel.evaluate(&timing), &timing)
        })
        .collect()
}

/// Grid sized for a scan over `delta_z` on `geometry`.
pub fn coherence_grid_for_scan<T: Real>(
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    geometry: &InterferometerGeometry<T>,
    sample: &SampleModel<T>,
    delta_z: &[T],
) -> Result<CoherenceGrid<T>> {
    let mut max_delay = T::zero();
    for &dz in delta_z {
        let t = timing_from_geometry(&geometry.with_delta_z(crystal, dz), crystal);
        max_delay = max_delay.max(t.t1.abs()).max(t.t2.abs());
    }
    CoherenceGrid::for_delays(crystal, pump, max_delay, sample.max_delay())
}
