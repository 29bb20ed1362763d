//! Physical parameters of the two down-converters, the pump, the idler-arm
//! sample and the discretized frequency plane.
//!
//! Internal units: time in fs, length in mm (sample thickness in µm at the
//! constructor boundary), angular frequency in rad/fs. Frequencies are
//! always detunings from the respective carrier.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, speed_of_light, to_f64, Real, SPEED_OF_LIGHT_NM_PER_FS};

/// Width parameter of the Gaussian fit `sinc(x) ~ exp(-alpha^2 x^2)`.
pub const SINC_GAUSSIAN_ALPHA: f64 = 0.455;

/// Half-maximum abscissa of `sinc^2(x)`.
pub const SINC2_HALF_MAX: f64 = 1.391_557_377;

/// Angular frequency (rad/fs) of a vacuum wavelength in nm.
pub fn omega_from_wavelength<T: Real>(lambda_nm: T) -> T {
    lit::<T>(2.0) * T::PI() * lit::<T>(SPEED_OF_LIGHT_NM_PER_FS) / lambda_nm
}

/// Plain-data description of a crystal, in the units used by the scenario
/// files. Validated into [`CrystalParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalConfig<T> {
    pub length_mm: T,
    /// `D = N_i - N_s`, fs/mm (signed).
    pub gv_mismatch: T,
    /// `D+ = N_p - (N_s + N_i)/2`, fs/mm.
    pub walk_off: T,
    /// Idler inverse group velocity `N_i`, fs/mm.
    pub idler_group_delay: T,
    /// Idler phase index at the carrier; only enters the fringe carrier.
    pub idler_phase_index: T,
    pub lambda_pump_nm: T,
    pub lambda_signal_nm: T,
    pub lambda_idler_nm: T,
    /// Nonlinear gain coefficient, fs^(1/2)/mm.
    pub sigma: T,
}

/// A validated nonlinear crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalParams<T> {
    cfg: CrystalConfig<T>,
}

impl<T: Real> CrystalParams<T> {
    pub fn new(cfg: CrystalConfig<T>) -> Result<Self> {
        let positive = |v: T, field: &'static str| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::domain(field, format!("must be positive, got {}", v)))
            }
        };
        positive(cfg.length_mm, "length_mm")?;
        positive(cfg.lambda_pump_nm, "lambda_pump_nm")?;
        positive(cfg.lambda_signal_nm, "lambda_signal_nm")?;
        positive(cfg.lambda_idler_nm, "lambda_idler_nm")?;
        positive(cfg.idler_phase_index, "idler_phase_index")?;
        if !cfg.gv_mismatch.is_finite() || cfg.gv_mismatch == T::zero() {
            return Err(Error::domain("gv_mismatch", "D must be finite and non-zero"));
        }
        if !cfg.walk_off.is_finite() || !cfg.idler_group_delay.is_finite() {
            return Err(Error::domain("walk_off", "group-velocity parameters must be finite"));
        }
        if !cfg.sigma.is_finite() || cfg.sigma < T::zero() {
            return Err(Error::domain("sigma", "must be finite and non-negative"));
        }
        let inv_p = T::one() / cfg.lambda_pump_nm;
        let inv_si = T::one() / cfg.lambda_signal_nm + T::one() / cfg.lambda_idler_nm;
        if ((inv_p - inv_si) / inv_p).abs() > lit::<T>(1e-3) {
            return Err(Error::domain(
                "lambda_pump_nm",
                format!(
                    "energy conservation violated: 1/{} vs 1/{} + 1/{}",
                    cfg.lambda_pump_nm, cfg.lambda_signal_nm, cfg.lambda_idler_nm
                ),
            ));
        }
        Ok(Self { cfg })
    }

    /// Type-0 MgO:LiNbO3 pumped at 532 nm, signal 810 nm, idler 1550 nm.
    pub fn mgo_lithium_niobate(length_mm: T) -> Result<Self> {
        Self::new(CrystalConfig {
            length_mm,
            gv_mismatch: lit::<T>(-263.50),
            walk_off: lit::<T>(780.0),
            idler_group_delay: lit::<T>(7270.0),
            idler_phase_index: lit::<T>(2.137),
            lambda_pump_nm: lit::<T>(532.0),
            lambda_signal_nm: lit::<T>(810.0),
            lambda_idler_nm: lit::<T>(1550.0),
            sigma: lit::<T>(1e-3),
        })
    }

    pub fn config(&self) -> CrystalConfig<T> {
        self.cfg
    }

    pub fn with_length(self, length_mm: T) -> Result<Self> {
        Self::new(CrystalConfig { length_mm, ..self.cfg })
    }

    pub fn with_walk_off(self, walk_off: T) -> Result<Self> {
        Self::new(CrystalConfig { walk_off, ..self.cfg })
    }

    pub fn with_sigma(self, sigma: T) -> Result<Self> {
        Self::new(CrystalConfig { sigma, ..self.cfg })
    }

    /// Same crystal with `D+ = 0`.
    pub fn without_walk_off(self) -> Self {
        Self { cfg: CrystalConfig { walk_off: T::zero(), ..self.cfg } }
    }

    pub fn length(&self) -> T {
        self.cfg.length_mm
    }
    pub fn gv_mismatch(&self) -> T {
        self.cfg.gv_mismatch
    }
    pub fn walk_off(&self) -> T {
        self.cfg.walk_off
    }
    pub fn idler_group_delay(&self) -> T {
        self.cfg.idler_group_delay
    }
    pub fn idler_phase_index(&self) -> T {
        self.cfg.idler_phase_index
    }
    pub fn sigma(&self) -> T {
        self.cfg.sigma
    }
    pub fn lambda_signal_nm(&self) -> T {
        self.cfg.lambda_signal_nm
    }
    pub fn lambda_idler_nm(&self) -> T {
        self.cfg.lambda_idler_nm
    }
    pub fn lambda_pump_nm(&self) -> T {
        self.cfg.lambda_pump_nm
    }

    pub fn omega_signal(&self) -> T {
        omega_from_wavelength(self.cfg.lambda_signal_nm)
    }
    pub fn omega_idler(&self) -> T {
        omega_from_wavelength(self.cfg.lambda_idler_nm)
    }
    /// Pump carrier taken as `omega_s + omega_i` so that energy conservation is exact.
    pub fn omega_pump(&self) -> T {
        self.omega_signal() + self.omega_idler()
    }

    /// `|D| L`, the temporal walk-off between signal and idler, fs.
    pub fn walk_off_time(&self) -> T {
        self.cfg.gv_mismatch.abs() * self.cfg.length_mm
    }

    /// `Dk L / 2` for the first-order Taylor expansion of the wave vectors.
    pub fn half_mismatch(&self, omega_s: T, omega_i: T) -> T {
        let dk = self.cfg.walk_off * (omega_s + omega_i) + self.cfg.gv_mismatch * (omega_s - omega_i) / lit::<T>(2.0);
        dk * self.cfg.length_mm / lit::<T>(2.0)
    }

    /// Fraction of the pump detuning carried by the signal along the
    /// phase-matching line, `1/2 - D+/D`.
    pub fn signal_share(&self) -> T {
        lit::<T>(0.5) - self.cfg.walk_off / self.cfg.gv_mismatch
    }
}

/// Gaussian pump pulse, `F(W) = T0^(1/2) pi^(-1/4) exp(-W^2 T0^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpPulse<T> {
    duration_fs: T,
}

impl<T: Real> PumpPulse<T> {
    pub fn new(duration_fs: T) -> Result<Self> {
        if !(duration_fs.is_finite() && duration_fs > T::zero()) {
            return Err(Error::domain("duration_fs", format!("must be positive, got {}", duration_fs)));
        }
        Ok(Self { duration_fs })
    }

    pub fn from_ps(duration_ps: T) -> Result<Self> {
        Self::new(duration_ps * lit::<T>(1000.0))
    }

    pub fn duration(&self) -> T {
        self.duration_fs
    }

    pub fn amplitude(&self, omega_p: T) -> T {
        pump_amplitude(self, omega_p)
    }

    /// `|F(W)|^2`, normalized to unit area.
    pub fn intensity(&self, omega_p: T) -> T {
        let t0 = self.duration_fs;
        let x = omega_p * t0;
        t0 / T::PI().sqrt() * (-x * x).exp()
    }
}

pub fn pump_amplitude<T: Real>(pump: &PumpPulse<T>, omega_p: T) -> T {
    let t0 = pump.duration_fs;
    let x = omega_p * t0;
    t0.sqrt() / T::PI().sqrt().sqrt() * (-(x * x) / lit::<T>(2.0)).exp()
}

/// Ratio of pump bandwidth to down-conversion bandwidth,
/// `gamma = alpha |D| L / (2 sqrt(2) T0)`. The state is separable at `gamma = 1`.
pub fn gamma_param<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>) -> T {
    lit::<T>(SINC_GAUSSIAN_ALPHA) * crystal.walk_off_time() / (lit::<T>(2.0) * T::SQRT_2() * pump.duration())
}

/// Pump duration that gives a requested `gamma` for this crystal.
pub fn duration_for_gamma<T: Real>(crystal: &CrystalParams<T>, gamma: T) -> Result<PumpPulse<T>> {
    PumpPulse::new(lit::<T>(SINC_GAUSSIAN_ALPHA) * crystal.walk_off_time() / (lit::<T>(2.0) * T::SQRT_2() * gamma))
}

/// Inputs of the nonlinear-coefficient formula, in SI units except the
/// carrier frequencies (rad/fs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearInputs<T> {
    /// Second-order susceptibility, m/V.
    pub chi2: T,
    pub pump_photons: T,
    /// Effective interaction area, m^2.
    pub area_m2: T,
    pub n_pump: T,
    pub n_signal: T,
    pub n_idler: T,
    pub omega_pump: T,
    pub omega_signal: T,
    pub omega_idler: T,
}

const HBAR: f64 = 1.054_571_817e-34;
const EPSILON_0: f64 = 8.854_187_812_8e-12;
const C_SI: f64 = 299_792_458.0;

/// Nonlinear coefficient `sigma` in fs^(1/2)/mm.
pub fn nonlinear_sigma<T: Real>(inp: &NonlinearInputs<T>) -> Result<T> {
    let checks: [(T, &'static str); 8] = [
        (inp.chi2, "chi2"),
        (inp.area_m2, "area_m2"),
        (inp.n_pump, "n_pump"),
        (inp.n_signal, "n_signal"),
        (inp.n_idler, "n_idler"),
        (inp.omega_pump, "omega_pump"),
        (inp.omega_signal, "omega_signal"),
        (inp.omega_idler, "omega_idler"),
    ];
    for (v, field) in checks {
        if !(v.is_finite() && v > T::zero()) {
            return Err(Error::domain(field, format!("must be positive, got {}", v)));
        }
    }
    if !(inp.pump_photons.is_finite() && inp.pump_photons >= T::zero()) {
        return Err(Error::domain("pump_photons", "must be non-negative"));
    }
    // evaluate in f64: the SI magnitudes underflow f32
    let f = to_f64;
    let to_si = 1e15;
    let num = HBAR
        * f(inp.omega_pump)
        * to_si
        * f(inp.omega_signal)
        * to_si
        * f(inp.omega_idler)
        * to_si
        * f(inp.chi2).powi(2)
        * f(inp.pump_photons);
    let den = 16.0
        * std::f64::consts::PI
        * EPSILON_0
        * C_SI.powi(3)
        * f(inp.n_pump)
        * f(inp.n_signal)
        * f(inp.n_idler)
        * f(inp.area_m2);
    // s^(1/2)/m -> fs^(1/2)/mm
    let sigma_si = (num / den).sqrt();
    Ok(lit::<T>(sigma_si * 10f64.powf(7.5) * 1e-3))
}

/// Two-interface sample: first-surface reflection `r0` and an effective
/// back-surface reflection `r1` delayed by `tau = 2 d0 n0 / c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bilayer<T> {
    pub r0: T,
    pub r1: T,
    pub thickness_um: T,
    pub index: T,
    /// Idler carrier frequency, rad/fs.
    pub carrier: T,
}

impl<T: Real> Bilayer<T> {
    pub fn new(r0: T, r1: T, thickness_um: T, index: T, carrier: T) -> Result<Self> {
        let b = Self { r0, r1, thickness_um, index, carrier };
        b.validate()?;
        Ok(b)
    }

    /// Slab of index `n_layer` between `n_ambient` (illuminated side) and
    /// `n_substrate`, normal incidence, single pass through the slab.
    pub fn from_fresnel(n_ambient: T, n_layer: T, n_substrate: T, thickness_um: T, carrier: T) -> Result<Self> {
        for (v, field) in [(n_ambient, "ambient_index"), (n_layer, "layer_index"), (n_substrate, "substrate_index")] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::domain(field, "refractive index must be positive"));
            }
        }
        let two = lit::<T>(2.0);
        let r0 = (n_ambient - n_layer) / (n_ambient + n_layer);
        let r_back = (n_layer - n_substrate) / (n_layer + n_substrate);
        let t_in = two * n_ambient / (n_ambient + n_layer);
        let t_out = two * n_layer / (n_layer + n_ambient);
        Self::new(r0, t_in * r_back * t_out, thickness_um, n_layer, carrier)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r1.is_finite()) {
            return Err(Error::domain("r0", "reflection coefficients must be finite"));
        }
        if self.r0.abs() + self.r1.abs() > T::one() {
            return Err(Error::domain("r1", format!("|r0| + |r1| = {} exceeds 1", self.r0.abs() + self.r1.abs())));
        }
        if !(self.thickness_um.is_finite() && self.thickness_um >= T::zero()) {
            return Err(Error::domain("thickness_um", "must be non-negative"));
        }
        if !(self.index.is_finite() && self.index > T::zero()) {
            return Err(Error::domain("index", "must be positive"));
        }
        Ok(())
    }

    /// Round-trip delay between the two reflections, fs.
    pub fn delay(&self) -> T {
        lit::<T>(2.0) * self.thickness_um * lit::<T>(1e-3) * self.index / speed_of_light::<T>()
    }

    /// Optical path difference `c tau`, µm.
    pub fn optical_thickness_um(&self) -> T {
        lit::<T>(2.0) * self.thickness_um * self.index
    }

    pub fn reflectivity(&self, omega_i: T) -> Complex<T> {
        let phase = (self.carrier + omega_i) * self.delay();
        Complex::new(self.r0, T::zero()) + Complex::from_polar(self.r1, phase)
    }
}

/// Complex spectral reflectivity of the idler-arm sample.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleModel<T> {
    Uniform(Complex<T>),
    Bilayer(Bilayer<T>),
    /// `(detuning, r)` pairs sorted by detuning, linearly interpolated.
    Tabulated(Vec<(T, Complex<T>)>),
}

impl<T: Real> SampleModel<T> {
    pub fn mirror() -> Self {
        SampleModel::Uniform(Complex::new(T::one(), T::zero()))
    }

    pub fn uniform(r: Complex<T>) -> Result<Self> {
        let s = SampleModel::Uniform(r);
        s.validate()?;
        Ok(s)
    }

    pub fn tabulated(table: Vec<(T, Complex<T>)>) -> Result<Self> {
        let s = SampleModel::Tabulated(table);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = lit::<T>(1e-12);
        match self {
            SampleModel::Uniform(r) => {
                if !(r.re.is_finite() && r.im.is_finite()) || r.norm() > T::one() + tol {
                    return Err(Error::domain("r", format!("|r| = {} exceeds 1", r.norm())));
                }
            }
            SampleModel::Bilayer(b) => b.validate()?,
            SampleModel::Tabulated(table) => {
                if table.len() < 2 {
                    return Err(Error::domain("table", "needs at least two entries"));
                }
                for w in table.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::domain("table", "detunings must be strictly increasing"));
                    }
                }
                if let Some((om, r)) = table.iter().find(|(_, r)| !(r.norm() <= T::one() + tol)) {
                    return Err(Error::domain("table", format!("|r({})| = {} exceeds 1", om, r.norm())));
                }
            }
        }
        Ok(())
    }

    /// Largest delay (fs) the sample imprints on the idler; sets phase
    /// sampling in the coherence quadrature.
    pub fn max_delay(&self) -> T {
        match self {
            SampleModel::Bilayer(b) => b.delay(),
            _ => T::zero(),
        }
    }

    pub fn reflectivity(&self, omega_i: T) -> Result<Complex<T>> {
        sample_reflectivity(self, omega_i)
    }
}

pub fn sample_reflectivity<T: Real>(sample: &SampleModel<T>, omega_i: T) -> Result<Complex<T>> {
    match sample {
        SampleModel::Uniform(r) => Ok(*r),
        SampleModel::Bilayer(b) => Ok(b.reflectivity(omega_i)),
        SampleModel::Tabulated(table) => {
            let (first, last) = (table[0].0, table[table.len() - 1].0);
            if !(omega_i >= first && omega_i <= last) {
                return Err(Error::OutOfRange { query: to_f64(omega_i), min: to_f64(first), max: to_f64(last) });
            }
            let hi = table.partition_point(|(w, _)| *w < omega_i).max(1);
            let (w0, r0) = table[hi - 1];
            let (w1, r1) = table[hi];
            let t = (omega_i - w0) / (w1 - w0);
            Ok(r0 + (r1 - r0) * t)
        }
    }
}

/// Uniform, symmetric discretization of the (signal, idler) detuning plane.
/// Both axes share nodes and spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T> {
    axis: Vec<T>,
    step: T,
    half_width: T,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn symmetric(half_width: T, points: usize) -> Result<Self> {
        if points < 2 || !(half_width.is_finite() && half_width > T::zero()) {
            return Err(Error::Resolution(format!(
                "need at least two points and a positive span (got {} points, half-width {})",
                points, half_width
            )));
        }
        let (axis, step) = crate::scalar::symmetric_axis(half_width, points);
        Ok(Self { axis, step, half_width })
    }

    pub fn omega_s_axis(&self) -> &[T] {
        &self.axis
    }
    pub fn omega_i_axis(&self) -> &[T] {
        &self.axis
    }
    pub fn len(&self) -> usize {
        self.axis.len()
    }
    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }
    pub fn step(&self) -> T {
        self.step
    }
    pub fn half_width(&self) -> T {
        self.half_width
    }
    /// Quadrature weight `dWs dWi` of one cell.
    pub fn cell_area(&self) -> T {
        self.step * self.step
    }

    /// Same span, step halved (`2n - 1` nodes, nested).
    pub fn refined(&self) -> Self {
        Self::symmetric(self.half_width, 2 * self.axis.len() - 1).expect("refining a valid grid")
    }
}

/// Smallest number of nodes accepted by [`make_frequency_grid`].
pub const MIN_GRID_POINTS: usize = 256;

/// Nodes required across the narrowest resolved spectral feature.
pub const MIN_POINTS_PER_WIDTH: f64 = 8.0;

/// Half-width (rad/fs) that contains the joint spectrum on both axes.
pub fn grid_half_width<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>) -> T {
    let pump_span = lit::<T>(6.0) / pump.duration();
    let pm_span = lit::<T>(24.0) / crystal.walk_off_time();
    let share = crystal.signal_share().abs().max((T::one() - crystal.signal_share()).abs());
    pump_span.max(pm_span).max(pump_span * share + pm_span)
}

/// Signal-marginal FWHM estimate (rad/fs): the wider of the phase-matching
/// width and the pump width projected onto one detuning axis.
pub fn marginal_width_estimate<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>) -> T {
    let pm = lit::<T>(4.0 * SINC2_HALF_MAX) / crystal.walk_off_time();
    let share = crystal.signal_share().abs().max((T::one() - crystal.signal_share()).abs());
    let pump_fwhm = lit::<T>(2.0) * lit::<T>(2f64.ln()).sqrt() / pump.duration();
    pm.max(pump_fwhm * share)
}

/// Largest rate (fs) at which the phase-matching argument varies along
/// either detuning axis, `L max|D+ +- D/2| / 2`.
fn ridge_rate<T: Real>(crystal: &CrystalParams<T>) -> T {
    let half_d = crystal.gv_mismatch() / lit::<T>(2.0);
    let dp = crystal.walk_off();
    crystal.length() * (dp + half_d).abs().max((dp - half_d).abs()) / lit::<T>(2.0)
}

/// Checks that a row or column sum of `|Phi|^2` with step `step` is a faithful
/// quadrature. Either the sampled product is alias-free, or the pump ridge
/// is so narrow that it collapses onto the node diagonal while the
/// phase-matching ridge stays resolved.
fn check_ridge_sampling<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>, step: T) -> Result<()> {
    let rate = ridge_rate(crystal);
    let t0 = pump.duration();
    let two_pi = lit::<T>(2.0) * T::PI();
    let alias_free_step = two_pi / (lit::<T>(2.0) * rate + lit::<T>(12.0) * t0);
    if step <= alias_free_step {
        return Ok(());
    }
    let ridge_width = lit::<T>(2.0 * SINC2_HALF_MAX) / rate;
    let pump_width = T::one() / t0;
    if pump_width <= ridge_width / lit::<T>(20.0) && ridge_width / step >= lit::<T>(MIN_POINTS_PER_WIDTH) {
        return Ok(());
    }
    Err(Error::Resolution(format!(
        "step {:.3e} rad/fs under-samples the phase-matching ridge (width {:.3e} rad/fs); \
         alias-free sampling needs a step below {:.3e}",
        to_f64(step),
        to_f64(ridge_width),
        to_f64(alias_free_step)
    )))
}

pub fn make_frequency_grid<T: Real>(
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    points: usize,
) -> Result<FrequencyGrid<T>> {
    if points < MIN_GRID_POINTS {
        return Err(Error::Resolution(format!("{} points requested, at least {} required", points, MIN_GRID_POINTS)));
    }
    let grid = FrequencyGrid::symmetric(grid_half_width(crystal, pump), points)?;
    let width = marginal_width_estimate(crystal, pump);
    let across = width / grid.step();
    if across < lit::<T>(MIN_POINTS_PER_WIDTH) {
        return Err(Error::Resolution(format!(
            "only {:.2} nodes across the {:.3e} rad/fs spectral width (step {:.3e})",
            to_f64(across),
            to_f64(width),
            to_f64(grid.step())
        )));
    }
    check_ridge_sampling(crystal, pump, grid.step())?;
    Ok(grid)
}

/// Smallest power of two, at least `floor`, accepted by
/// [`make_frequency_grid`], or `None` past 16384.
pub fn suggest_grid_points<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>, floor: usize) -> Option<usize> {
    let mut n = floor.max(MIN_GRID_POINTS).next_power_of_two();
    while n <= 16384 {
        if make_frequency_grid(crystal, pump, n).is_ok() {
            return Some(n);
        }
        n *= 2;
    }
    None
}
