//! Biphoton joint spectral amplitude, its marginals and its Schmidt
//! decomposition.

mod schmidt;
mod spectrum;

pub use schmidt::{schmidt_analysis, SchmidtReport};
pub use spectrum::{marginal_spectrum, MarginalSpectrum};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optics::{CrystalParams, FrequencyGrid, PumpPulse, SINC_GAUSSIAN_ALPHA};
use crate::scalar::{lit, sinc, Real};

/// Which form of the joint spectral amplitude to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `sinc` phase matching with the crystal's `D+`.
    Exact,
    /// Gaussian fit of the `sinc`, with `D+ = 0`.
    Gaussian,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exact => "exact",
            Kernel::Gaussian => "gaussian",
        }
    }

    pub fn amplitude<T: Real>(
        self,
        crystal: &CrystalParams<T>,
        pump: &PumpPulse<T>,
        omega_s: T,
        omega_i: T,
    ) -> Complex<T> {
        match self {
            Kernel::Exact => biphoton_exact(crystal, pump, omega_s, omega_i),
            Kernel::Gaussian => Complex::new(biphoton_gaussian(crystal, pump, omega_s, omega_i), T::zero()),
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Kernel::Exact),
            "gaussian" => Ok(Kernel::Gaussian),
            other => Err(format!("unknown kernel `{other}` (expected `exact` or `gaussian`)")),
        }
    }
}

/// `i sigma L F(Ws + Wi) sinc(Dk L / 2)`, global propagation phase omitted.
pub fn biphoton_exact<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>, omega_s: T, omega_i: T) -> Complex<T> {
    let magnitude = crystal.sigma()
        * crystal.length()
        * pump.amplitude(omega_s + omega_i)
        * sinc(crystal.half_mismatch(omega_s, omega_i));
    Complex::new(T::zero(), magnitude)
}

/// [`biphoton_exact`] times the first-order crystal phase `exp(i s_k L)`,
/// with the constant carrier part of `s_k` dropped.
pub fn biphoton_exact_with_phase<T: Real>(
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    omega_s: T,
    omega_i: T,
) -> Complex<T> {
    let n_i = crystal.idler_group_delay();
    let n_s = n_i - crystal.gv_mismatch();
    let n_p = crystal.walk_off() + (n_s + n_i) / lit::<T>(2.0);
    let phase = (n_p * (omega_s + omega_i) + n_s * omega_s + n_i * omega_i) * crystal.length();
    biphoton_exact(crystal, pump, omega_s, omega_i) * Complex::from_polar(T::one(), phase)
}

/// Normalized two-Gaussian approximation of the biphoton (`D+` treated as 0).
pub fn biphoton_gaussian<T: Real>(crystal: &CrystalParams<T>, pump: &PumpPulse<T>, omega_s: T, omega_i: T) -> T {
    let alpha = lit::<T>(SINC_GAUSSIAN_ALPHA);
    let t0 = pump.duration();
    let dl = crystal.walk_off_time();
    let norm = (alpha * t0 * dl / (T::SQRT_2() * T::PI())).sqrt();
    let sum = omega_s + omega_i;
    let diff = omega_s - omega_i;
    norm * (-(sum * sum * t0 * t0) / lit::<T>(2.0) - alpha * alpha * dl * dl * diff * diff / lit::<T>(16.0)).exp()
}

/// Discretized joint spectral amplitude, rows indexed by signal detuning.
#[derive(Debug, Clone)]
pub struct JointSpectrum<T> {
    grid: FrequencyGrid<T>,
    amplitude: Vec<Complex<T>>,
    normalized: bool,
}

impl<T: Real> JointSpectrum<T> {
    /// Wraps a row-major `n x n` amplitude matrix on `grid`.
    pub fn from_amplitude(grid: FrequencyGrid<T>, amplitude: Vec<Complex<T>>) -> Result<Self> {
        let n = grid.len();
        if amplitude.len() != n * n {
            return Err(Error::Numerical(format!("amplitude has {} entries, grid needs {}", amplitude.len(), n * n)));
        }
        Ok(Self { grid, amplitude, normalized: false })
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.grid.len()
    }
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn amplitude(&self, row: usize, col: usize) -> Complex<T> {
        self.amplitude[row * self.dim() + col]
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitude
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex<T>]> {
        self.amplitude.chunks_exact(self.dim())
    }

    /// `|Phi|^2` in row-major order.
    pub fn intensity(&self) -> Vec<T> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum |Phi|^2 dWs dWi`.
    pub fn total_probability(&self) -> T {
        let sum = self.amplitude.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
        sum * self.grid.cell_area()
    }

    /// Rescales so that the quadrature sum of `|Phi|^2` is one.
    pub fn normalize(&mut self) -> Result<()> {
        let total = self.total_probability();
        if !(total.is_finite() && total > T::zero()) {
            return Err(Error::Numerical(format!("cannot normalize joint spectrum with total probability {}", total)));
        }
        let scale = T::one() / total.sqrt();
        for a in &mut self.amplitude {
            *a *= scale;
        }
        self.normalized = true;
        Ok(())
    }

    /// First and second moments `(<Ws>, <Wi>, corr(Ws, Wi))` of `|Phi|^2`.
    pub fn correlation(&self) -> (T, T, T) {
        let axis = self.grid.omega_s_axis();
        let n = self.dim();
        let mut w = T::zero();
        let (mut ms, mut mi) = (T::zero(), T::zero());
        for (r, row) in self.rows().enumerate() {
            for (c, a) in row.iter().enumerate() {
                let p = a.norm_sqr();
                w += p;
                ms += p * axis[r];
                mi += p * axis[c];
            }
        }
        ms /= w;
        mi /= w;
        let (mut vs, mut vi, mut cov) = (T::zero(), T::zero(), T::zero());
        for r in 0..n {
            for c in 0..n {
                let p = self.amplitude[r * n + c].norm_sqr();
                let ds = axis[r] - ms;
                let di = axis[c] - mi;
                vs += p * ds * ds;
                vi += p * di * di;
                cov += p * ds * di;
            }
        }
        (ms, mi, cov / (vs * vi).sqrt())
    }
}

/// Evaluates `kernel` on `grid` and normalizes. The normalized spectrum does
/// not depend on `sigma`, so the gain is set to one during evaluation.
pub fn joint_spectral_intensity<T: Real>(
    kernel: Kernel,
    crystal: &CrystalParams<T>,
    pump: &PumpPulse<T>,
    grid: &FrequencyGrid<T>,
) -> Result<JointSpectrum<T>> {
    let unit = crystal.with_sigma(T::one())?;
    let axis = grid.omega_s_axis();
    let n = grid.len();
    let mut amplitude = vec![Complex::new(T::zero(), T::zero()); n * n];
    amplitude.par_chunks_mut(n).zip(axis.par_iter()).for_each(|(row, &ws)| {
        for (cell, &wi) in row.iter_mut().zip(axis) {
            *cell = kernel.amplitude(&unit, pump, ws, wi);
        }
    });
    let mut js = JointSpectrum::from_amplitude(grid.clone(), amplitude)?;
    js.normalize()?;
    Ok(js)
}
