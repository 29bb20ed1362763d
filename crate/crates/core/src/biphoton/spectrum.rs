use crate::biphoton::JointSpectrum;
use crate::curve;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real, SPEED_OF_LIGHT_NM_PER_FS};

/// Signal marginal `S(Ws) = integral dWi |Phi(Ws, Wi)|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSpectrum<T> {
    pub omega: Vec<T>,
    pub density: Vec<T>,
    pub fwhm_omega: T,
    /// FWHM converted to wavelength about the signal carrier, nm.
    pub fwhm_nm: T,
    pub carrier_nm: T,
}

impl<T: Real> MarginalSpectrum<T> {
    /// Vacuum wavelength (nm) of each detuning node.
    pub fn wavelengths_nm(&self) -> Vec<T> {
        let c = lit::<T>(SPEED_OF_LIGHT_NM_PER_FS);
        let two_pi = lit::<T>(2.0) * T::PI();
        let w0 = two_pi * c / self.carrier_nm;
        self.omega.iter().map(|&w| two_pi * c / (w0 + w)).collect()
    }
}

/// Converts an angular-frequency width (rad/fs) into nm about `carrier_nm`.
pub fn omega_width_to_nm<T: Real>(width: T, carrier_nm: T) -> T {
    carrier_nm * carrier_nm * width / (lit::<T>(2.0) * T::PI() * lit::<T>(SPEED_OF_LIGHT_NM_PER_FS))
}

/// Signal marginal of a normalized joint spectrum. `carrier_nm` is the
/// signal central wavelength used for the nm conversion.
pub fn marginal_spectrum<T: Real>(js: &JointSpectrum<T>, carrier_nm: T) -> Result<MarginalSpectrum<T>> {
    if !js.is_normalized() {
        return Err(Error::Precondition("marginal spectrum needs a normalized joint spectrum".into()));
    }
    let step = js.grid().step();
    let density: Vec<T> = js.rows().map(|row| row.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()) * step).collect();
    let omega = js.grid().omega_s_axis().to_vec();
    let peak = curve::argmax(&density).ok_or_else(|| Error::Analysis("empty spectrum".into()))?;
    if peak == 0 || peak + 1 == density.len() {
        return Err(Error::Analysis("spectral peak sits on the grid edge".into()));
    }
    let fwhm_omega = curve::fwhm(&omega, &density, peak)?;
    Ok(MarginalSpectrum { fwhm_nm: omega_width_to_nm(fwhm_omega, carrier_nm), omega, density, fwhm_omega, carrier_nm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{joint_spectral_intensity, Kernel};
    use crate::optics::{make_frequency_grid, CrystalParams, FrequencyGrid, PumpPulse};
    use num_complex::Complex;

    #[test]
    fn marginal_integrates_to_one() {
        let c = CrystalParams::mgo_lithium_niobate(2.0).unwrap();
        let p = PumpPulse::new(500.0).unwrap();
        let grid = make_frequency_grid(&c, &p, 400).unwrap();
        let js = joint_spectral_intensity(Kernel::Exact, &c, &p, &grid).unwrap();
        let s = marginal_spectrum(&js, 810.0).unwrap();
        let total: f64 = s.density.iter().sum::<f64>() * grid.step();
        assert!((total - 1.0).abs() < 1e-9);
        let lam = s.wavelengths_nm();
        assert!((lam[grid.len() / 2] - 810.0).abs() < 0.5);
    }

    #[test]
    fn unit_conversion() {
        // 810^2 / (2 pi 299.792458) nm per rad/fs
        let w = omega_width_to_nm(1.0_f64, 810.0);
        assert!((w - 348.31).abs() < 0.01, "{w}");
    }

    #[test]
    fn requires_normalization_and_interior_peak() {
        let grid = FrequencyGrid::symmetric(1.0, 5).unwrap();
        let mut amp = vec![Complex::new(0.0, 0.0); 25];
        amp[0] = Complex::new(1.0, 0.0);
        let mut js = JointSpectrum::from_amplitude(grid, amp).unwrap();
        assert!(matches!(marginal_spectrum(&js, 810.0), Err(Error::Precondition(_))));
        js.normalize().unwrap();
        assert!(matches!(marginal_spectrum(&js, 810.0), Err(Error::Analysis(_))));
    }
}
