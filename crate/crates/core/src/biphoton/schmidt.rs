use faer::traits::ComplexField;
use faer::Mat;
use num_complex::Complex;

use crate::biphoton::JointSpectrum;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// Schmidt coefficients of a pure two-photon state with the derived
/// entanglement measures.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtReport<T> {
    /// Squared Schmidt coefficients, descending, summing to one.
    pub coefficients: Vec<T>,
    /// `K = 1 / sum(lambda^2)`.
    pub schmidt_number: T,
    /// `E = -sum(lambda log2 lambda)`, bits.
    pub entropy_bits: T,
}

impl<T: Real> SchmidtReport<T> {
    /// Builds the report from singular values of the quadrature-weighted
    /// amplitude matrix.
    pub fn from_singular_values(singular: &[T]) -> Result<Self> {
        let mut coefficients: Vec<T> = singular.iter().map(|&s| s * s).collect();
        coefficients.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let total = coefficients.iter().fold(T::zero(), |a, &b| a + b);
        if !(total.is_finite() && total > T::zero()) {
            return Err(Error::Numerical(format!("singular values sum to {}", total)));
        }
        for c in &mut coefficients {
            *c /= total;
        }
        let purity = coefficients.iter().fold(T::zero(), |a, &l| a + l * l);
        let cutoff = T::epsilon() * coefficients[0];
        let entropy_bits = coefficients.iter().filter(|&&l| l > cutoff).fold(T::zero(), |a, &l| a - l * l.log2());
        Ok(Self { coefficients, schmidt_number: T::one() / purity, entropy_bits: entropy_bits.max(T::zero()) })
    }

    /// Number of coefficients above `threshold`.
    pub fn rank(&self, threshold: T) -> usize {
        self.coefficients.iter().take_while(|&&l| l > threshold).count()
    }
}

/// Singular value decomposition of `Phi(Ws, Wi) sqrt(dWs dWi)`.
///
/// Real amplitudes take the real SVD; anything else the complex one.
pub fn schmidt_analysis<T>(js: &JointSpectrum<T>) -> Result<SchmidtReport<T>>
where
    T: Real,
    Complex<T>: ComplexField<Real = T>,
{
    if !js.is_normalized() {
        return Err(Error::Precondition("Schmidt analysis needs a normalized joint spectrum".into()));
    }
    let n = js.dim();
    let weight = js.grid().step();
    let amp = js.amplitudes();
    let all_real = amp.iter().all(|a| a.im == T::zero());
    let all_imag = amp.iter().all(|a| a.re == T::zero());
    let singular = if all_real || all_imag {
        let m = Mat::<T>::from_fn(n, n, |i, j| {
            let a = amp[i * n + j];
            (if all_real { a.re } else { a.im }) * weight
        });
        m.singular_values()
    } else {
        let m = Mat::<Complex<T>>::from_fn(n, n, |i, j| amp[i * n + j] * weight);
        m.singular_values()
    }
    .map_err(|e| {
        Error::Numerical(format!(
            "SVD failed on {n}x{n} grid (step {:.3e} rad/fs, half-width {:.3e}): {e:?}",
            to_f64(js.grid().step()),
            to_f64(js.grid().half_width())
        ))
    })?;
    SchmidtReport::from_singular_values(&singular)
}
