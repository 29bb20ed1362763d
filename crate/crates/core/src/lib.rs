//! Induced coherence between two pulsed parametric down-converters.
//!
//! Numerical core for nonlinear interferometers in the SU(1,1)-like
//! induced-coherence configuration: the biphoton joint spectrum and its
//! Schmidt decomposition, the first-order coherence between the two signal
//! beams, and OCT interferograms of layered samples placed in the idler arm.
//!
//! Everything is generic over the floating-point type; the aliases at the
//! crate root fix it to `f64` (and `f32` with an `F32` suffix).
//!
//! Units: time in fs, length in mm, angular frequency detunings in rad/fs,
//! wavelengths in nm, sample thickness in µm.

// Range checks are written as `!(x <= max)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biphoton;
pub mod coherence;
pub mod curve;
pub mod error;
pub mod oct;
pub mod optics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Crystal = optics::CrystalParams<f64>;
pub type CrystalConfig = optics::CrystalConfig<f64>;
pub type Pump = optics::PumpPulse<f64>;
pub type Sample = optics::SampleModel<f64>;
pub type Bilayer = optics::Bilayer<f64>;
pub type Grid = optics::FrequencyGrid<f64>;
pub type Geometry = coherence::InterferometerGeometry<f64>;
pub type Timing = coherence::Timing<f64>;
pub type CoherenceGrid = coherence::CoherenceGrid<f64>;
pub type JointSpectrum = biphoton::JointSpectrum<f64>;
pub type SchmidtReport = biphoton::SchmidtReport<f64>;
pub type MarginalSpectrum = biphoton::MarginalSpectrum<f64>;
pub type Interferogram = oct::Interferogram<f64>;
pub type PeakReport = oct::PeakReport<f64>;
pub type Complex64 = num_complex::Complex<f64>;

pub type CrystalF32 = optics::CrystalParams<f32>;
pub type PumpF32 = optics::PumpPulse<f32>;
pub type SampleF32 = optics::SampleModel<f32>;
pub type GridF32 = optics::FrequencyGrid<f32>;
pub type GeometryF32 = coherence::InterferometerGeometry<f32>;
pub type JointSpectrumF32 = biphoton::JointSpectrum<f32>;
pub type InterferogramF32 = oct::Interferogram<f32>;
