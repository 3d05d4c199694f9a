//! Multivariate periodic wavelets of de la Vallée Poussin type.

pub mod admissible;
pub mod directional;
pub mod dlvp;
pub mod error;
pub mod intlat;
pub mod latfft;
pub mod mra;
pub mod scalar;
pub mod tolerance;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Real;
pub use tolerance::Tolerances;

pub type AdmissibleFnF64 = admissible::AdmissibleFn<f64>;
pub type AdmissibleFnF32 = admissible::AdmissibleFn<f32>;
pub type SparseSpectrumF64 = dlvp::SparseSpectrum<f64>;
pub type SparseSpectrumF32 = dlvp::SparseSpectrum<f32>;
pub type ScalingFunctionF64 = dlvp::ScalingFunction<f64>;
pub type ScalingFunctionF32 = dlvp::ScalingFunction<f32>;
pub type WaveletF64 = dlvp::Wavelet<f64>;
pub type WaveletF32 = dlvp::Wavelet<f32>;
pub type PatternVectorF64 = latfft::PatternVector<f64>;
pub type PatternVectorF32 = latfft::PatternVector<f32>;
pub type SpectrumVectorF64 = latfft::SpectrumVector<f64>;
pub type SpectrumVectorF32 = latfft::SpectrumVector<f32>;
pub type SampleGridF64 = transform::SampleGrid<f64>;
pub type SampleGridF32 = transform::SampleGrid<f32>;
pub type FilterBankF64 = transform::FilterBank<f64>;
pub type FilterBankF32 = transform::FilterBank<f32>;
