//! Numerical tolerances used across the crate.

/// One record holding every tolerance the checks use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Coefficients with modulus at or below this are not stored.
    pub zero_trim: f64,
    /// Class powers at or below this count as vanishing (MR1 failure).
    pub class_power: f64,
    /// Two-scale residuals (nestedness, wavelet relation).
    pub two_scale: f64,
    /// Fast vs naive lattice DFT.
    pub fft: f64,
    /// Unitarity of the Fourier matrix.
    pub unitarity: f64,
    /// Orthonormality audits, roundtrips, energy conservation.
    pub orthonormality: f64,
    /// Pointwise function equality in the reduction predicates.
    pub function_equality: f64,
    /// Resampling an interpolant.
    pub interpolation: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        zero_trim: 1e-15,
        class_power: 1e-14,
        two_scale: 1e-12,
        fft: 1e-10,
        unitarity: 1e-12,
        orthonormality: 1e-10,
        function_equality: 1e-12,
        interpolation: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
