//! Sampling, interpolation and the orthonormal wavelet transform of a
//! dyadic chain.
//!
//! Everything runs in the spectral domain. A coefficient vector `a` on
//! `P(M)` stands for `f = sum_y a_y T_y φ`, whose Fourier coefficients are
//! `c_k(f) = â_{[k]} c_k(φ)` with `â = dft(a)`.

use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::admissible::AdmissibleFn;
use crate::dlvp::{
    class_sums, orthonormal_filters, orthonormal_filters_from, scaling_spectrum, wavelet_spectrum, BasisFunction, LevelFilters, ScalingFunction,
    SparseSpectrum, Wavelet,
};
use crate::error::{Error, Result};
use crate::intlat::{pattern, ChainSpec, GeneratingSet, IntMat, Variant};
use crate::latfft::{LatticeFft, PatternVector, SpectrumVector};
use crate::scalar::Real;
use crate::tolerance::Tolerances;

/// Translate coefficients on `P(M)`, canonical order.
pub type CoeffVector<T> = PatternVector<T>;

/// Values `f(2 pi y)` for `y ∈ P(M)` in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid<T> {
    values: PatternVector<T>,
}

impl<T: Real> SampleGrid<T> {
    pub fn new(matrix: IntMat, values: Vec<Complex<T>>) -> Result<Self> {
        Ok(SampleGrid { values: PatternVector::new(matrix, values)? })
    }

    pub fn from_pattern_vector(values: PatternVector<T>) -> Self {
        SampleGrid { values }
    }

    pub fn matrix(&self) -> &IntMat {
        self.values.matrix()
    }

    pub fn values(&self) -> &[Complex<T>] {
        self.values.values()
    }

    pub fn as_pattern_vector(&self) -> &PatternVector<T> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs_diff(&self, other: &SampleGrid<T>) -> T {
        self.values()
            .iter()
            .zip(other.values())
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }
}

/// Points `2 pi y`, `y ∈ P(M)`, as real coordinates in canonical order.
pub fn sample_points<T: Real>(m: &IntMat) -> Result<Vec<Vec<T>>> {
    let two_pi = T::lit(std::f64::consts::TAU);
    Ok(pattern(m, Variant::Symmetric)?
        .points()
        .iter()
        .map(|y| y.to_real::<T>().into_iter().map(|v| v * two_pi).collect())
        .collect())
}

/// Samples `f` on the pattern of `m`.
pub fn sample<T: Real>(f: impl Fn(&[T]) -> Complex<T> + Sync, m: &IntMat) -> Result<SampleGrid<T>> {
    let values = sample_points::<T>(m)?.par_iter().map(|x| f(x)).collect();
    SampleGrid::new(m.clone(), values)
}

/// `ĉ_h = sum_{k ≡ h mod M^T} c_k` over `G(M^T)`.
pub fn alias<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<SpectrumVector<T>> {
    SpectrumVector::new(m.clone(), class_sums(s, m)?)
}

/// Samples a Fourier series on the pattern of `m` by folding its
/// coefficients onto `G(M^T)`: `f(2 pi y) = m idft(ĉ)_y`.
pub fn sample_series<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<SampleGrid<T>> {
    let plan = LatticeFft::new(m)?;
    let mf = T::from_usize_lossy(plan.len());
    let values = plan.inverse(alias(s, m)?.values())?.into_iter().map(|v| v * mf).collect();
    SampleGrid::new(m.clone(), values)
}

/// Fourier coefficients of `sum_y a_y T_y η`.
pub fn series_of<T: Real, B: BasisFunction<T>>(coeffs: &CoeffVector<T>, basis: &B) -> Result<SparseSpectrum<T>> {
    let m = basis.matrix();
    if coeffs.matrix() != m {
        return Err(Error::IndexMismatch);
    }
    let ahat = LatticeFft::new(m)?.forward(coeffs.values())?;
    let classes = GeneratingSet::new(&m.transpose(), Variant::Symmetric)?;
    Ok(SparseSpectrum::from_pairs(
        basis.spectrum().dim(),
        basis.spectrum().iter().map(|(k, c)| (k.clone(), c * ahat[classes.class_index(k)])),
    ))
}

/// Evaluates `sum_y a_y T_y η` on the pattern of `eval_m`.
pub fn synthesize<T: Real, B: BasisFunction<T>>(coeffs: &CoeffVector<T>, basis: &B, eval_m: &IntMat) -> Result<SampleGrid<T>> {
    sample_series(&series_of(coeffs, basis)?, eval_m)
}

/// Coefficients of the interpolant in `V_M^φ`:
/// `â_h = dft(s)_h / (m C_h)` with `C_h` the class sums of `φ`.
pub fn interpolate<T: Real>(sg: &SampleGrid<T>, phi: &ScalingFunction<T>) -> Result<CoeffVector<T>> {
    let m = phi.matrix();
    if sg.matrix() != m {
        return Err(Error::IndexMismatch);
    }
    let plan = LatticeFft::new(m)?;
    let shat = plan.forward(sg.values())?;
    let sums = class_sums(phi.spectrum(), m)?;
    let mf = T::from_usize_lossy(plan.len());
    let tol = T::lit(Tolerances::DEFAULT.class_power);
    let mut ahat = Vec::with_capacity(shat.len());
    for (class, (s, c)) in shat.iter().zip(&sums).enumerate() {
        if c.norm() <= tol {
            return Err(Error::DegenerateClass { class, power: c.norm().to_f64_lossy() });
        }
        ahat.push(s / (c * mf));
    }
    PatternVector::new(m.clone(), plan.inverse(&ahat)?)
}

/// Orthonormal filters of one step with the transforms of both levels.
pub struct FilterStep<T: Real> {
    filters: LevelFilters<T>,
    fine: LatticeFft<T>,
    coarse: LatticeFft<T>,
}

impl<T: Real> FilterStep<T> {
    pub fn new(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<Self> {
        Self::from_filters(orthonormal_filters(chain, l, g)?)
    }

    pub fn from_filters(filters: LevelFilters<T>) -> Result<Self> {
        Ok(FilterStep {
            fine: LatticeFft::new(filters.a.matrix())?,
            coarse: LatticeFft::new(&filters.coarse_classes.matrix().transpose())?,
            filters,
        })
    }

    pub fn filters(&self) -> &LevelFilters<T> {
        &self.filters
    }

    pub fn fine_matrix(&self) -> &IntMat {
        self.fine.matrix()
    }

    pub fn coarse_matrix(&self) -> &IntMat {
        self.coarse.matrix()
    }

    /// Projections onto `V_{M_l}` and `W_{M_l}`:
    /// `d̂_k = ½ sum_{h ∈ k} conj(η̂_h) â_h` for `η̂ = â'`, `b̂'`.
    pub fn decompose(&self, a: &CoeffVector<T>) -> Result<(CoeffVector<T>, CoeffVector<T>)> {
        if a.matrix() != self.fine_matrix() {
            return Err(Error::IndexMismatch);
        }
        let ahat = self.fine.forward(a.values())?;
        let zero = Complex::new(T::zero(), T::zero());
        let mut dphi = vec![zero; self.coarse.len()];
        let mut dpsi = vec![zero; self.coarse.len()];
        let fa = self.filters.a.values();
        let fb = self.filters.b.values();
        let half = T::lit(0.5);
        for (h, &v) in ahat.iter().enumerate() {
            let k = self.filters.coarse[h];
            dphi[k] = dphi[k] + fa[h].conj() * v * half;
            dpsi[k] = dpsi[k] + fb[h].conj() * v * half;
        }
        let m = self.coarse_matrix().clone();
        Ok((
            PatternVector::new(m.clone(), self.coarse.inverse(&dphi)?)?,
            PatternVector::new(m, self.coarse.inverse(&dpsi)?)?,
        ))
    }

    /// Inverse of [`FilterStep::decompose`]: `â_h = d̂^φ_{[h]} â'_h + d̂^ψ_{[h]} b̂'_h`.
    pub fn reconstruct(&self, dphi: &CoeffVector<T>, dpsi: &CoeffVector<T>) -> Result<CoeffVector<T>> {
        if dphi.matrix() != self.coarse_matrix() || dpsi.matrix() != self.coarse_matrix() {
            return Err(Error::IndexMismatch);
        }
        let phat = self.coarse.forward(dphi.values())?;
        let qhat = self.coarse.forward(dpsi.values())?;
        let fa = self.filters.a.values();
        let fb = self.filters.b.values();
        let ahat: Vec<Complex<T>> = (0..self.fine.len())
            .map(|h| {
                let k = self.filters.coarse[h];
                phat[k] * fa[h] + qhat[k] * fb[h]
            })
            .collect();
        PatternVector::new(self.fine_matrix().clone(), self.fine.inverse(&ahat)?)
    }
}

fn check_pair<T: Real>(phi: &ScalingFunction<T>, psi: &Wavelet<T>) -> Result<()> {
    if !phi.is_normalized() || !psi.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if phi.chain() != psi.chain() || phi.level() != psi.level() || phi.window() != psi.window() {
        return Err(Error::IndexMismatch);
    }
    Ok(())
}

/// One decomposition step from `V_{M_{l+1}}` into `V_{M_l} ⊕ W_{M_l}`, where
/// `l` is the level of the orthonormalized pair `(φ, ψ)`.
pub fn decompose_step<T: Real>(
    a: &CoeffVector<T>,
    phi: &ScalingFunction<T>,
    psi: &Wavelet<T>,
) -> Result<(CoeffVector<T>, CoeffVector<T>)> {
    check_pair(phi, psi)?;
    FilterStep::new(phi.chain(), phi.level(), phi.window())?.decompose(a)
}

/// Inverse of [`decompose_step`].
pub fn reconstruct_step<T: Real>(
    dphi: &CoeffVector<T>,
    dpsi: &CoeffVector<T>,
    phi: &ScalingFunction<T>,
    psi: &Wavelet<T>,
) -> Result<CoeffVector<T>> {
    check_pair(phi, psi)?;
    FilterStep::new(phi.chain(), phi.level(), phi.window())?.reconstruct(dphi, dpsi)
}

/// Filter steps for the lowest `depth` levels below the top of a chain,
/// sharing one evaluation of each raw scaling function.
pub struct FilterBank<T: Real> {
    chain: ChainSpec,
    g: AdmissibleFn<T>,
    /// Raw `φ_l` for `l = n - depth, ..., n`.
    raw: Vec<ScalingFunction<T>>,
    top: ScalingFunction<T>,
    /// `steps[i]` maps level `n - i` to level `n - 1 - i`.
    steps: Vec<FilterStep<T>>,
}

impl<T: Real> FilterBank<T> {
    pub fn new(chain: &ChainSpec, g: &AdmissibleFn<T>, depth: usize) -> Result<Self> {
        chain.require_dyadic()?;
        let n = chain.n();
        if depth > n {
            return Err(Error::LevelOutOfRange { level: depth, n });
        }
        let raw: Vec<ScalingFunction<T>> =
            (n - depth..=n).map(|l| scaling_spectrum(chain, l, g)).collect::<Result<_>>()?;
        let steps = (0..depth)
            .map(|i| FilterStep::from_filters(orthonormal_filters_from(&raw[depth - 1 - i], &raw[depth - i])?))
            .collect::<Result<_>>()?;
        let top = raw[depth].orthonormalize()?;
        Ok(FilterBank { chain: chain.clone(), g: g.clone(), raw, top, steps })
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn window(&self) -> &AdmissibleFn<T> {
        &self.g
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    /// Orthonormalized scaling function of the top level.
    pub fn top_scaling(&self) -> &ScalingFunction<T> {
        &self.top
    }

    /// Step decomposing `V_{M_{l+1}}` into level `l`.
    pub fn step(&self, l: usize) -> Option<&FilterStep<T>> {
        let n = self.chain.n();
        (l < n && n - 1 - l < self.steps.len()).then(|| &self.steps[n - 1 - l])
    }

    /// Orthonormal wavelet of a decomposed level.
    pub fn wavelet(&self, l: usize) -> Result<Wavelet<T>> {
        let step = self.step(l).ok_or(Error::LevelOutOfRange { level: l, n: self.chain.n() })?;
        let fine = self.raw[l + 1 + self.steps.len() - self.chain.n()].orthonormalize()?;
        Wavelet::from_filters(step.filters(), &fine)
    }

    /// Interpolates samples on `P(M_n)` and decomposes them.
    pub fn decompose_samples(&self, sg: &SampleGrid<T>) -> Result<DecompositionResult<T>> {
        self.decompose(&interpolate(sg, &self.top)?)
    }

    /// Fourier series of the wavelet part of level `level`.
    pub fn detail_series(&self, r: &DecompositionResult<T>, level: usize) -> Result<SparseSpectrum<T>> {
        let detail = r.detail(level).ok_or(Error::LevelOutOfRange { level, n: r.chain.n() })?;
        series_of(&detail.coeffs, &self.wavelet(level)?)
    }

    /// Decomposes coefficients on `P(M_n)`.
    pub fn decompose(&self, a: &CoeffVector<T>) -> Result<DecompositionResult<T>> {
        let n = self.chain.n();
        let mut current = a.clone();
        let mut details = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let (dphi, dpsi) = step.decompose(&current)?;
            details.push(Detail { level: n - 1 - i, coeffs: dpsi });
            current = dphi;
        }
        Ok(DecompositionResult { chain: self.chain.clone(), coarse_level: n - self.steps.len(), coarse: current, details })
    }

    /// Inverse of [`FilterBank::decompose`].
    pub fn reconstruct(&self, r: &DecompositionResult<T>) -> Result<CoeffVector<T>> {
        if r.details.len() != self.steps.len() || r.chain != self.chain {
            return Err(Error::IndexMismatch);
        }
        let mut current = r.coarse.clone();
        for (step, detail) in self.steps.iter().zip(&r.details).rev() {
            current = step.reconstruct(&current, &detail.coeffs)?;
        }
        Ok(current)
    }
}

/// Wavelet coefficients on `P(M_level)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Detail<T> {
    pub level: usize,
    pub coeffs: CoeffVector<T>,
}

/// Result of a multilevel decomposition: the coarsest scaling part and one
/// wavelet part per decomposed level, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult<T> {
    pub chain: ChainSpec,
    pub coarse_level: usize,
    pub coarse: CoeffVector<T>,
    pub details: Vec<Detail<T>>,
}

impl<T: Real> DecompositionResult<T> {
    /// Total number of coefficients; equals `m_n` for a dyadic chain.
    pub fn coefficient_count(&self) -> usize {
        self.coarse.len() + self.details.iter().map(|d| d.coeffs.len()).sum::<usize>()
    }

    pub fn detail(&self, level: usize) -> Option<&Detail<T>> {
        self.details.iter().find(|d| d.level == level)
    }

    pub fn energy(&self) -> T {
        self.details.iter().fold(self.coarse.energy(), |acc, d| acc + d.coeffs.energy())
    }
}

/// Interpolates `sg` in the orthonormalized top-level scaling space and
/// decomposes `depth` times.
pub fn decompose_full<T: Real>(sg: &SampleGrid<T>, chain: &ChainSpec, g: &AdmissibleFn<T>, depth: usize) -> Result<DecompositionResult<T>> {
    FilterBank::new(chain, g, depth)?.decompose_samples(sg)
}

/// Fourier series of the wavelet part of level `level`.
pub fn detail_series<T: Real>(r: &DecompositionResult<T>, g: &AdmissibleFn<T>, level: usize) -> Result<SparseSpectrum<T>> {
    let detail = r.detail(level).ok_or(Error::LevelOutOfRange { level, n: r.chain.n() })?;
    let psi = wavelet_spectrum(&r.chain, level, g)?.orthonormalize()?;
    series_of(&detail.coeffs, &psi)
}

/// CSV with the pattern point coordinates and the coefficient per row.
pub fn write_coeff_csv<T: Real, W: Write>(coeffs: &CoeffVector<T>, variant: Variant, mut w: W) -> io::Result<()> {
    let m = coeffs.matrix();
    let points = pattern(m, variant).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
    let header: Vec<String> = (1..=m.dim()).map(|i| format!("y{i}")).collect();
    writeln!(w, "{},re,im", header.join(","))?;
    for (y, c) in points.points().iter().zip(coeffs.values()) {
        let coords: Vec<String> = y.to_f64().iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{},{:.16e},{:.16e}", coords.join(","), c.re.to_f64_lossy(), c.im.to_f64_lossy())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latfft::dft_fast;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example_chain() -> ChainSpec {
        let n = IntMat::from_rows(&[vec![10, -4], vec![6, 4]]).unwrap();
        ChainSpec::new(n, vec![IntMat::jy_shear(1)]).unwrap()
    }

    fn random_coeffs(m: &IntMat, seed: u64) -> CoeffVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m.abs_det() as usize;
        let v = (0..n).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        PatternVector::new(m.clone(), v).unwrap()
    }

    fn max_diff(a: &CoeffVector<f64>, b: &CoeffVector<f64>) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
    }

    #[test]
    fn constant_samples() {
        let m = IntMat::diagonal(&[4, 2]).unwrap();
        let sg = sample(|_: &[f64]| Complex::new(1.0, 0.0), &m).unwrap();
        assert!(sg.values().iter().all(|v| *v == Complex::new(1.0, 0.0)));
    }

    #[test]
    fn character_samples_hit_one_class() {
        let m = IntMat::from_rows(&[vec![10, -4], vec![6, 4]]).unwrap();
        let k0 = [3i64, -2];
        let sg = sample(|x: &[f64]| { let p = k0[0] as f64 * x[0] + k0[1] as f64 * x[1]; Complex::new(p.cos(), p.sin()) }, &m).unwrap();
        let hat = dft_fast(&m, sg.as_pattern_vector()).unwrap();
        let classes = GeneratingSet::new(&m.transpose(), Variant::Symmetric).unwrap();
        let target = classes.class_index(&k0);
        for (h, v) in hat.values().iter().enumerate() {
            let expect = if h == target { 64.0 } else { 0.0 };
            assert!((v - Complex::new(expect, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn interpolation_reproduces_samples() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let phi = scaling_spectrum(&c, 1, &g).unwrap();
        let m = c.level_matrix(1);
        let sg = sample(|x: &[f64]| Complex::new((x[0]).cos() * (2.0 * x[1]).sin() + 0.3, 0.0), m).unwrap();
        let a = interpolate(&sg, &phi).unwrap();
        let back = synthesize(&a, &phi, m).unwrap();
        assert!(back.max_abs_diff(&sg) < 1e-9);
    }

    #[test]
    fn decompose_reconstruct_roundtrip() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let step = FilterStep::new(&c, 0, &g).unwrap();
        let a = random_coeffs(c.level_matrix(1), 5);
        let (p, q) = step.decompose(&a).unwrap();
        assert!((a.energy() - p.energy() - q.energy()).abs() < 1e-10);
        let back = step.reconstruct(&p, &q).unwrap();
        assert!(max_diff(&a, &back) < 1e-10);
    }

    #[test]
    fn projecting_basis_functions() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let phi = scaling_spectrum(&c, 0, &g).unwrap().orthonormalize().unwrap();
        let psi = wavelet_spectrum(&c, 0, &g).unwrap().orthonormalize().unwrap();
        let step = FilterStep::new(&c, 0, &g).unwrap();
        let fine = c.level_matrix(1).clone();
        let a = PatternVector::new(fine.clone(), LatticeFft::new(&fine).unwrap().inverse(step.filters().a.values()).unwrap()).unwrap();
        let (p, q) = decompose_step(&a, &phi, &psi).unwrap();
        assert!(q.values().iter().all(|v| v.norm() < 1e-10));
        assert!((p.values()[0] - Complex::new(1.0, 0.0)).norm() < 1e-10);
        assert!(p.values()[1..].iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn raw_functions_are_rejected() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let phi = scaling_spectrum(&c, 0, &g).unwrap();
        let psi = wavelet_spectrum(&c, 0, &g).unwrap();
        let a = random_coeffs(c.level_matrix(1), 1);
        assert!(matches!(decompose_step(&a, &phi, &psi), Err(Error::NotNormalized)));
    }

    #[test]
    fn multilevel_conserves_count_and_roundtrips() {
        let n = IntMat::from_rows(&[vec![4, 0], vec![0, 4]]).unwrap();
        let c = ChainSpec::new(n, vec![IntMat::jx(), IntMat::jd(), IntMat::jy()]).unwrap();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.05).unwrap();
        let bank = FilterBank::new(&c, &g, 3).unwrap();
        let a = random_coeffs(c.level_matrix(3), 9);
        let r = bank.decompose(&a).unwrap();
        assert_eq!(r.coefficient_count(), 128);
        assert!((r.energy() - a.energy()).abs() < 1e-9);
        assert!(max_diff(&bank.reconstruct(&r).unwrap(), &a) < 1e-9);
    }

    #[test]
    fn depth_zero_is_interpolation() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let sg = sample(|x: &[f64]| Complex::new(x[0].sin(), 0.0), c.level_matrix(1)).unwrap();
        let r = decompose_full(&sg, &c, &g, 0).unwrap();
        assert!(r.details.is_empty());
        assert_eq!(r.coarse.len(), 128);
    }
}
