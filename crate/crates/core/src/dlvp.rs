//! De la Vallée Poussin type scaling functions and dyadic wavelets.
//!
//! For a chain `M_l = J_l ... J_1 M_0` and an admissible window `g`, the
//! scaling function on level `l` has Fourier coefficients
//! `c_k = m_l^{-1/2} B_l(M_l^{-T} k)` where `B_n = g` and
//! `B_l(x) = g^{J_{l+1}}(x) B_{l+1}(J_{l+1}^{-T} x)`.
//! The wavelet replaces the periodized factor by its shift by `J^T v` and
//! modulates with `exp(-2 pi i x^T w)`, where `v`, `w` are the nonzero
//! points of `P_I(J^T)` and `P_I(J)`.
//!
//! Every frequency argument `M_l^{-T} k` is formed in exact rationals and
//! stays rational through the recursion, so indicator boundaries are
//! decided exactly.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::admissible::{for_each_in_box, AdmissibleFn};
use crate::error::{Error, Result};
use crate::intlat::{pattern, ChainSpec, GeneratingSet, IntMat, RatVec, Variant};
use crate::latfft::SpectrumVector;
use crate::tolerance::Tolerances;
use crate::Real;

/// Finitely supported Fourier coefficients `k -> c_k`, sorted by `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum<T> {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex<T>>,
    all_real: bool,
}

impl<T: Real> SparseSpectrum<T> {
    pub fn new(dim: usize) -> Self {
        SparseSpectrum { dim, coeffs: BTreeMap::new(), all_real: true }
    }

    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (Vec<i64>, Complex<T>)>) -> Self {
        let mut s = Self::new(dim);
        for (k, c) in pairs {
            s.insert(k, c);
        }
        s
    }

    /// Stores `c` at `k`; values at or below the zero-trim tolerance are
    /// removed instead.
    pub fn insert(&mut self, k: Vec<i64>, c: Complex<T>) {
        debug_assert_eq!(k.len(), self.dim);
        if c.norm() <= T::lit(Tolerances::DEFAULT.zero_trim) {
            self.coeffs.remove(&k);
            return;
        }
        if c.im != T::zero() {
            self.all_real = false;
        }
        self.coeffs.insert(k, c);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn all_real(&self) -> bool {
        self.all_real
    }

    pub fn get(&self, k: &[i64]) -> Complex<T> {
        self.coeffs.get(k).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        self.coeffs.contains_key(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex<T>)> {
        self.coeffs.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.coeffs.keys()
    }

    /// `sum_k |c_k|^2`.
    pub fn energy(&self) -> T {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.values().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// `max_k |self_k - other_k|` over the union of both supports.
    pub fn max_abs_diff(&self, other: &SparseSpectrum<T>) -> T {
        let a = self.coeffs.iter().map(|(k, c)| (c - other.get(k)).norm());
        let b = other.coeffs.iter().filter(|(k, _)| !self.contains(k)).map(|(_, c)| c.norm());
        a.chain(b).fold(T::zero(), T::max)
    }

    /// Largest `r` such that every `k` with `|k|_inf <= r` is stored, or
    /// `None` if `0` itself is missing.
    pub fn covered_radius(&self) -> Option<u64> {
        let mut r = 0u64;
        loop {
            let lo = vec![-(r as i64); self.dim];
            let hi = vec![r as i64; self.dim];
            let mut full = true;
            for_each_in_box(&lo, &hi, |k| {
                if full && k.iter().any(|&x| x.unsigned_abs() == r) && !self.contains(k) {
                    full = false;
                }
            });
            if !full {
                return r.checked_sub(1);
            }
            r += 1;
            if r as usize > self.len() {
                return Some(r - 1);
            }
        }
    }

    /// Largest `|k|_inf` among stored coefficients.
    pub fn support_radius(&self) -> u64 {
        self.coeffs.keys().flat_map(|k| k.iter().map(|x| x.unsigned_abs())).max().unwrap_or(0)
    }

    /// Writes `k1,...,kd,re,im` rows sorted by `k`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|i| format!("k{i}")).chain(["re".into(), "im".into()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for (k, c) in &self.coeffs {
            let idx: Vec<String> = k.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{:.16e},{:.16e}", idx.join(","), c.re.to_f64_lossy(), c.im.to_f64_lossy())?;
        }
        Ok(())
    }

    /// Multiplies every coefficient by `f(class of k)`.
    fn scaled_by_class(&self, classes: &GeneratingSet, factor: &[Complex<T>]) -> SparseSpectrum<T> {
        let mut out = SparseSpectrum::new(self.dim);
        for (k, c) in &self.coeffs {
            out.insert(k.clone(), c * factor[classes.class_index(k)]);
        }
        out
    }
}

/// `sum_k c_k exp(i k^T x)`.
pub fn evaluate_series<T: Real>(s: &SparseSpectrum<T>, x: &[T]) -> Complex<T> {
    s.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (k, c)| {
        let phase = k.iter().zip(x).fold(T::zero(), |a, (&ki, &xi)| a + T::lit(ki as f64) * xi);
        acc + c * Complex::new(phase.cos(), phase.sin())
    })
}

/// Class power sums `P_h = sum_z |c_{h + M^T z}|^2` over `G(M^T)` in
/// canonical order.
pub fn class_powers<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<Vec<T>> {
    let classes = GeneratingSet::new(&m.transpose(), Variant::Symmetric)?;
    let mut p = vec![T::zero(); classes.len()];
    for (k, c) in s.iter() {
        p[classes.class_index(k)] = p[classes.class_index(k)] + c.norm_sqr();
    }
    Ok(p)
}

/// Class sums `C_h = sum_z c_{h + M^T z}` over `G(M^T)` in canonical order.
pub fn class_sums<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<Vec<Complex<T>>> {
    let classes = GeneratingSet::new(&m.transpose(), Variant::Symmetric)?;
    let mut p = vec![Complex::new(T::zero(), T::zero()); classes.len()];
    for (k, c) in s.iter() {
        let i = classes.class_index(k);
        p[i] = p[i] + c;
    }
    Ok(p)
}

/// `Φ_J(g, f2)(x) = g^J(x) f2(J^{-T} x)`.
pub fn phi_op<T: Real>(g: &AdmissibleFn<T>, j: &IntMat, f2: impl Fn(&[T]) -> T, x: &[T]) -> T {
    let inner = f2(&j.inverse_transpose_apply_real(x));
    if inner == T::zero() {
        return T::zero();
    }
    g.periodized_sum(j, x) * inner
}

fn check_window<T: Real>(chain: &ChainSpec, g: &AdmissibleFn<T>) -> Result<()> {
    if g.dim() != chain.dim() {
        return Err(Error::DimensionMismatch { expected: chain.dim(), found: g.dim() });
    }
    Ok(())
}

/// `B_{J_{l+1,n}}(x)` at a rational point.
pub fn eval_b<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>, x: &RatVec) -> T {
    if l == chain.n() {
        return g.eval_rat(x);
    }
    let j = chain.factor(l + 1);
    let inner = eval_b(chain, l + 1, g, &j.inverse_transpose_apply(x));
    if inner == T::zero() {
        return T::zero();
    }
    g.periodized_sum_rat(j, x) * inner
}

/// `B_{J_{l+1,n}}(x)` at a floating point.
pub fn eval_b_real<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>, x: &[T]) -> T {
    if l == chain.n() {
        return g.eval(x);
    }
    let j = chain.factor(l + 1);
    phi_op(g, j, |y| eval_b_real(chain, l + 1, g, y), x)
}

/// Half-widths of a box containing `supp B_{J_{l+1,n}}`.
pub fn support_halfwidths<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Vec<f64> {
    let mut hw: Vec<f64> = g.support_halfwidth().iter().map(|h| h.to_f64_lossy()).collect();
    for level in (l + 1..=chain.n()).rev() {
        hw = chain.factor(level).transpose_box(&hw);
    }
    hw
}

/// Integer frequencies `k` with `M_l^{-T} k` inside the support box of `B_l`.
fn candidate_frequencies<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Vec<Vec<i64>> {
    let hw = support_halfwidths(chain, l, g);
    let kbox = chain.level_matrix(l).transpose_box(&hw);
    let hi: Vec<i64> = kbox.iter().map(|b| (b + 1e-9).floor() as i64).collect();
    let lo: Vec<i64> = hi.iter().map(|h| -h).collect();
    // supp B_l lies in the box of level l and is mapped by J^{-T} into the
    // box of the next level, so most of the k-box can be skipped cheaply
    let boxes: Vec<Vec<f64>> = (l..=chain.n()).map(|level| support_halfwidths(chain, level, g)).collect();
    let ml = chain.level_matrix(l);
    let inside = |k: &[i64]| {
        let mut y = ml.inverse_transpose_apply_real::<f64>(&k.iter().map(|&v| v as f64).collect::<Vec<_>>());
        for (i, b) in boxes.iter().enumerate() {
            if y.iter().zip(b).any(|(v, h)| v.abs() > h + 1e-9) {
                return false;
            }
            if l + i < chain.n() {
                y = chain.factor(l + i + 1).inverse_transpose_apply_real(&y);
            }
        }
        true
    };
    (lo[0]..=hi[0])
        .into_par_iter()
        .flat_map_iter(|k0| {
            let mut out = Vec::new();
            for_each_in_box(&lo[1..], &hi[1..], |rest| {
                let mut k = Vec::with_capacity(rest.len() + 1);
                k.push(k0);
                k.extend_from_slice(rest);
                if inside(&k) {
                    out.push(k);
                }
            });
            out
        })
        .collect()
}

fn inv_sqrt<T: Real>(m: u64) -> T {
    T::one() / T::lit(m as f64).sqrt()
}

/// Scaling function `φ^{J_{l+1,n}}_{M_l}`.
#[derive(Debug, Clone)]
pub struct ScalingFunction<T> {
    chain: ChainSpec,
    level: usize,
    g: AdmissibleFn<T>,
    spectrum: SparseSpectrum<T>,
    normalized: bool,
}

/// Wavelet `ψ^{J_{l+1,n}}_{M_l}` of a dyadic chain.
#[derive(Debug, Clone)]
pub struct Wavelet<T> {
    chain: ChainSpec,
    level: usize,
    g: AdmissibleFn<T>,
    spectrum: SparseSpectrum<T>,
    v: RatVec,
    w: RatVec,
    normalized: bool,
}

/// Common view of scaling functions and wavelets as generators of
/// shift-invariant spaces on `P(M_l)`.
pub trait BasisFunction<T: Real> {
    fn chain(&self) -> &ChainSpec;
    fn level(&self) -> usize;
    fn window(&self) -> &AdmissibleFn<T>;
    fn spectrum(&self) -> &SparseSpectrum<T>;
    fn is_normalized(&self) -> bool;

    /// `M_l`, whose pattern carries the translates.
    fn matrix(&self) -> &IntMat {
        self.chain().level_matrix(self.level())
    }
}

macro_rules! basis_accessors {
    ($t:ident) => {
        impl<T: Real> BasisFunction<T> for $t<T> {
            fn chain(&self) -> &ChainSpec {
                &self.chain
            }
            fn level(&self) -> usize {
                self.level
            }
            fn window(&self) -> &AdmissibleFn<T> {
                &self.g
            }
            fn spectrum(&self) -> &SparseSpectrum<T> {
                &self.spectrum
            }
            fn is_normalized(&self) -> bool {
                self.normalized
            }
        }
    };
}

basis_accessors!(ScalingFunction);
basis_accessors!(Wavelet);

impl<T: Real> ScalingFunction<T> {
    /// Wraps an arbitrary spectrum, e.g. for constructed counterexamples.
    pub fn from_parts(chain: ChainSpec, level: usize, g: AdmissibleFn<T>, spectrum: SparseSpectrum<T>, normalized: bool) -> Self {
        ScalingFunction { chain, level, g, spectrum, normalized }
    }

    /// Divides each congruence class by `sqrt(m P_h)` so that the
    /// translates become orthonormal.
    pub fn orthonormalize(&self) -> Result<ScalingFunction<T>> {
        let m = self.matrix();
        let powers = class_powers(&self.spectrum, m)?;
        let mf = T::lit(m.abs_det() as f64);
        let tol = T::lit(Tolerances::DEFAULT.class_power);
        let mut factor = Vec::with_capacity(powers.len());
        for (class, &p) in powers.iter().enumerate() {
            if p <= tol {
                return Err(Error::DegenerateClass { class, power: p.to_f64_lossy() });
            }
            factor.push(Complex::new(T::one() / (mf * p).sqrt(), T::zero()));
        }
        let classes = GeneratingSet::new(&m.transpose(), Variant::Symmetric)?;
        Ok(ScalingFunction {
            spectrum: self.spectrum.scaled_by_class(&classes, &factor),
            normalized: true,
            ..self.clone()
        })
    }
}

impl<T: Real> Wavelet<T> {
    pub fn v(&self) -> &RatVec {
        &self.v
    }

    pub fn w(&self) -> &RatVec {
        &self.w
    }

    /// Orthonormal wavelet built from the orthonormalized scaling pair
    /// `(φ_l, φ_{l+1})`; see [`orthonormal_filters`].
    pub fn orthonormalize(&self) -> Result<Wavelet<T>> {
        let filters = orthonormal_filters(&self.chain, self.level, &self.g)?;
        let fine = scaling_spectrum(&self.chain, self.level + 1, &self.g)?.orthonormalize()?;
        Wavelet::from_filters(&filters, &fine)
    }

    /// Orthonormal wavelet `c(ψ_l) = b̂' c(φ_{l+1})` from the filters of
    /// level `l` and the orthonormalized `φ_{l+1}`.
    pub fn from_filters(filters: &LevelFilters<T>, fine: &ScalingFunction<T>) -> Result<Wavelet<T>> {
        if !fine.is_normalized() {
            return Err(Error::NotNormalized);
        }
        let l = filters.level;
        if fine.level() != l + 1 || filters.b.matrix() != fine.matrix() {
            return Err(Error::IndexMismatch);
        }
        let (v, w) = wavelet_shift_vectors(fine.chain().factor(l + 1))?;
        Ok(Wavelet {
            chain: fine.chain().clone(),
            level: l,
            g: fine.window().clone(),
            spectrum: apply_two_scale(fine.spectrum(), &filters.b, &filters.fine_classes),
            v,
            w,
            normalized: true,
        })
    }
}

/// Coefficients of a fine spectrum multiplied by a two-scale vector.
fn apply_two_scale<T: Real>(fine: &SparseSpectrum<T>, coeffs: &SpectrumVector<T>, classes: &GeneratingSet) -> SparseSpectrum<T> {
    fine.scaled_by_class(classes, coeffs.values())
}

fn spectrum_from<T: Real>(dim: usize, candidates: Vec<Vec<i64>>, f: impl Fn(&[i64]) -> Complex<T> + Sync) -> SparseSpectrum<T> {
    let pairs: Vec<(Vec<i64>, Complex<T>)> = candidates
        .into_par_iter()
        .filter_map(|k| {
            let c = f(&k);
            (c.norm() > T::lit(Tolerances::DEFAULT.zero_trim)).then_some((k, c))
        })
        .collect();
    SparseSpectrum::from_pairs(dim, pairs)
}

/// Raw scaling function on level `l`.
pub fn scaling_spectrum<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<ScalingFunction<T>> {
    chain.check_level(l)?;
    check_window(chain, g)?;
    let ml = chain.level_matrix(l);
    let scale: T = inv_sqrt(ml.abs_det());
    let spectrum = spectrum_from(chain.dim(), candidate_frequencies(chain, l, g), |k| {
        let x = ml.inverse_transpose_apply(&RatVec::from_int(k));
        Complex::new(scale * eval_b(chain, l, g, &x), T::zero())
    });
    Ok(ScalingFunction { chain: chain.clone(), level: l, g: g.clone(), spectrum, normalized: false })
}

/// Two-scale coefficients over `G(M_{l+1}^T)` in canonical order.
#[derive(Debug, Clone)]
pub struct TwoScaleCoeffs<T> {
    pub level: usize,
    pub values: SpectrumVector<T>,
}

fn require_step(chain: &ChainSpec, l: usize) -> Result<()> {
    if l >= chain.n() {
        return Err(Error::LevelOutOfRange { level: l, n: chain.n() });
    }
    Ok(())
}

/// `â_{l,h} = sqrt|det J_{l+1}| g^{J_{l+1}}(M_l^{-T} h)`.
pub fn two_scale<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<TwoScaleCoeffs<T>> {
    require_step(chain, l)?;
    check_window(chain, g)?;
    let ml = chain.level_matrix(l);
    let fine = chain.level_matrix(l + 1);
    let j = chain.factor(l + 1);
    let root = T::lit(j.abs_det() as f64).sqrt();
    let classes = GeneratingSet::new(&fine.transpose(), Variant::Symmetric)?;
    let values = classes
        .reps()
        .par_iter()
        .map(|h| {
            let x = ml.inverse_transpose_apply(&RatVec::from_int(h));
            Complex::new(root * g.periodized_sum_rat(j, &x), T::zero())
        })
        .collect();
    Ok(TwoScaleCoeffs { level: l, values: SpectrumVector::new(fine.clone(), values)? })
}

/// Nonzero points `v ∈ P_I(J^T)` and `w ∈ P_I(J)` of a dyadic `J`.
pub fn wavelet_shift_vectors(j: &IntMat) -> Result<(RatVec, RatVec)> {
    if j.abs_det() != 2 {
        return Err(Error::NotDyadic { index: 1, det: j.det() });
    }
    let nonzero = |m: &IntMat| -> Result<RatVec> {
        Ok(pattern(m, Variant::Unit)?.points().iter().find(|y| !y.is_zero()).expect("two points").clone())
    };
    Ok((nonzero(&j.transpose())?, nonzero(j)?))
}

/// `B̃_{J_{l+1,n}}(x) = exp(-2 pi i x^T w) sum_z g(x + J^T z - J^T v) B_{l+1}(J^{-T} x)`.
pub fn eval_btilde<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>, x: &RatVec) -> Result<Complex<T>> {
    require_step(chain, l)?;
    chain.require_dyadic()?;
    let j = chain.factor(l + 1);
    let (v, w) = wavelet_shift_vectors(j)?;
    let shift = j.apply_transpose_rat(&v);
    Ok(btilde_with(chain, l, g, x, &w, shift.numerators()))
}

fn btilde_with<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>, x: &RatVec, w: &RatVec, shift: &[i64]) -> Complex<T> {
    let j = chain.factor(l + 1);
    let inner = eval_b(chain, l + 1, g, &j.inverse_transpose_apply(x));
    if inner == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let (num, den) = x.dot(w);
    T::unit_root(num, den) * (g.shifted_periodized_sum_rat(j, x, Some(shift)) * inner)
}

/// Raw wavelet on level `l`.
pub fn wavelet_spectrum<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<Wavelet<T>> {
    require_step(chain, l)?;
    chain.require_dyadic()?;
    check_window(chain, g)?;
    let j = chain.factor(l + 1);
    let (v, w) = wavelet_shift_vectors(j)?;
    let shift = j.apply_transpose_rat(&v);
    let ml = chain.level_matrix(l);
    let scale: T = inv_sqrt(ml.abs_det());
    let spectrum = spectrum_from(chain.dim(), candidate_frequencies(chain, l, g), |k| {
        let x = ml.inverse_transpose_apply(&RatVec::from_int(k));
        btilde_with(chain, l, g, &x, &w, shift.numerators()) * scale
    });
    Ok(Wavelet { chain: chain.clone(), level: l, g: g.clone(), spectrum, v, w, normalized: false })
}

/// `σ_h = exp(-2 pi i h^T M_l^{-1} w_{l+1})` over `G(M_{l+1}^T)`.
pub fn complement_sigma<T: Real>(chain: &ChainSpec, l: usize) -> Result<SpectrumVector<T>> {
    require_step(chain, l)?;
    chain.require_dyadic()?;
    let (_, w) = wavelet_shift_vectors(chain.factor(l + 1))?;
    let ml = chain.level_matrix(l);
    let mw = ml.inverse_apply(&w);
    let fine = chain.level_matrix(l + 1);
    let classes = GeneratingSet::new(&fine.transpose(), Variant::Symmetric)?;
    let values = classes
        .reps()
        .iter()
        .map(|h| {
            let (num, den) = mw.dot_int(h);
            T::unit_root(num, den)
        })
        .collect();
    SpectrumVector::new(fine.clone(), values)
}

/// `b̂_h = sqrt 2 σ_h sum_z g(M_l^{-T} h + J^T z - J^T v)` over `G(M_{l+1}^T)`.
pub fn wavelet_two_scale<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<TwoScaleCoeffs<T>> {
    require_step(chain, l)?;
    chain.require_dyadic()?;
    check_window(chain, g)?;
    let j = chain.factor(l + 1);
    let (v, _) = wavelet_shift_vectors(j)?;
    let shift = j.apply_transpose_rat(&v);
    let sigma = complement_sigma::<T>(chain, l)?;
    let ml = chain.level_matrix(l);
    let fine = chain.level_matrix(l + 1);
    let classes = GeneratingSet::new(&fine.transpose(), Variant::Symmetric)?;
    let root2 = T::lit(2.0).sqrt();
    let values = classes
        .reps()
        .iter()
        .zip(sigma.values())
        .map(|(h, &s)| {
            let x = ml.inverse_transpose_apply(&RatVec::from_int(h));
            s * (root2 * g.shifted_periodized_sum_rat(j, &x, Some(shift.numerators())))
        })
        .collect();
    Ok(TwoScaleCoeffs { level: l, values: SpectrumVector::new(fine.clone(), values)? })
}

/// Orthonormal two-scale data of one dyadic decomposition step.
///
/// For each `h ∈ G(M_{l+1}^T)`, `partner[h]` is the other fine class over
/// the same coarse class and `coarse[h]` the coarse class index in
/// `G(M_l^T)`. The vectors satisfy `|a_h|^2 + |a_h'|^2 = 2`,
/// `b_h = σ_h conj(a_h')` and `c(φ_l) = a c(φ_{l+1})`, `c(ψ_l) = b c(φ_{l+1})`
/// for the orthonormalized functions.
#[derive(Debug, Clone)]
pub struct LevelFilters<T> {
    pub level: usize,
    pub a: SpectrumVector<T>,
    pub b: SpectrumVector<T>,
    pub partner: Vec<usize>,
    pub coarse: Vec<usize>,
    pub fine_classes: GeneratingSet,
    pub coarse_classes: GeneratingSet,
}

/// Pairing of the fine classes `G(M_{l+1}^T)` over the coarse classes
/// `G(M_l^T)` of a dyadic step.
pub fn class_pairing(coarse_m: &IntMat, fine_m: &IntMat) -> Result<(GeneratingSet, GeneratingSet, Vec<usize>, Vec<usize>)> {
    let fine = GeneratingSet::new(&fine_m.transpose(), Variant::Symmetric)?;
    let coarse = GeneratingSet::new(&coarse_m.transpose(), Variant::Symmetric)?;
    let coarse_idx: Vec<usize> = fine.reps().iter().map(|h| coarse.class_index(h)).collect();
    let mut first = vec![usize::MAX; coarse.len()];
    let mut partner = vec![usize::MAX; fine.len()];
    for (i, &c) in coarse_idx.iter().enumerate() {
        if first[c] == usize::MAX {
            first[c] = i;
        } else {
            if partner[first[c]] != usize::MAX {
                return Err(Error::NotDyadic { index: 1, det: (fine.len() / coarse.len()) as i64 });
            }
            partner[first[c]] = i;
            partner[i] = first[c];
        }
    }
    if partner.iter().any(|&p| p == usize::MAX) {
        return Err(Error::NotDyadic { index: 1, det: (fine.len() / coarse.len().max(1)) as i64 });
    }
    Ok((fine, coarse, coarse_idx, partner))
}

/// Orthonormal filters `â'`, `b̂'` for level `l`.
///
/// With `P^l` the class powers of the raw `φ_l`,
/// `â'_h = â_h sqrt(m_{l+1} P^{l+1}_h / (m_l P^l_{[h]}))` and
/// `b̂'_h = σ_h conj(â'_{h'})`, `h'` the partner class of `h`.
pub fn orthonormal_filters<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<LevelFilters<T>> {
    require_step(chain, l)?;
    let coarse = scaling_spectrum(chain, l, g)?;
    let fine = scaling_spectrum(chain, l + 1, g)?;
    orthonormal_filters_from(&coarse, &fine)
}

/// [`orthonormal_filters`] from already computed raw scaling functions of
/// levels `l` and `l + 1` of one chain.
pub fn orthonormal_filters_from<T: Real>(coarse_phi: &ScalingFunction<T>, fine_phi: &ScalingFunction<T>) -> Result<LevelFilters<T>> {
    let chain = coarse_phi.chain();
    let l = coarse_phi.level();
    let g = coarse_phi.window();
    if fine_phi.chain() != chain || fine_phi.level() != l + 1 || fine_phi.window() != g {
        return Err(Error::IndexMismatch);
    }
    if coarse_phi.is_normalized() || fine_phi.is_normalized() {
        return Err(Error::InvalidParameter("filters are derived from the raw scaling functions".into()));
    }
    require_step(chain, l)?;
    chain.require_dyadic()?;
    let coarse_m = chain.level_matrix(l);
    let fine_m = chain.level_matrix(l + 1);
    let (fine_classes, coarse_classes, coarse, partner) = class_pairing(coarse_m, fine_m)?;
    let raw_a = two_scale(chain, l, g)?;
    let sigma = complement_sigma::<T>(chain, l)?;
    let p_fine = class_powers(fine_phi.spectrum(), fine_m)?;
    let p_coarse = class_powers(coarse_phi.spectrum(), coarse_m)?;
    let tol = T::lit(Tolerances::DEFAULT.class_power);
    for (class, &p) in p_coarse.iter().enumerate() {
        if p <= tol {
            return Err(Error::DegenerateClass { class, power: p.to_f64_lossy() });
        }
    }
    for (class, &p) in p_fine.iter().enumerate() {
        if p <= tol {
            return Err(Error::DegenerateClass { class, power: p.to_f64_lossy() });
        }
    }
    let mf = T::lit(fine_m.abs_det() as f64);
    let mc = T::lit(coarse_m.abs_det() as f64);
    let a: Vec<Complex<T>> = raw_a
        .values
        .values()
        .iter()
        .enumerate()
        .map(|(h, &ah)| ah * ((mf * p_fine[h]) / (mc * p_coarse[coarse[h]])).sqrt())
        .collect();
    let b: Vec<Complex<T>> = (0..a.len()).map(|h| sigma.values()[h] * a[partner[h]].conj()).collect();
    Ok(LevelFilters {
        level: l,
        a: SpectrumVector::new(fine_m.clone(), a)?,
        b: SpectrumVector::new(fine_m.clone(), b)?,
        partner,
        coarse,
        fine_classes,
        coarse_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_chain() -> ChainSpec {
        let n = IntMat::from_rows(&[vec![10, -4], vec![6, 4]]).unwrap();
        ChainSpec::new(n, vec![IntMat::jy_shear(1)]).unwrap()
    }

    #[test]
    fn shift_vectors() {
        let (v, w) = wavelet_shift_vectors(&IntMat::jx()).unwrap();
        assert_eq!((v, w), (RatVec::new(vec![1, 0], 2), RatVec::new(vec![1, 0], 2)));
        let (v, w) = wavelet_shift_vectors(&IntMat::jy_shear(1)).unwrap();
        assert_eq!((v, w), (RatVec::new(vec![0, 1], 2), RatVec::new(vec![1, 1], 2)));
        let (v, w) = wavelet_shift_vectors(&IntMat::jd()).unwrap();
        assert_eq!((v, w), (RatVec::new(vec![1, 1], 2), RatVec::new(vec![1, 1], 2)));
        assert!(matches!(wavelet_shift_vectors(&IntMat::diagonal(&[2, 2]).unwrap()), Err(Error::NotDyadic { .. })));
    }

    #[test]
    fn base_level_is_window() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let x = RatVec::new(vec![3, -1], 7);
        assert_eq!(eval_b(&c, 1, &g, &x), g.eval_rat(&x));
    }

    #[test]
    fn plateau_of_example() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let phi = scaling_spectrum(&c, 0, &g).unwrap();
        assert!((phi.spectrum().get(&[0, 0]).re - 0.125).abs() < 1e-15);
        assert!(phi.spectrum().all_real());
    }

    #[test]
    fn two_scale_at_zero() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let a = two_scale(&c, 0, &g).unwrap();
        let idx = a.values.len();
        assert_eq!(idx, 128);
        let classes = GeneratingSet::new(&c.level_matrix(1).transpose(), Variant::Symmetric).unwrap();
        let zero = classes.class_index(&[0, 0]);
        assert!((a.values.values()[zero].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sigma_flips_sign_on_pairs() {
        let c = example_chain();
        let sigma = complement_sigma::<f64>(&c, 0).unwrap();
        let (_, _, _, partner) = class_pairing(c.level_matrix(0), c.level_matrix(1)).unwrap();
        for (h, s) in sigma.values().iter().enumerate() {
            assert!((s.norm() - 1.0).abs() < 1e-15);
            assert!((s + sigma.values()[partner[h]]).norm() < 1e-14);
        }
    }

    #[test]
    fn series_of_constant() {
        let s = SparseSpectrum::from_pairs(2, [(vec![0, 0], Complex::new(1.0f64, 0.0))]);
        assert_eq!(evaluate_series(&s, &[0.3, -1.2]), Complex::new(1.0, 0.0));
    }

    #[test]
    fn csv_layout() {
        let s = SparseSpectrum::from_pairs(2, [(vec![1, -2], Complex::new(0.5f64, 0.0)), (vec![-1, 0], Complex::new(0.25, -1.0))]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k1,k2,re,im");
        assert!(lines[1].starts_with("-1,0,2.5000000000000000e-1,"));
        assert!(lines[2].starts_with("1,-2,"));
    }

    #[test]
    fn zero_trim_on_insert() {
        let mut s = SparseSpectrum::<f64>::new(1);
        s.insert(vec![0], Complex::new(1e-16, 0.0));
        assert!(s.is_empty());
    }

    #[test]
    fn covered_radius_of_box() {
        let mut s = SparseSpectrum::<f64>::new(2);
        for_each_in_box(&[-2, -2], &[2, 2], |k| s.insert(k.to_vec(), Complex::new(1.0, 0.0)));
        s.insert(vec![3, 0], Complex::new(1.0, 0.0));
        assert_eq!(s.covered_radius(), Some(2));
        assert_eq!(SparseSpectrum::<f64>::new(2).covered_radius(), None);
    }
}
