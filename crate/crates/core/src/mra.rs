//! Finite checks of the multiresolution axioms, orthonormality audits and
//! the chain-reduction predicates for the matrix families
//! `{J_X, J_Y, J_D}` (d = 2) and their higher dimensional analogues.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;

use crate::admissible::AdmissibleFn;
use crate::dlvp::{
    class_pairing, class_powers, orthonormal_filters, phi_op, scaling_spectrum, two_scale, wavelet_spectrum,
    wavelet_two_scale, BasisFunction, SparseSpectrum,
};
use crate::error::{Error, Result};
use crate::intlat::{ChainSpec, GeneratingSet, IntMat, Pattern, Variant};
use crate::latfft::{character, DenseMatrix, SpectrumVector};
use crate::tolerance::Tolerances;
use crate::Real;

/// Result of the basis-property check on one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mr1<T> {
    /// All `m_l` congruence classes carry nonzero power.
    pub dim_ok: bool,
    pub min_class_power: T,
}

/// MR1 for an arbitrary spectrum on the pattern of `m`.
pub fn mr1_of<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<Mr1<T>> {
    let powers = class_powers(s, m)?;
    let tol = T::lit(Tolerances::DEFAULT.class_power);
    let min_class_power = powers.iter().copied().fold(T::infinity(), T::min);
    Ok(Mr1 { dim_ok: powers.iter().all(|&p| p > tol), min_class_power })
}

pub fn verify_mr1<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<Mr1<T>> {
    let phi = scaling_spectrum(chain, l, g)?;
    mr1_of(phi.spectrum(), chain.level_matrix(l))
}

/// `max_k |coarse_k - coeffs_{[k]} fine_k|` over both supports, classes
/// taken mod `fine_m^T`.
pub fn two_scale_residual<T: Real>(
    coarse: &SparseSpectrum<T>,
    fine: &SparseSpectrum<T>,
    coeffs: &SpectrumVector<T>,
    fine_m: &IntMat,
) -> Result<T> {
    if coeffs.matrix() != fine_m {
        return Err(Error::IndexMismatch);
    }
    let classes = GeneratingSet::new(&fine_m.transpose(), Variant::Symmetric)?;
    let keys: Vec<&Vec<i64>> = coarse.keys().chain(fine.keys().filter(|k| !coarse.contains(k))).collect();
    Ok(keys
        .into_iter()
        .map(|k| (coarse.get(k) - coeffs.values()[classes.class_index(k)] * fine.get(k)).norm())
        .fold(T::zero(), T::max))
}

/// Nestedness residual of `φ_l` in `φ_{l+1}` with the closed-form `â`.
pub fn verify_mr2<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<T> {
    let a = two_scale(chain, l, g)?;
    let coarse = scaling_spectrum(chain, l, g)?;
    let fine = scaling_spectrum(chain, l + 1, g)?;
    two_scale_residual(coarse.spectrum(), fine.spectrum(), &a.values, chain.level_matrix(l + 1))
}

/// Wavelet two-scale residual of `ψ_l` in `φ_{l+1}` with the closed-form `b̂`.
pub fn verify_wavelet_two_scale<T: Real>(chain: &ChainSpec, l: usize, g: &AdmissibleFn<T>) -> Result<T> {
    let b = wavelet_two_scale(chain, l, g)?;
    let psi = wavelet_spectrum(chain, l, g)?;
    let fine = scaling_spectrum(chain, l + 1, g)?;
    two_scale_residual(psi.spectrum(), fine.spectrum(), &b.values, chain.level_matrix(l + 1))
}

/// Smallest possible two-scale residual for an arbitrary pair of spectra:
/// per class of `fine_m^T` the least-squares factor is fitted, and the
/// remaining misfit is reported. A positive value proves that no two-scale
/// vector exists, i.e. the spaces are not nested.
pub fn two_scale_defect<T: Real>(coarse: &SparseSpectrum<T>, fine: &SparseSpectrum<T>, fine_m: &IntMat) -> Result<T> {
    let classes = GeneratingSet::new(&fine_m.transpose(), Variant::Symmetric)?;
    let zero = Complex::new(T::zero(), T::zero());
    let mut num = vec![zero; classes.len()];
    let mut den = vec![T::zero(); classes.len()];
    for (k, f) in fine.iter() {
        let i = classes.class_index(k);
        num[i] = num[i] + coarse.get(k) * f.conj();
        den[i] = den[i] + f.norm_sqr();
    }
    let fit: Vec<Complex<T>> =
        num.iter().zip(&den).map(|(&n, &d)| if d > T::zero() { n / d } else { zero }).collect();
    let coeffs = SpectrumVector::new(fine_m.clone(), fit)?;
    two_scale_residual(coarse, fine, &coeffs, fine_m)
}

/// Covered `∞`-ball radius of `supp c(φ_l)` for every level.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportGrowth {
    pub covered: Vec<Option<u64>>,
    pub extent: Vec<u64>,
}

impl SupportGrowth {
    /// Covered radii never shrink from one level to the next.
    pub fn monotone(&self) -> bool {
        self.covered.windows(2).all(|w| w[0] <= w[1])
    }
}

pub fn verify_support_growth<T: Real>(chain: &ChainSpec, g: &AdmissibleFn<T>) -> Result<SupportGrowth> {
    let mut covered = Vec::new();
    let mut extent = Vec::new();
    for l in 0..=chain.n() {
        let phi = scaling_spectrum(chain, l, g)?;
        covered.push(phi.spectrum().covered_radius());
        extent.push(phi.spectrum().support_radius());
    }
    Ok(SupportGrowth { covered, extent })
}

/// Which identity [`check_reduction`] compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMode {
    /// `Φ_J(g, g) = g`.
    Single,
    /// `Φ_J(g, Φ_{J_D}(g, g)) = Φ_J(g, g)`.
    Double,
}

/// Outcome of a function-equality predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionCheck {
    pub holds: bool,
    pub max_deviation: f64,
    /// Point of largest deviation.
    pub witness: [f64; 2],
}

/// Default samples per axis of the equality grid.
pub const REDUCTION_GRID: usize = 512;

/// Sample coordinates for one axis: a uniform grid over `[-h, h]` plus
/// every integer and half-integer translate and dilate of the window's
/// breakpoints that falls inside.
fn axis_samples(breaks: &[f64], h: f64, n: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=n).map(|i| -h + 2.0 * h * i as f64 / n as f64).collect();
    let reach = h.ceil() as i64 + 2;
    for &b in breaks {
        for scale in [0.5, 1.0, 2.0, 4.0] {
            for shift in -2 * reach..=2 * reach {
                let x = scale * (b + shift as f64 * 0.5);
                if x.abs() <= h {
                    pts.push(x);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Grid-and-breakpoint test of the reduction identities.
pub fn check_reduction<T: Real>(g: &AdmissibleFn<T>, j: &IntMat, mode: ReductionMode) -> Result<ReductionCheck> {
    check_reduction_with_grid(g, j, mode, REDUCTION_GRID)
}

pub fn check_reduction_with_grid<T: Real>(
    g: &AdmissibleFn<T>,
    j: &IntMat,
    mode: ReductionMode,
    grid: usize,
) -> Result<ReductionCheck> {
    if g.dim() != 2 || j.dim() != 2 {
        return Err(Error::UnsupportedDimension { expected: 2, found: g.dim().max(j.dim()) });
    }
    let jd = IntMat::jd();
    let hw: Vec<f64> = g.support_halfwidth().iter().map(|x| x.to_f64_lossy()).collect();
    // both sides vanish outside J^T J_D^T supp g (double) or J^T supp g (single)
    let outer = match mode {
        ReductionMode::Single => j.transpose_box(&hw),
        ReductionMode::Double => j.transpose_box(&jd.transpose_box(&hw)),
    };
    let h = outer.iter().copied().fold(0.0, f64::max) + 0.05;
    let breaks: Vec<f64> = {
        let mut b: Vec<f64> = (0..2).flat_map(|i| g.breakpoints(i)).map(|x| x.to_f64_lossy()).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    };
    let xs = axis_samples(&breaks, h, grid);

    let eval_g = |y: &[T]| g.eval(y);
    let phi_jd = |y: &[T]| phi_op(g, &jd, eval_g, y);
    let lhs = |x: &[T]| match mode {
        ReductionMode::Single => phi_op(g, j, eval_g, x),
        ReductionMode::Double => phi_op(g, j, phi_jd, x),
    };
    let rhs = |x: &[T]| match mode {
        ReductionMode::Single => g.eval(x),
        ReductionMode::Double => phi_op(g, j, eval_g, x),
    };
    let (max_deviation, witness) = xs
        .par_iter()
        .map(|&x0| {
            let mut best = (0.0f64, [x0, 0.0]);
            for &x1 in &xs {
                let x = [T::lit(x0), T::lit(x1)];
                let dev = (lhs(&x) - rhs(&x)).abs().to_f64_lossy();
                if dev > best.0 {
                    best = (dev, [x0, x1]);
                }
            }
            best
        })
        .reduce(|| (0.0, [0.0, 0.0]), |a, b| if b.0 > a.0 { b } else { a });
    Ok(ReductionCheck {
        holds: max_deviation < Tolerances::DEFAULT.function_equality,
        max_deviation,
        witness,
    })
}

/// Members of the higher dimensional dilation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMember {
    /// `J_{x_i}`.
    Axis(usize),
    /// `J_{x_i, x_j}`.
    Plane(usize, usize),
}

/// Recognizes `J_{x_i}` and `J_{x_i, x_j}`.
pub fn classify_factor(j: &IntMat) -> Option<FamilyMember> {
    let d = j.dim();
    for i in 0..d {
        if *j == IntMat::axis_doubling(d, i).ok()? {
            return Some(FamilyMember::Axis(i));
        }
        for k in 0..d {
            if k != i && IntMat::plane_rotation(d, i, k).ok().as_ref() == Some(j) {
                return Some(FamilyMember::Plane(i, k));
            }
        }
    }
    None
}

/// Successor condition: a plane factor may only follow an axis factor of
/// one of its two axes or a factor acting on the same plane.
pub fn check_successor_condition(chain: &ChainSpec) -> Result<()> {
    let kinds: Vec<FamilyMember> = chain
        .factors()
        .iter()
        .enumerate()
        .map(|(i, j)| {
            classify_factor(j).ok_or_else(|| {
                Error::InvalidParameter(format!("factor {} ({j}) is not an axis or plane dilation", i + 1))
            })
        })
        .collect::<Result<_>>()?;
    for l in 1..kinds.len() {
        if let FamilyMember::Plane(a, b) = kinds[l] {
            let ok = match kinds[l - 1] {
                FamilyMember::Axis(i) => i == a || i == b,
                FamilyMember::Plane(c, e) => (c == a && e == b) || (c == b && e == a),
            };
            if !ok {
                return Err(Error::ConditionViolated { index: l + 1 });
            }
        }
    }
    Ok(())
}

/// Per-level outcome of [`check_reduction_hd`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReduction {
    pub level: usize,
    /// `φ^{J_{l+1,n}}_{M_l} = φ^{(J_{l+1})}_{M_l}`.
    pub to_single: bool,
    pub single_deviation: f64,
    /// For an axis factor `J_{l+1}`: `φ^{(J_{l+1})}_{M_l} = φ^∅_{M_l}`.
    pub to_empty: Option<bool>,
}

/// Compares full-chain spectra with their one-factor (and, after an axis
/// factor, zero-factor) truncations on every level.
pub fn check_reduction_hd<T: Real>(g: &AdmissibleFn<T>, chain: &ChainSpec) -> Result<Vec<LevelReduction>> {
    if chain.dim() < 3 {
        return Err(Error::UnsupportedDimension { expected: 3, found: chain.dim() });
    }
    check_successor_condition(chain)?;
    let tol = Tolerances::DEFAULT.function_equality;
    let mut out = Vec::new();
    for l in 0..chain.n() {
        let full = scaling_spectrum(&chain.subchain(l, chain.n())?, 0, g)?;
        let single = scaling_spectrum(&chain.subchain(l, l + 1)?, 0, g)?;
        let dev = full.spectrum().max_abs_diff(single.spectrum()).to_f64_lossy();
        let to_empty = match classify_factor(chain.factor(l + 1)) {
            Some(FamilyMember::Axis(_)) => {
                let empty = scaling_spectrum(&chain.subchain(l, l)?, 0, g)?;
                Some(single.spectrum().max_abs_diff(empty.spectrum()).to_f64_lossy() < tol)
            }
            _ => None,
        };
        out.push(LevelReduction { level: l, to_single: dev < tol, single_deviation: dev, to_empty });
    }
    Ok(out)
}

/// `max_k |sum_{g ∈ G(J^T)} |v_{k + N^T g}|^2 - |det J||` for a vector
/// over `G(M^T)`, `M = J N`, grouped by classes of `N^T`.
pub fn audit_orthonormality<T: Real>(v: &SpectrumVector<T>, coarse: &IntMat) -> Result<T> {
    let fine = v.matrix();
    let fine_classes = GeneratingSet::new(&fine.transpose(), Variant::Symmetric)?;
    let coarse_classes = GeneratingSet::new(&coarse.transpose(), Variant::Symmetric)?;
    let mut sums = vec![T::zero(); coarse_classes.len()];
    for (h, c) in fine_classes.reps().iter().zip(v.values()) {
        let i = coarse_classes.class_index(h);
        sums[i] = sums[i] + c.norm_sqr();
    }
    let ratio = T::lit(fine.abs_det() as f64 / coarse.abs_det() as f64);
    Ok(sums.into_iter().map(|s| (s - ratio).abs()).fold(T::zero(), T::max))
}

/// `max_k |sum_{g ∈ G(J^T)} conj(a) b|` over coarse classes: orthogonality
/// of the two generated spaces.
pub fn audit_cross<T: Real>(a: &SpectrumVector<T>, b: &SpectrumVector<T>, coarse: &IntMat) -> Result<T> {
    let (_, coarse_classes, coarse_idx, _) = class_pairing(coarse, a.matrix())?;
    let mut sums = vec![Complex::new(T::zero(), T::zero()); coarse_classes.len()];
    for (i, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
        sums[coarse_idx[i]] = sums[coarse_idx[i]] + x.conj() * y;
    }
    Ok(sums.into_iter().map(|s| s.norm()).fold(T::zero(), T::max))
}

/// `max_h |m P_h - 1|`: deviation of the translates from orthonormality.
pub fn translate_orthonormality_defect<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<T> {
    let mf = T::lit(m.abs_det() as f64);
    Ok(class_powers(s, m)?.into_iter().map(|p| (mf * p - T::one()).abs()).fold(T::zero(), T::max))
}

/// Gram matrix `<T_y f, T_y' f>` over `P(m)` computed directly from the
/// coefficients, `sum_k |c_k|^2 exp(-2 pi i k^T (y - y'))`.
pub fn gram_matrix<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<DenseMatrix<T>> {
    let p = Pattern::from_generating_set(&GeneratingSet::new(m, Variant::Symmetric)?);
    let n = p.len();
    let coeffs: Vec<(&Vec<i64>, T)> = s.iter().map(|(k, c)| (k, c.norm_sqr())).collect();
    let data: Vec<Complex<T>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (y, yp) = (&p.points()[idx / n], &p.points()[idx % n]);
            coeffs.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (k, w)| {
                acc + (character::<T>(k, y) * character::<T>(k, yp).conj()) * *w
            })
        })
        .collect();
    Ok(DenseMatrix { rows: n, cols: n, data })
}

/// `max |G - I|` of [`gram_matrix`].
pub fn gram_defect<T: Real>(s: &SparseSpectrum<T>, m: &IntMat) -> Result<T> {
    let gm = gram_matrix(s, m)?;
    let mut worst = T::zero();
    for i in 0..gm.rows {
        for j in 0..gm.cols {
            let mut v = gm.get(i, j);
            if i == j {
                v.re = v.re - T::one();
            }
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

/// Per-level record of [`mra_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub m: u64,
    pub mr1_dim_ok: bool,
    pub mr1_min_class_power: f64,
    /// Residual of the step to `l + 1`; `None` on the finest level.
    pub mr2_residual: Option<f64>,
    pub wavelet_residual: Option<f64>,
    pub covered_radius: Option<u64>,
    pub support_extent: u64,
    /// Filter audit after orthonormalization (dyadic steps only).
    pub orthonormality_defect: Option<f64>,
}

/// MR1, MR2 and support growth over a whole chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MraReport {
    pub levels: Vec<LevelRecord>,
    pub dyadic: bool,
}

impl MraReport {
    pub fn monotone_support(&self) -> bool {
        self.levels.windows(2).all(|w| w[0].covered_radius <= w[1].covered_radius)
    }

    pub fn passed(&self) -> bool {
        let t = Tolerances::DEFAULT;
        self.monotone_support()
            && self.levels.iter().all(|r| {
                r.mr1_dim_ok
                    && r.mr2_residual.map_or(true, |x| x < t.two_scale)
                    && r.wavelet_residual.map_or(true, |x| x < t.two_scale)
                    && r.orthonormality_defect.map_or(true, |x| x < t.orthonormality)
            })
    }
}

impl fmt::Display for MraReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
        writeln!(f, "dyadic: {}", self.dyadic)?;
        for r in &self.levels {
            let l = r.level;
            writeln!(f, "level.{l}.m: {}", r.m)?;
            writeln!(f, "level.{l}.mr1_dim_ok: {}", r.mr1_dim_ok)?;
            writeln!(f, "level.{l}.mr1_min_class_power: {:.6e}", r.mr1_min_class_power)?;
            writeln!(f, "level.{l}.mr2_residual: {}", opt(r.mr2_residual))?;
            writeln!(f, "level.{l}.wavelet_residual: {}", opt(r.wavelet_residual))?;
            writeln!(
                f,
                "level.{l}.covered_radius: {}",
                r.covered_radius.map_or("none".to_string(), |v| v.to_string())
            )?;
            writeln!(f, "level.{l}.support_extent: {}", r.support_extent)?;
            writeln!(f, "level.{l}.orthonormality_defect: {}", opt(r.orthonormality_defect))?;
        }
        writeln!(f, "support_monotone: {}", self.monotone_support())?;
        write!(f, "passed: {}", self.passed())
    }
}

pub fn mra_report<T: Real>(chain: &ChainSpec, g: &AdmissibleFn<T>) -> Result<MraReport> {
    let dyadic = chain.is_dyadic();
    let spectra: Vec<SparseSpectrum<T>> =
        (0..=chain.n()).map(|l| scaling_spectrum(chain, l, g).map(|s| s.spectrum().clone())).collect::<Result<_>>()?;
    let mut levels = Vec::new();
    for l in 0..=chain.n() {
        let m = chain.level_matrix(l);
        let mr1 = mr1_of(&spectra[l], m)?;
        let (mr2, wav, orth) = if l < chain.n() {
            let a = two_scale(chain, l, g)?;
            let mr2 = two_scale_residual(&spectra[l], &spectra[l + 1], &a.values, chain.level_matrix(l + 1))?;
            let (wav, orth) = if dyadic {
                let wav = verify_wavelet_two_scale(chain, l, g)?.to_f64_lossy();
                let orth = match orthonormal_filters(chain, l, g) {
                    Ok(filt) => {
                        let da = audit_orthonormality(&filt.a, m)?;
                        let db = audit_orthonormality(&filt.b, m)?;
                        let dc = audit_cross(&filt.a, &filt.b, m)?;
                        Some(da.max(db).max(dc).to_f64_lossy())
                    }
                    Err(Error::DegenerateClass { .. }) => Some(f64::INFINITY),
                    Err(e) => return Err(e),
                };
                (Some(wav), orth)
            } else {
                (None, None)
            };
            (Some(mr2.to_f64_lossy()), wav, orth)
        } else {
            (None, None, None)
        };
        levels.push(LevelRecord {
            level: l,
            m: m.abs_det(),
            mr1_dim_ok: mr1.dim_ok,
            mr1_min_class_power: mr1.min_class_power.to_f64_lossy(),
            mr2_residual: mr2,
            wavelet_residual: wav,
            covered_radius: spectra[l].covered_radius(),
            support_extent: spectra[l].support_radius(),
            orthonormality_defect: orth,
        });
    }
    Ok(MraReport { levels, dyadic })
}

/// Orthonormality defect of a basis function's translates.
pub fn basis_defect<T: Real, B: BasisFunction<T>>(b: &B) -> Result<T> {
    translate_orthonormality_defect(b.spectrum(), b.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_chain() -> ChainSpec {
        let n = IntMat::from_rows(&[vec![10, -4], vec![6, 4]]).unwrap();
        ChainSpec::new(n, vec![IntMat::jy_shear(1)]).unwrap()
    }

    #[test]
    fn dirichlet_class_power() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::characteristic(2);
        for l in 0..=1 {
            let mr1 = verify_mr1(&c, l, &g).unwrap();
            assert!(mr1.dim_ok);
            let m = c.level_matrix(l).abs_det() as f64;
            // (1/sqrt m)^2 rounds in the last place
            assert!((mr1.min_class_power * m - 1.0).abs() < 4.0 * f64::EPSILON);
        }
        assert_eq!(verify_mr2(&c, 0, &g).unwrap(), 0.0);
    }

    #[test]
    fn zeroed_class_breaks_mr1() {
        let m = IntMat::diagonal(&[2, 1]).unwrap();
        let s = SparseSpectrum::from_pairs(2, [(vec![0, 0], Complex::new(1.0f64, 0.0))]);
        assert!(!mr1_of(&s, &m).unwrap().dim_ok);
    }

    #[test]
    fn example_report_passes() {
        let r = mra_report(&example_chain(), &AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap()).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.to_string().contains("passed: true"));
    }

    #[test]
    fn support_grows() {
        let mut f = example_chain().factors().to_vec();
        f.extend([IntMat::jd(), IntMat::jx()]);
        let c = ChainSpec::new(example_chain().m0().clone(), f).unwrap();
        let s = verify_support_growth(&c, &AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap()).unwrap();
        assert!(s.monotone());
        let base = ChainSpec::new(IntMat::identity(2), vec![]).unwrap();
        let s = verify_support_growth(&base, &AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap()).unwrap();
        assert_eq!(s.covered, vec![Some(0)]);
    }

    #[test]
    fn raw_filters_are_not_orthonormal() {
        let c = example_chain();
        let a = two_scale(&c, 0, &AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap()).unwrap();
        assert!(audit_orthonormality(&a.values, c.m0()).unwrap() > 0.1);
        let d = two_scale(&c, 0, &AdmissibleFn::<f64>::characteristic(2)).unwrap();
        assert!(audit_orthonormality(&d.values, c.m0()).unwrap() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn orthonormalized_translates() {
        let c = example_chain();
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.1).unwrap();
        let phi = scaling_spectrum(&c, 0, &g).unwrap();
        assert!(basis_defect(&phi).unwrap() > 1e-3);
        assert!(basis_defect(&phi.orthonormalize().unwrap()).unwrap() < 1e-10);
        let psi = wavelet_spectrum(&c, 0, &g).unwrap().orthonormalize().unwrap();
        assert!(basis_defect(&psi).unwrap() < 1e-10);
    }

    #[test]
    fn single_reduction_threshold() {
        let ok = AdmissibleFn::<f64>::b_alpha(2, 1.0 / 6.0).unwrap();
        assert!(check_reduction_with_grid(&ok, &IntMat::jy(), ReductionMode::Single, 128).unwrap().holds);
        let bad = AdmissibleFn::<f64>::b_alpha(2, 0.2).unwrap();
        let r = check_reduction_with_grid(&bad, &IntMat::jy(), ReductionMode::Single, 128).unwrap();
        assert!(!r.holds && r.max_deviation > 1e-3);
    }

    #[test]
    fn reduction_needs_two_dims() {
        let g = AdmissibleFn::<f64>::b_alpha(3, 0.05).unwrap();
        let j = IntMat::axis_doubling(3, 0).unwrap();
        assert!(matches!(check_reduction(&g, &j, ReductionMode::Single), Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn successor_condition() {
        let x3 = IntMat::axis_doubling(3, 2).unwrap();
        let r12 = IntMat::plane_rotation(3, 0, 1).unwrap();
        let c = ChainSpec::new(IntMat::diagonal(&[2, 2, 2]).unwrap(), vec![x3, r12.clone()]).unwrap();
        assert_eq!(check_successor_condition(&c), Err(Error::ConditionViolated { index: 2 }));
        let x1 = IntMat::axis_doubling(3, 0).unwrap();
        let c = ChainSpec::new(IntMat::diagonal(&[2, 2, 2]).unwrap(), vec![x1, r12]).unwrap();
        assert!(check_successor_condition(&c).is_ok());
    }

    #[test]
    fn three_dim_chain_reduces() {
        let x1 = IntMat::axis_doubling(3, 0).unwrap();
        let r12 = IntMat::plane_rotation(3, 0, 1).unwrap();
        let c = ChainSpec::new(IntMat::diagonal(&[4, 4, 4]).unwrap(), vec![x1, r12]).unwrap();
        let flags = check_reduction_hd(&AdmissibleFn::<f64>::b_alpha(3, 0.05).unwrap(), &c).unwrap();
        assert!(flags.iter().all(|f| f.to_single && f.to_empty != Some(false)));
    }
}
