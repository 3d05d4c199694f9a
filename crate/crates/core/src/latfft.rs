//! Discrete Fourier transform with respect to a regular integer matrix.
//!
//! Vectors on the pattern `P(M)` and spectra on `G(M^T)` are stored in the
//! canonical order of [`GeneratingSet`]. The ordering does not depend on the
//! variant: both `G_S` and `G_I` index the same congruence classes, and
//! `exp(-2 pi i h^T y)` is invariant under `h -> h + M^T z`, `y -> y + z`.
//!
//! The fast transform uses `M = U S V`: with pattern digits `t` (so that
//! `y = M^{-1} U t mod 1`) and `u = V^{-T} h mod S`, the phase becomes
//! `h^T y = sum_i u_i t_i / s_i`, a tensor of cyclic transforms.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::intlat::{smith_normal_form, GeneratingSet, IntMat, Pattern, RatVec, Variant};
use crate::Real;

/// Largest `m` for which [`fourier_matrix`] materializes the matrix.
pub const FOURIER_MATRIX_LIMIT: u64 = 1 << 16;

/// Values indexed by the pattern `P(M)` in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternVector<T> {
    matrix: IntMat,
    values: Vec<Complex<T>>,
}

/// Values indexed by `G(M^T)` in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVector<T> {
    matrix: IntMat,
    values: Vec<Complex<T>>,
}

macro_rules! indexed_vector {
    ($name:ident) => {
        impl<T: Real> $name<T> {
            pub fn new(matrix: IntMat, values: Vec<Complex<T>>) -> Result<Self> {
                if values.len() as u64 != matrix.abs_det() {
                    return Err(Error::IndexMismatch);
                }
                Ok(Self { matrix, values })
            }

            pub fn zeros(matrix: IntMat) -> Self {
                let m = matrix.abs_det() as usize;
                Self { matrix, values: vec![Complex::new(T::zero(), T::zero()); m] }
            }

            pub fn from_real(matrix: IntMat, values: &[T]) -> Result<Self> {
                Self::new(matrix, values.iter().map(|&x| Complex::new(x, T::zero())).collect())
            }

            pub fn matrix(&self) -> &IntMat {
                &self.matrix
            }

            pub fn values(&self) -> &[Complex<T>] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [Complex<T>] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<Complex<T>> {
                self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            /// Sum of squared moduli.
            pub fn energy(&self) -> T {
                self.values.iter().map(|c| c.norm_sqr()).sum()
            }
        }
    };
}

indexed_vector!(PatternVector);
indexed_vector!(SpectrumVector);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    /// `max |(A A^H - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.rows;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex::new(T::zero(), T::zero());
                for k in 0..self.cols {
                    s = s + self.get(i, k) * self.get(j, k).conj();
                }
                if i == j {
                    s.re = s.re - T::one();
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

fn spectrum_set(m: &IntMat) -> Result<GeneratingSet> {
    GeneratingSet::new(&m.transpose(), Variant::Symmetric)
}

/// `exp(-2 pi i h^T y)`, phase reduced exactly.
pub fn character<T: Real>(h: &[i64], y: &RatVec) -> Complex<T> {
    let (num, den) = y.dot_int(h);
    T::unit_root(num, den)
}

/// `F(M)`: entry `(h, y)` is `m^{-1/2} exp(-2 pi i h^T y)`.
pub fn fourier_matrix<T: Real>(m: &IntMat) -> Result<DenseMatrix<T>> {
    let size = m.abs_det();
    if size > FOURIER_MATRIX_LIMIT {
        return Err(Error::TooLarge { m: size, limit: FOURIER_MATRIX_LIMIT });
    }
    let p = Pattern::from_generating_set(&GeneratingSet::new(m, Variant::Symmetric)?);
    let g = spectrum_set(m)?;
    let n = size as usize;
    let scale = T::one() / T::from_usize_lossy(n).sqrt();
    let mut data = Vec::with_capacity(n * n);
    for h in g.reps() {
        for y in p.points() {
            data.push(character::<T>(h, y) * scale);
        }
    }
    Ok(DenseMatrix { rows: n, cols: n, data })
}

/// Naive transform `â_h = sum_y a_y exp(-2 pi i h^T y)`, `O(m^2)`.
pub fn dft<T: Real>(m: &IntMat, a: &PatternVector<T>) -> Result<SpectrumVector<T>> {
    if a.matrix() != m {
        return Err(Error::IndexMismatch);
    }
    let p = Pattern::from_generating_set(&GeneratingSet::new(m, Variant::Symmetric)?);
    let g = spectrum_set(m)?;
    let values = g
        .reps()
        .iter()
        .map(|h| {
            p.points()
                .iter()
                .zip(a.values())
                .fold(Complex::new(T::zero(), T::zero()), |acc, (y, &v)| acc + v * character::<T>(h, y))
        })
        .collect();
    SpectrumVector::new(m.clone(), values)
}

/// Naive inverse `a_y = (1/m) sum_h â_h exp(2 pi i h^T y)`.
pub fn idft_naive<T: Real>(m: &IntMat, ahat: &SpectrumVector<T>) -> Result<PatternVector<T>> {
    if ahat.matrix() != m {
        return Err(Error::IndexMismatch);
    }
    let p = Pattern::from_generating_set(&GeneratingSet::new(m, Variant::Symmetric)?);
    let g = spectrum_set(m)?;
    let inv_m = T::one() / T::from_usize_lossy(p.len());
    let values = p
        .points()
        .iter()
        .map(|y| {
            g.reps()
                .iter()
                .zip(ahat.values())
                .fold(Complex::new(T::zero(), T::zero()), |acc, (h, &v)| acc + v * character::<T>(h, y).conj())
                * inv_m
        })
        .collect();
    PatternVector::new(m.clone(), values)
}

/// Precomputed plan for the SNF-based fast transform of one matrix.
pub struct LatticeFft<T: Real> {
    matrix: IntMat,
    dims: Vec<usize>,
    /// `perm[pos]` is the flat `u`-index of spectrum position `pos`.
    perm: Vec<usize>,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
}

impl<T: Real> LatticeFft<T> {
    pub fn new(m: &IntMat) -> Result<Self> {
        let snf = smith_normal_form(m)?;
        let dims: Vec<usize> = snf.divisors().iter().map(|&s| s as usize).collect();
        let d = dims.len();
        let q = snf.v_inv();
        let g = spectrum_set(m)?;
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let perm = g
            .reps()
            .iter()
            .map(|h| {
                let u = q.apply_transpose(h);
                (0..d).map(|i| u[i].rem_euclid(dims[i] as i64) as usize * strides[i]).sum()
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Ok(LatticeFft { matrix: m.clone(), dims, perm, forward, inverse })
    }

    pub fn matrix(&self) -> &IntMat {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    fn tensor_transform(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        let total = data.len();
        let mut stride = total;
        for (axis, &n) in self.dims.iter().enumerate() {
            stride /= n;
            if n == 1 {
                continue;
            }
            let plan = &plans[axis];
            let mut line = vec![Complex::new(T::zero(), T::zero()); n];
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
            for outer in 0..total / (n * stride) {
                let base = outer * n * stride;
                for r in 0..stride {
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride + r];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, &v) in line.iter().enumerate() {
                        data[base + k * stride + r] = v;
                    }
                }
            }
        }
    }

    /// Forward transform of values in pattern order.
    pub fn forward(&self, a: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if a.len() != self.len() {
            return Err(Error::IndexMismatch);
        }
        let mut work = a.to_vec();
        self.tensor_transform(&mut work, &self.forward);
        Ok(self.perm.iter().map(|&u| work[u]).collect())
    }

    /// Inverse transform, including the `1/m` factor.
    pub fn inverse(&self, ahat: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if ahat.len() != self.len() {
            return Err(Error::IndexMismatch);
        }
        let mut work = vec![Complex::new(T::zero(), T::zero()); ahat.len()];
        for (&u, &v) in self.perm.iter().zip(ahat) {
            work[u] = v;
        }
        self.tensor_transform(&mut work, &self.inverse);
        let inv_m = T::one() / T::from_usize_lossy(work.len());
        work.iter_mut().for_each(|v| *v = *v * inv_m);
        Ok(work)
    }
}

/// Fast transform, equal to [`dft`] up to rounding.
pub fn dft_fast<T: Real>(m: &IntMat, a: &PatternVector<T>) -> Result<SpectrumVector<T>> {
    if a.matrix() != m {
        return Err(Error::IndexMismatch);
    }
    let plan = LatticeFft::new(m)?;
    SpectrumVector::new(m.clone(), plan.forward(a.values())?)
}

/// Inverse of [`dft_fast`].
pub fn idft<T: Real>(m: &IntMat, ahat: &SpectrumVector<T>) -> Result<PatternVector<T>> {
    if ahat.matrix() != m {
        return Err(Error::IndexMismatch);
    }
    let plan = LatticeFft::new(m)?;
    PatternVector::new(m.clone(), plan.inverse(ahat.values())?)
}
