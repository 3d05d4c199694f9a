//! Exact integer lattice algebra.
//!
//! Regular integer matrices, Smith normal form, patterns `P(M)` and
//! generating sets `G(M)` in a canonical order, congruence reduction and
//! dilation chains. No floating point is used anywhere in this module;
//! congruence decisions are always exact.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which fundamental domain the representatives are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Symmetric cube `[-1/2, 1/2)^d`.
    #[default]
    Symmetric,
    /// Unit cube `[0, 1)^d`.
    Unit,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S" | "s" | "symmetric" => Ok(Variant::Symmetric),
            "I" | "i" | "unit" => Ok(Variant::Unit),
            other => Err(Error::Parse(format!("unknown variant `{other}`, expected S or I"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Symmetric => f.write_str("S"),
            Variant::Unit => f.write_str("I"),
        }
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn narrow(x: i128) -> i64 {
    i64::try_from(x).expect("integer overflow in lattice arithmetic")
}

/// Exact determinant by fraction-free (Bareiss) elimination.
///
/// `entries` is row-major `dim x dim`. Zero is a valid result.
pub fn determinant(dim: usize, entries: &[i64]) -> i64 {
    assert_eq!(entries.len(), dim * dim, "determinant of a non-square matrix");
    if dim == 0 {
        return 1;
    }
    let mut a: Vec<i128> = entries.iter().map(|&x| x as i128).collect();
    let n = dim;
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return 0;
            };
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * pivot - a[i * n + k] * a[k * n + j]) / prev;
            }
            a[i * n + k] = 0;
        }
        prev = pivot;
    }
    narrow(sign * a[n * n - 1])
}

/// A regular `d x d` integer matrix with cached exact determinant and adjugate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    dim: usize,
    entries: Vec<i64>,
    det: i64,
    adj: Vec<i64>,
}

impl IntMat {
    /// Builds a regular matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<i64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        let det = determinant(dim, &entries);
        if det == 0 {
            return Err(Error::SingularMatrix);
        }
        let adj = adjugate(dim, &entries);
        Ok(IntMat { dim, entries, det, adj })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1; dim]).expect("identity is regular")
    }

    pub fn diagonal(diag: &[i64]) -> Result<Self> {
        let d = diag.len();
        let mut e = vec![0; d * d];
        for (i, &x) in diag.iter().enumerate() {
            e[i * d + i] = x;
        }
        Self::new(d, e)
    }

    /// `J_X = diag(2, 1)`.
    pub fn jx() -> Self {
        Self::diagonal(&[2, 1]).unwrap()
    }

    /// `J_Y = diag(1, 2)`.
    pub fn jy() -> Self {
        Self::diagonal(&[1, 2]).unwrap()
    }

    /// `J_D = [[1, -1], [1, 1]]`, rotation by pi/4 scaled by sqrt 2.
    pub fn jd() -> Self {
        Self::new(2, vec![1, -1, 1, 1]).unwrap()
    }

    /// Shear `J_X^± = [[2, 0], [±1, 1]]`.
    pub fn jx_shear(sign: i64) -> Self {
        Self::new(2, vec![2, 0, sign.signum(), 1]).unwrap()
    }

    /// Shear `J_Y^± = [[1, ±1], [0, 2]]`.
    pub fn jy_shear(sign: i64) -> Self {
        Self::new(2, vec![1, sign.signum(), 0, 2]).unwrap()
    }

    /// `J_{x_i}`: doubles axis `i` of `Z^d`.
    pub fn axis_doubling(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::InvalidParameter(format!("axis {axis} out of range for d = {dim}")));
        }
        let mut diag = vec![1; dim];
        diag[axis] = 2;
        Self::diagonal(&diag)
    }

    /// `J_{x_i,x_j}`: the `J_D` pattern embedded in the `(x_i, x_j)` plane.
    pub fn plane_rotation(dim: usize, i: usize, j: usize) -> Result<Self> {
        if i >= dim || j >= dim || i == j {
            return Err(Error::InvalidParameter(format!("invalid plane ({i}, {j}) for d = {dim}")));
        }
        let mut e = Self::identity(dim).entries;
        e[i * dim + j] = -1;
        e[j * dim + i] = 1;
        Self::new(dim, e)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn det(&self) -> i64 {
        self.det
    }

    /// `m = |det M|`.
    #[inline]
    pub fn abs_det(&self) -> u64 {
        self.det.unsigned_abs()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut e = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                e[j * d + i] = self.entries[i * d + j];
            }
        }
        Self::new(d, e).expect("transpose of a regular matrix is regular")
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &IntMat) -> Result<IntMat> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rhs.dim });
        }
        let d = self.dim;
        let mut e = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let s: i128 = (0..d).map(|k| self.get(i, k) as i128 * rhs.get(k, j) as i128).sum();
                e[i * d + j] = narrow(s);
            }
        }
        IntMat::new(d, e)
    }

    /// `M k`.
    pub fn apply(&self, k: &[i64]) -> Vec<i64> {
        debug_assert_eq!(k.len(), self.dim);
        (0..self.dim)
            .map(|i| narrow((0..self.dim).map(|j| self.get(i, j) as i128 * k[j] as i128).sum()))
            .collect()
    }

    /// `M^T k`.
    pub fn apply_transpose(&self, k: &[i64]) -> Vec<i64> {
        debug_assert_eq!(k.len(), self.dim);
        (0..self.dim)
            .map(|i| narrow((0..self.dim).map(|j| self.get(j, i) as i128 * k[j] as i128).sum()))
            .collect()
    }

    /// `M x` for a rational vector.
    pub fn apply_rat(&self, x: &RatVec) -> RatVec {
        RatVec::new(self.apply(&x.num), x.den)
    }

    /// `M^T x` for a rational vector.
    pub fn apply_transpose_rat(&self, x: &RatVec) -> RatVec {
        RatVec::new(self.apply_transpose(&x.num), x.den)
    }

    /// `M^{-1} x`, exact.
    pub fn inverse_apply(&self, x: &RatVec) -> RatVec {
        let d = self.dim;
        let num: Vec<i128> = (0..d)
            .map(|i| (0..d).map(|j| self.adj[i * d + j] as i128 * x.num[j] as i128).sum())
            .collect();
        RatVec::from_wide(num, x.den as i128 * self.det as i128)
    }

    /// `M^{-T} x`, exact.
    pub fn inverse_transpose_apply(&self, x: &RatVec) -> RatVec {
        let d = self.dim;
        let num: Vec<i128> = (0..d)
            .map(|i| (0..d).map(|j| self.adj[j * d + i] as i128 * x.num[j] as i128).sum())
            .collect();
        RatVec::from_wide(num, x.den as i128 * self.det as i128)
    }

    /// `M^{-T} x` in floating point.
    pub fn inverse_transpose_apply_real<T: crate::Real>(&self, x: &[T]) -> Vec<T> {
        let d = self.dim;
        let det = T::lit(self.det as f64);
        (0..d)
            .map(|i| {
                (0..d).fold(T::zero(), |acc, j| acc + T::lit(self.adj[j * d + i] as f64) * x[j]) / det
            })
            .collect()
    }

    /// `M^T x` in floating point.
    pub fn apply_transpose_real<T: crate::Real>(&self, x: &[T]) -> Vec<T> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).fold(T::zero(), |acc, j| acc + T::lit(self.get(j, i) as f64) * x[j]))
            .collect()
    }

    /// Row sums of absolute values of `M^T`, i.e. the half-widths of the
    /// bounding box of `M^T [-h, h]` for a box of half-widths `h`.
    pub fn transpose_box(&self, halfwidth: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| (self.get(j, i) as f64).abs() * halfwidth[j]).sum())
            .collect()
    }

    /// Half-widths of the bounding box of `M^{-T}[-h, h]`.
    pub fn inverse_transpose_box(&self, halfwidth: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let det = (self.det as f64).abs();
        (0..d)
            .map(|i| (0..d).map(|j| (self.adj[j * d + i] as f64).abs() * halfwidth[j]).sum::<f64>() / det)
            .collect()
    }
}

fn adjugate(dim: usize, e: &[i64]) -> Vec<i64> {
    if dim == 1 {
        return vec![1];
    }
    let mut adj = vec![0; dim * dim];
    let mut minor = Vec::with_capacity((dim - 1) * (dim - 1));
    for i in 0..dim {
        for j in 0..dim {
            minor.clear();
            for r in (0..dim).filter(|&r| r != i) {
                for c in (0..dim).filter(|&c| c != j) {
                    minor.push(e[r * dim + c]);
                }
            }
            let cof = determinant(dim - 1, &minor);
            // adj = cofactor matrix transposed
            adj[j * dim + i] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    adj
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMat({self})")
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.entries.chunks(self.dim).enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            let parts: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            f.write_str(&parts.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for IntMat {
    type Err = Error;

    /// Parses either a named matrix (`jx`, `jy`, `jd`, `jx+`, `jx-`, `jy+`,
    /// `jy-`) or rows separated by `;` with entries separated by spaces or
    /// commas, e.g. `10 -4; 6 4`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        match t.to_ascii_lowercase().as_str() {
            "jx" | "j_x" => return Ok(IntMat::jx()),
            "jy" | "j_y" => return Ok(IntMat::jy()),
            "jd" | "j_d" => return Ok(IntMat::jd()),
            "jx+" => return Ok(IntMat::jx_shear(1)),
            "jx-" => return Ok(IntMat::jx_shear(-1)),
            "jy+" => return Ok(IntMat::jy_shear(1)),
            "jy-" => return Ok(IntMat::jy_shear(-1)),
            _ => {}
        }
        let rows: Vec<Vec<i64>> = t
            .split(';')
            .map(|row| {
                row.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse::<i64>().map_err(|e| Error::Parse(format!("bad entry `{x}`: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Parse(format!("empty matrix `{s}`")));
        }
        IntMat::from_rows(&rows)
    }
}

/// A rational vector `num / den` with a common positive denominator,
/// kept in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatVec {
    num: Vec<i64>,
    den: i64,
}

impl RatVec {
    pub fn new(num: Vec<i64>, den: i64) -> Self {
        Self::from_wide(num.into_iter().map(|x| x as i128).collect(), den as i128)
    }

    fn from_wide(mut num: Vec<i128>, mut den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        if den < 0 {
            den = -den;
            num.iter_mut().for_each(|x| *x = -*x);
        }
        let g = num.iter().fold(den, |g, &x| gcd(g, x));
        if g > 1 {
            den /= g;
            num.iter_mut().for_each(|x| *x /= g);
        }
        RatVec { num: num.into_iter().map(narrow).collect(), den: narrow(den) }
    }

    pub fn from_int(k: &[i64]) -> Self {
        RatVec { num: k.to_vec(), den: 1 }
    }

    pub fn zero(dim: usize) -> Self {
        RatVec { num: vec![0; dim], den: 1 }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.num.len()
    }

    #[inline]
    pub fn numerators(&self) -> &[i64] {
        &self.num
    }

    #[inline]
    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x == 0)
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    /// `self + z` for an integer vector.
    pub fn add_int(&self, z: &[i64]) -> RatVec {
        let num = self
            .num
            .iter()
            .zip(z)
            .map(|(&a, &b)| a as i128 + b as i128 * self.den as i128)
            .collect();
        RatVec::from_wide(num, self.den as i128)
    }

    /// `self - z` for an integer vector.
    pub fn sub_int(&self, z: &[i64]) -> RatVec {
        let neg: Vec<i64> = z.iter().map(|x| -x).collect();
        self.add_int(&neg)
    }

    /// Exact `self . k` as an unreduced fraction `(num, den)`.
    pub fn dot_int(&self, k: &[i64]) -> (i128, i128) {
        let n: i128 = self.num.iter().zip(k).map(|(&a, &b)| a as i128 * b as i128).sum();
        (n, self.den as i128)
    }

    /// Exact `self . other` as an unreduced fraction `(num, den)`.
    pub fn dot(&self, other: &RatVec) -> (i128, i128) {
        let n: i128 = self.num.iter().zip(&other.num).map(|(&a, &b)| a as i128 * b as i128).sum();
        (n, self.den as i128 * other.den as i128)
    }

    /// Reduction mod 1 into `[0,1)^d` or `[-1/2,1/2)^d`.
    pub fn frac(&self, variant: Variant) -> RatVec {
        let d = self.den as i128;
        let num = self
            .num
            .iter()
            .map(|&a| {
                let a = a as i128;
                match variant {
                    Variant::Unit => a.rem_euclid(d),
                    // y - floor(y + 1/2) with y = a/d: shift by d/2 in units of 1/(2d)
                    Variant::Symmetric => {
                        let shifted = 2 * a + d;
                        let fl = shifted.div_euclid(2 * d);
                        a - fl * d
                    }
                }
            })
            .collect();
        RatVec::from_wide(num, d)
    }

    /// Component `i` as `(numerator, denominator)` in lowest common form.
    pub fn component(&self, i: usize) -> (i64, i64) {
        (self.num[i], self.den)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.num.iter().map(|&a| a as f64 / self.den as f64).collect()
    }

    pub fn to_real<T: crate::Real>(&self) -> Vec<T> {
        let den = T::lit(self.den as f64);
        self.num.iter().map(|&a| T::lit(a as f64) / den).collect()
    }
}

impl fmt::Debug for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, &a) in self.num.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let g = gcd(a as i128, self.den as i128).max(1) as i64;
            let (n, d) = (a / g, self.den / g);
            if d == 1 {
                write!(f, "{n}")?;
            } else {
                write!(f, "{n}/{d}")?;
            }
        }
        f.write_str(")")
    }
}

/// `M = U S V` with unimodular `U`, `V` and `S = diag(s_1, ..., s_d)`,
/// `s_i > 0`, `s_i | s_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithDecomposition {
    u: IntMat,
    diag: Vec<i64>,
    v: IntMat,
    u_inv: IntMat,
    v_inv: IntMat,
}

impl SmithDecomposition {
    pub fn u(&self) -> &IntMat {
        &self.u
    }
    pub fn v(&self) -> &IntMat {
        &self.v
    }
    /// `U^{-1}`.
    pub fn u_inv(&self) -> &IntMat {
        &self.u_inv
    }
    /// `V^{-1}`.
    pub fn v_inv(&self) -> &IntMat {
        &self.v_inv
    }
    /// Elementary divisors `s_1 | s_2 | ... | s_d`.
    pub fn divisors(&self) -> &[i64] {
        &self.diag
    }
    pub fn s(&self) -> IntMat {
        IntMat::diagonal(&self.diag).expect("elementary divisors are nonzero")
    }
}

/// Smith normal form of a regular integer matrix.
pub fn smith_normal_form(m: &IntMat) -> Result<SmithDecomposition> {
    let n = m.dim();
    // invariant: M = U A V and P M Q = A with P = U^{-1}, Q = V^{-1}
    let mut a: Vec<i128> = m.entries().iter().map(|&x| x as i128).collect();
    let id: Vec<i128> = IntMat::identity(n).entries().iter().map(|&x| x as i128).collect();
    let (mut u, mut v, mut p, mut q) = (id.clone(), id.clone(), id.clone(), id);
    let at = |i: usize, j: usize| i * n + j;

    // row_i += c * row_k
    let row_add = |a: &mut [i128], p: &mut [i128], u: &mut [i128], i: usize, k: usize, c: i128| {
        for j in 0..n {
            a[at(i, j)] += c * a[at(k, j)];
            p[at(i, j)] += c * p[at(k, j)];
            u[at(j, k)] -= c * u[at(j, i)];
        }
    };
    // col_j += c * col_k
    let col_add = |a: &mut [i128], q: &mut [i128], v: &mut [i128], j: usize, k: usize, c: i128| {
        for i in 0..n {
            a[at(i, j)] += c * a[at(i, k)];
            q[at(i, j)] += c * q[at(i, k)];
            v[at(k, i)] -= c * v[at(j, i)];
        }
    };
    let row_swap = |a: &mut [i128], p: &mut [i128], u: &mut [i128], i: usize, k: usize| {
        for j in 0..n {
            a.swap(at(i, j), at(k, j));
            p.swap(at(i, j), at(k, j));
            u.swap(at(j, i), at(j, k));
        }
    };
    let col_swap = |a: &mut [i128], q: &mut [i128], v: &mut [i128], j: usize, k: usize| {
        for i in 0..n {
            a.swap(at(i, j), at(i, k));
            q.swap(at(i, j), at(i, k));
            v.swap(at(j, i), at(k, i));
        }
    };

    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    let x = a[at(i, j)];
                    if x != 0 && best.map_or(true, |(bi, bj)| x.abs() < a[at(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return Err(Error::SingularMatrix);
            };
            if bi != t {
                row_swap(&mut a, &mut p, &mut u, bi, t);
            }
            if bj != t {
                col_swap(&mut a, &mut q, &mut v, bj, t);
            }
            let piv = a[at(t, t)];
            let mut clean = true;
            for i in t + 1..n {
                let c = a[at(i, t)] / piv;
                if c != 0 {
                    row_add(&mut a, &mut p, &mut u, i, t, -c);
                }
                if a[at(i, t)] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let c = a[at(t, j)] / piv;
                if c != 0 {
                    col_add(&mut a, &mut q, &mut v, j, t, -c);
                }
                if a[at(t, j)] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: pull an offending row into row t and retry
            let offender = (t + 1..n).find(|&i| (t + 1..n).any(|j| a[at(i, j)] % piv != 0));
            match offender {
                Some(i) => row_add(&mut a, &mut p, &mut u, t, i, 1),
                None => break,
            }
        }
        if a[at(t, t)] < 0 {
            for j in 0..n {
                a[at(t, j)] = -a[at(t, j)];
                p[at(t, j)] = -p[at(t, j)];
                u[at(j, t)] = -u[at(j, t)];
            }
        }
    }

    let to_mat = |x: Vec<i128>| IntMat::new(n, x.into_iter().map(narrow).collect());
    Ok(SmithDecomposition {
        diag: (0..n).map(|i| narrow(a[at(i, i)])).collect(),
        u: to_mat(u)?,
        v: to_mat(v)?,
        u_inv: to_mat(p)?,
        v_inv: to_mat(q)?,
    })
}

/// Integer representatives of `Z^d / M Z^d` in canonical order.
///
/// The canonical order is lexicographic in the digits `t = U^{-1} k mod S`
/// of the Smith decomposition `M = U S V`, first digit most significant.
#[derive(Debug, Clone)]
pub struct GeneratingSet {
    matrix: IntMat,
    variant: Variant,
    snf: SmithDecomposition,
    strides: Vec<usize>,
    reps: Vec<Vec<i64>>,
}

impl GeneratingSet {
    pub fn new(matrix: &IntMat, variant: Variant) -> Result<Self> {
        let snf = smith_normal_form(matrix)?;
        let s = snf.divisors().to_vec();
        let d = matrix.dim();
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * s[i + 1] as usize;
        }
        let m = matrix.abs_det() as usize;
        let mut reps = Vec::with_capacity(m);
        let mut digits = vec![0i64; d];
        for _ in 0..m {
            let k0 = snf.u().apply(&digits);
            let y = matrix.inverse_apply(&RatVec::from_int(&k0)).frac(variant);
            let g = matrix.apply_rat(&y);
            debug_assert!(g.is_integral());
            reps.push(g.num);
            for i in (0..d).rev() {
                digits[i] += 1;
                if digits[i] < s[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        Ok(GeneratingSet { matrix: matrix.clone(), variant, snf, strides, reps })
    }

    pub fn matrix(&self) -> &IntMat {
        &self.matrix
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn snf(&self) -> &SmithDecomposition {
        &self.snf
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[Vec<i64>] {
        &self.reps
    }

    pub fn rep(&self, idx: usize) -> &[i64] {
        &self.reps[idx]
    }

    /// Canonical position of the congruence class of `k` (mod `M Z^d`).
    pub fn class_index(&self, k: &[i64]) -> usize {
        let d = self.matrix.dim();
        let p = self.snf.u_inv();
        let s = self.snf.divisors();
        let mut idx = 0usize;
        for i in 0..d {
            if s[i] == 1 {
                continue;
            }
            let t: i128 = (0..d).map(|j| p.get(i, j) as i128 * k[j] as i128).sum();
            idx += t.rem_euclid(s[i] as i128) as usize * self.strides[i];
        }
        idx
    }

    /// Position of `k` if `k` is one of the stored representatives.
    pub fn position(&self, k: &[i64]) -> Option<usize> {
        let idx = self.class_index(k);
        (self.reps[idx] == k).then_some(idx)
    }

    /// The representative congruent to `k`.
    pub fn reduce(&self, k: &[i64]) -> &[i64] {
        &self.reps[self.class_index(k)]
    }

    /// `k ≡ h` modulo `M Z^d`, decided exactly.
    pub fn congruent(&self, k: &[i64], h: &[i64]) -> bool {
        let diff: Vec<i64> = k.iter().zip(h).map(|(a, b)| a - b).collect();
        self.matrix.inverse_apply(&RatVec::from_int(&diff)).is_integral()
    }
}

/// `G_variant(M)`.
pub fn generating_set(m: &IntMat, variant: Variant) -> Result<GeneratingSet> {
    GeneratingSet::new(m, variant)
}

/// The unique `h` in `G_variant(M^T)` with `k - h ∈ M^T Z^d`.
pub fn reduce_mod(m: &IntMat, k: &[i64], variant: Variant) -> Result<Vec<i64>> {
    if k.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: k.len() });
    }
    let g = GeneratingSet::new(&m.transpose(), variant)?;
    Ok(g.reduce(k).to_vec())
}

/// Sampling pattern `P(M) = M^{-1} G(M)`, ordered like `G(M)`.
#[derive(Debug, Clone)]
pub struct Pattern {
    matrix: IntMat,
    variant: Variant,
    points: Vec<RatVec>,
}

impl Pattern {
    pub fn from_generating_set(g: &GeneratingSet) -> Self {
        let m = g.matrix();
        let points = g.reps().iter().map(|k| m.inverse_apply(&RatVec::from_int(k))).collect();
        Pattern { matrix: m.clone(), variant: g.variant(), points }
    }

    pub fn matrix(&self) -> &IntMat {
        &self.matrix
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn points(&self) -> &[RatVec] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether `y` lies in `M^{-1} Z^d`, i.e. is congruent mod 1 to a point.
    pub fn contains_mod1(&self, y: &RatVec) -> bool {
        self.matrix.apply_rat(y).is_integral()
    }
}

pub fn pattern(m: &IntMat, variant: Variant) -> Result<Pattern> {
    Ok(Pattern::from_generating_set(&GeneratingSet::new(m, variant)?))
}

/// Dilation chain `M_l = J_l ... J_1 M_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSpec {
    m0: IntMat,
    factors: Vec<IntMat>,
    products: Vec<IntMat>,
}

impl ChainSpec {
    pub fn new(m0: IntMat, factors: Vec<IntMat>) -> Result<Self> {
        let d = m0.dim();
        let mut products = vec![m0.clone()];
        for j in &factors {
            if j.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: j.dim() });
            }
            let next = j.mul(products.last().unwrap())?;
            products.push(next);
        }
        Ok(ChainSpec { m0, factors, products })
    }

    pub fn dim(&self) -> usize {
        self.m0.dim()
    }

    /// Number of factors `n`.
    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn m0(&self) -> &IntMat {
        &self.m0
    }

    pub fn factors(&self) -> &[IntMat] {
        &self.factors
    }

    /// `J_l` for `l` in `1..=n`.
    pub fn factor(&self, l: usize) -> &IntMat {
        &self.factors[l - 1]
    }

    /// `M_l` for `l` in `0..=n`.
    pub fn level_matrix(&self, l: usize) -> &IntMat {
        &self.products[l]
    }

    pub fn products(&self) -> &[IntMat] {
        &self.products
    }

    /// `m_l = |det M_l|`.
    pub fn size(&self, l: usize) -> u64 {
        self.products[l].abs_det()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.products.iter().map(IntMat::abs_det).collect()
    }

    /// Every factor has `|det J| = 2`.
    pub fn is_dyadic(&self) -> bool {
        self.factors.iter().all(|j| j.abs_det() == 2)
    }

    pub fn require_dyadic(&self) -> Result<()> {
        match self.factors.iter().position(|j| j.abs_det() != 2) {
            Some(i) => Err(Error::NotDyadic { index: i + 1, det: self.factors[i].det() }),
            None => Ok(()),
        }
    }

    pub fn check_level(&self, l: usize) -> Result<()> {
        if l > self.n() {
            Err(Error::LevelOutOfRange { level: l, n: self.n() })
        } else {
            Ok(())
        }
    }

    /// Chain starting at `M_l` with factors `J_{l+1}, ..., J_k`.
    pub fn subchain(&self, l: usize, k: usize) -> Result<ChainSpec> {
        if l > k || k > self.n() {
            return Err(Error::LevelOutOfRange { level: k, n: self.n() });
        }
        ChainSpec::new(self.products[l].clone(), self.factors[l..k].to_vec())
    }
}

pub fn chain(m0: IntMat, factors: Vec<IntMat>) -> Result<ChainSpec> {
    ChainSpec::new(m0, factors)
}
