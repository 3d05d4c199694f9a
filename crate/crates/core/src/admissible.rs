//! Admissible window functions `g` and their periodizations.
//!
//! All supported functions are tensor products `g(x) = prod_i g_i(x_i)` of
//! one-dimensional windows that are nonnegative, positive on `[-1/2, 1/2)`
//! and form a partition of unity under integer shifts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::intlat::{IntMat, RatVec};
use crate::Real;

/// Highest smoothing order accepted by [`AdmissibleFn::tensor_smoothed`].
/// The Irwin-Hall sum loses accuracy quickly beyond this.
pub const MAX_SMOOTHING_ORDER: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum Kind<T> {
    /// Indicator of the half-open cube `[-1/2, 1/2)^d`.
    CharacteristicQ,
    /// `prod_i b_{alpha_i}(x_i)`: plateau 1, linear ramps of width `2 alpha_i`.
    TensorLinear { alpha: Vec<T> },
    /// `prod_i (chi_{[-1/2,1/2]} * K_{p_i,r})(x_i)` with `K_{p,r}` the centered
    /// B-spline kernel of order `r` supported on `[-p, p]`.
    TensorSmoothed { p: Vec<T>, order: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleFn<T> {
    dim: usize,
    kind: Kind<T>,
}

impl<T: Real> AdmissibleFn<T> {
    pub fn characteristic(dim: usize) -> Self {
        AdmissibleFn { dim, kind: Kind::CharacteristicQ }
    }

    pub fn tensor_linear(alpha: Vec<T>) -> Result<Self> {
        let half = T::lit(0.5);
        if alpha.is_empty() {
            return Err(Error::InvalidParameter("alpha needs at least one axis".into()));
        }
        if let Some(a) = alpha.iter().find(|&&a| !(a >= T::zero() && a <= half)) {
            return Err(Error::InvalidParameter(format!("alpha = {a} outside [0, 1/2]")));
        }
        Ok(AdmissibleFn { dim: alpha.len(), kind: Kind::TensorLinear { alpha } })
    }

    /// `B_alpha` with the same `alpha` on every axis.
    pub fn b_alpha(dim: usize, alpha: T) -> Result<Self> {
        Self::tensor_linear(vec![alpha; dim])
    }

    pub fn tensor_smoothed(p: Vec<T>, order: u32) -> Result<Self> {
        let half = T::lit(0.5);
        if p.is_empty() {
            return Err(Error::InvalidParameter("p needs at least one axis".into()));
        }
        if let Some(x) = p.iter().find(|&&x| !(x >= T::zero() && x < half)) {
            return Err(Error::InvalidParameter(format!("p = {x} outside [0, 1/2)")));
        }
        if !(1..=MAX_SMOOTHING_ORDER).contains(&order) {
            return Err(Error::InvalidParameter(format!(
                "order {order} outside 1..={MAX_SMOOTHING_ORDER}"
            )));
        }
        Ok(AdmissibleFn { dim: p.len(), kind: Kind::TensorSmoothed { p, order } })
    }

    /// Parses `characteristic`, `tensor_linear(alpha = [a1, a2])` or
    /// `tensor_smoothed(p = [p1, p2], order = r)`. A scalar parameter is
    /// broadcast to all `dim` axes; numbers may be written as fractions.
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("missing `)` in `{s}`")))?;
                (s[..i].trim(), inner)
            }
            None => (s, ""),
        };
        let params = parse_params(args)?;
        let get = |key: &str| -> Result<Vec<T>> {
            let raw = params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Parse(format!("`{name}` needs `{key} = ...`")))?;
            let vals = parse_number_list(raw)?;
            let vals = if vals.len() == 1 { vec![vals[0]; dim] } else { vals };
            if vals.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: vals.len() });
            }
            Ok(vals.into_iter().map(T::lit).collect())
        };
        match name {
            "characteristic" | "dirichlet" => Ok(Self::characteristic(dim)),
            "tensor_linear" | "b_alpha" => Self::tensor_linear(get("alpha")?),
            "tensor_smoothed" => {
                let order = params
                    .iter()
                    .find(|(k, _)| k == "order")
                    .map(|(_, v)| v.trim().parse::<u32>())
                    .transpose()
                    .map_err(|e| Error::Parse(format!("bad order: {e}")))?
                    .unwrap_or(2);
                Self::tensor_smoothed(get("p")?, order)
            }
            other => Err(Error::Parse(format!("unknown window `{other}`"))),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &Kind<T> {
        &self.kind
    }

    /// Excess `p_i` of the support beyond the unit cube: `supp g ⊆ Ω_p`.
    pub fn support_box(&self) -> Vec<T> {
        match &self.kind {
            Kind::CharacteristicQ => vec![T::zero(); self.dim],
            Kind::TensorLinear { alpha } => alpha.clone(),
            Kind::TensorSmoothed { p, .. } => p.clone(),
        }
    }

    /// Half-widths `1/2 + p_i` of the support box.
    pub fn support_halfwidth(&self) -> Vec<T> {
        self.support_box().into_iter().map(|p| p + T::lit(0.5)).collect()
    }

    /// Largest `p_i`.
    pub fn max_excess(&self) -> T {
        self.support_box().into_iter().fold(T::zero(), T::max)
    }

    /// One-dimensional factor `g_axis(x)`.
    pub fn eval_1d(&self, axis: usize, x: T) -> T {
        let half = T::lit(0.5);
        match &self.kind {
            Kind::CharacteristicQ => {
                if -half <= x && x < half {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Kind::TensorLinear { alpha } => linear_ramp(alpha[axis], x),
            Kind::TensorSmoothed { p, order } => smoothed(p[axis], *order, x),
        }
    }

    /// One-dimensional factor at the rational point `num / den`; boundary
    /// decisions of the discontinuous windows are made exactly.
    pub fn eval_1d_rat(&self, axis: usize, num: i64, den: i64) -> T {
        let p = match &self.kind {
            Kind::CharacteristicQ => {
                let two = 2 * num as i128;
                let d = den as i128;
                return if -d <= two && two < d { T::one() } else { T::zero() };
            }
            Kind::TensorLinear { alpha } => alpha[axis],
            Kind::TensorSmoothed { p, .. } => p[axis],
        };
        if p == T::zero() {
            let two = (2 * num as i128).abs();
            let d = den as i128;
            return match two.cmp(&d) {
                std::cmp::Ordering::Less => T::one(),
                std::cmp::Ordering::Equal => T::lit(0.5),
                std::cmp::Ordering::Greater => T::zero(),
            };
        }
        self.eval_1d(axis, T::lit(num as f64) / T::lit(den as f64))
    }

    pub fn eval(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim);
        let mut v = T::one();
        for (i, &xi) in x.iter().enumerate() {
            v = v * self.eval_1d(i, xi);
            if v == T::zero() {
                break;
            }
        }
        v
    }

    pub fn eval_rat(&self, x: &RatVec) -> T {
        debug_assert_eq!(x.dim(), self.dim);
        let den = x.denominator();
        let mut v = T::one();
        for (i, &n) in x.numerators().iter().enumerate() {
            v = v * self.eval_1d_rat(i, n, den);
            if v == T::zero() {
                break;
            }
        }
        v
    }

    /// Shifts `z` with `x + J^T z` possibly inside the support box.
    fn periodization_shifts(&self, j: &IntMat, x: &[f64]) -> Vec<Vec<i64>> {
        let hw: Vec<f64> = self.support_halfwidth().iter().map(|h| h.to_f64_lossy()).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let center = j.inverse_transpose_apply_real(&neg);
        let spread = j.inverse_transpose_box(&hw);
        let lo: Vec<i64> = center.iter().zip(&spread).map(|(c, s)| (c - s - 1e-9).floor() as i64).collect();
        let hi: Vec<i64> = center.iter().zip(&spread).map(|(c, s)| (c + s + 1e-9).ceil() as i64).collect();
        let mut out = Vec::new();
        for_each_in_box(&lo, &hi, |z| out.push(z.to_vec()));
        out
    }

    /// `g^J(x) = sum_z g(x + J^T z)`.
    pub fn periodized_sum(&self, j: &IntMat, x: &[T]) -> T {
        let xf: Vec<f64> = x.iter().map(|v| v.to_f64_lossy()).collect();
        let mut total = T::zero();
        let mut y = vec![T::zero(); x.len()];
        for z in self.periodization_shifts(j, &xf) {
            let shift = j.apply_transpose(&z);
            for i in 0..x.len() {
                y[i] = x[i] + T::lit(shift[i] as f64);
            }
            total = total + self.eval(&y);
        }
        total
    }

    /// Exact-argument version of [`periodized_sum`](Self::periodized_sum).
    pub fn periodized_sum_rat(&self, j: &IntMat, x: &RatVec) -> T {
        self.shifted_periodized_sum_rat(j, x, None)
    }

    /// `sum_z g(x + J^T z - s)` for an optional integer shift `s`.
    pub fn shifted_periodized_sum_rat(&self, j: &IntMat, x: &RatVec, shift: Option<&[i64]>) -> T {
        let x = match shift {
            Some(s) => x.sub_int(s),
            None => x.clone(),
        };
        let mut total = T::zero();
        for z in self.periodization_shifts(j, &x.to_f64()) {
            total = total + self.eval_rat(&x.add_int(&j.apply_transpose(&z)));
        }
        total
    }

    /// Max over `n_samples` random `x ∈ [-1, 1]^d` of `|sum_z g(x + z) - 1|`.
    pub fn check_partition_of_unity(&self, n_samples: usize, seed: u64) -> T {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hw: Vec<f64> = self.support_halfwidth().iter().map(|h| h.to_f64_lossy()).collect();
        let mut worst = T::zero();
        let mut y = vec![T::zero(); self.dim];
        for _ in 0..n_samples {
            let x: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let lo: Vec<i64> = x.iter().zip(&hw).map(|(v, h)| (-v - h).floor() as i64).collect();
            let hi: Vec<i64> = x.iter().zip(&hw).map(|(v, h)| (-v + h).ceil() as i64).collect();
            let mut total = T::zero();
            for_each_in_box(&lo, &hi, |z| {
                for i in 0..self.dim {
                    y[i] = T::lit(x[i] + z[i] as f64);
                }
                total = total + self.eval(&y);
            });
            worst = worst.max((total - T::one()).abs());
        }
        worst
    }

    /// Knot positions of the one-dimensional factor on `axis`: the points
    /// where it fails to be a polynomial.
    pub fn breakpoints(&self, axis: usize) -> Vec<T> {
        let half = T::lit(0.5);
        let p = self.support_box()[axis];
        let mut pts = match &self.kind {
            Kind::CharacteristicQ | Kind::TensorLinear { .. } => vec![half - p, half + p],
            Kind::TensorSmoothed { order, .. } => {
                let h = T::lit(2.0) * p / T::lit(*order as f64);
                (0..=*order).map(|k| half - p + h * T::lit(k as f64)).collect()
            }
        };
        let neg: Vec<T> = pts.iter().map(|&x| -x).collect();
        pts.extend(neg);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }
}

fn linear_ramp<T: Real>(alpha: T, x: T) -> T {
    let half = T::lit(0.5);
    let ax = x.abs();
    if alpha == T::zero() {
        return if ax < half {
            T::one()
        } else if ax == half {
            half
        } else {
            T::zero()
        };
    }
    if ax <= half - alpha {
        T::one()
    } else if ax >= half + alpha {
        T::zero()
    } else {
        (half + alpha - ax) / (alpha + alpha)
    }
}

/// Cumulative distribution of the sum of `r` independent uniforms on [0,1].
fn irwin_hall_cdf<T: Real>(r: u32, u: T) -> T {
    if u <= T::zero() {
        return T::zero();
    }
    let rf = T::lit(r as f64);
    if u >= rf {
        return T::one();
    }
    // use the symmetric tail to keep the alternating sum short
    let half_r = rf * T::lit(0.5);
    let (u, flip) = if u > half_r { (rf - u, true) } else { (u, false) };
    let top = u.floor().to_usize().unwrap_or(0).min(r as usize);
    let mut sum = T::zero();
    let mut binom = 1.0f64;
    for k in 0..=top {
        let term = T::lit(binom) * (u - T::lit(k as f64)).powi(r as i32);
        sum = if k % 2 == 0 { sum + term } else { sum - term };
        binom = binom * (r as f64 - k as f64) / (k as f64 + 1.0);
    }
    let fact: f64 = (1..=r).map(|i| i as f64).product();
    let v = sum / T::lit(fact);
    if flip {
        T::one() - v
    } else {
        v
    }
}

fn smoothed<T: Real>(p: T, r: u32, x: T) -> T {
    if p == T::zero() {
        return linear_ramp(T::zero(), x);
    }
    let half = T::lit(0.5);
    let h = (p + p) / T::lit(r as f64);
    let cdf = |t: T| irwin_hall_cdf(r, (t + p) / h);
    cdf(x + half) - cdf(x - half)
}

/// Visits every integer point of the box `lo ..= hi`.
pub fn for_each_in_box(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut z = lo.to_vec();
    loop {
        f(&z);
        let mut i = z.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if z[i] < hi[i] {
                z[i] += 1;
                break;
            }
            z[i] = lo[i];
        }
    }
}

fn parse_params(args: &str) -> Result<Vec<(String, String)>> {
    // split on commas that are not inside brackets
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in args.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    parts.push(cur);
    parts
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected `key = value`, got `{}`", p.trim())))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Parses a decimal or `a/b` fraction.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = |e: String| Error::Parse(format!("bad number `{s}`: {e}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
            let b: f64 = b.trim().parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
            Ok(a / b)
        }
        None => s.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string())),
    }
}

/// Parses `[a, b, ...]` or a single number.
pub fn parse_number_list(s: &str) -> Result<Vec<f64>> {
    let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
    inner.split(',').filter(|x| !x.trim().is_empty()).map(parse_number).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(alpha: f64) -> AdmissibleFn<f64> {
        AdmissibleFn::tensor_linear(vec![alpha]).unwrap()
    }

    #[test]
    fn linear_values() {
        let g = b(0.1);
        assert_eq!(g.eval(&[0.0]), 1.0);
        assert_eq!(g.eval(&[0.4]), 1.0);
        assert!((g.eval(&[0.5]) - 0.5).abs() < 1e-15);
        assert_eq!(g.eval(&[0.6]), 0.0);
        assert!((g.eval(&[0.45]) - 0.75).abs() < 1e-15);
        assert_eq!(b(0.0).eval(&[0.5]), 0.5);
        assert_eq!(b(0.0).eval_1d_rat(0, -1, 2), 0.5);
    }

    #[test]
    fn characteristic_half_open() {
        let g = AdmissibleFn::<f64>::characteristic(2);
        assert_eq!(g.eval(&[-0.5, 0.0]), 1.0);
        assert_eq!(g.eval(&[0.5, 0.0]), 0.0);
        assert_eq!(g.eval_rat(&RatVec::new(vec![-1, 0], 2)), 1.0);
        assert_eq!(g.eval_rat(&RatVec::new(vec![1, 0], 2)), 0.0);
    }

    #[test]
    fn smoothed_order_one_is_linear() {
        let s = AdmissibleFn::tensor_smoothed(vec![0.1], 1).unwrap();
        let l = b(0.1);
        for i in 0..=200 {
            let x = -1.0 + i as f64 * 0.01;
            assert!((s.eval(&[x]) - l.eval(&[x])).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn irwin_hall_matches_known_values() {
        // F_2(u) = u^2/2 on [0,1], 1 - (2-u)^2/2 on [1,2]
        assert!((irwin_hall_cdf(2, 0.5f64) - 0.125).abs() < 1e-15);
        assert!((irwin_hall_cdf(2, 1.5f64) - 0.875).abs() < 1e-15);
        // F_3(1.5) = 1/2 by symmetry
        assert!((irwin_hall_cdf(3, 1.5f64) - 0.5).abs() < 1e-15);
        assert!((irwin_hall_cdf(3, 1.0f64) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn partition_of_unity() {
        assert_eq!(AdmissibleFn::<f64>::characteristic(2).check_partition_of_unity(1000, 1), 0.0);
        assert!(AdmissibleFn::b_alpha(2, 0.1).unwrap().check_partition_of_unity(1000, 2) < 1e-12);
        let s = AdmissibleFn::tensor_smoothed(vec![0.05, 0.05], 3).unwrap();
        assert!(s.check_partition_of_unity(1000, 3) < 1e-10);
    }

    #[test]
    fn support() {
        assert_eq!(b(0.1).support_box(), vec![0.1]);
        assert_eq!(AdmissibleFn::<f64>::characteristic(2).support_box(), vec![0.0, 0.0]);
        let s = AdmissibleFn::<f64>::tensor_smoothed(vec![1.0 / 14.0], 3).unwrap();
        assert!((s.support_halfwidth()[0] - (0.5 + 1.0 / 14.0)).abs() < 1e-15);
    }

    #[test]
    fn periodized_identity_is_one() {
        let g = AdmissibleFn::<f64>::b_alpha(2, 0.2).unwrap();
        let id = IntMat::identity(2);
        for x in [[0.1, 0.3], [-0.7, 0.45], [0.5, 0.5]] {
            assert!((g.periodized_sum(&id, &x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(AdmissibleFn::tensor_linear(vec![0.6]).is_err());
        assert!(AdmissibleFn::tensor_smoothed(vec![0.5], 2).is_err());
        assert!(AdmissibleFn::tensor_smoothed(vec![0.1], 0).is_err());
    }

    #[test]
    fn parse_grammar() {
        let g = AdmissibleFn::<f64>::parse("tensor_linear(alpha = [0.1, 0.1])", 2).unwrap();
        assert_eq!(g, AdmissibleFn::b_alpha(2, 0.1).unwrap());
        let g = AdmissibleFn::<f64>::parse("tensor_smoothed(p = 1/20, order = 3)", 2).unwrap();
        assert_eq!(g, AdmissibleFn::tensor_smoothed(vec![0.05, 0.05], 3).unwrap());
        assert_eq!(AdmissibleFn::<f64>::parse("characteristic", 3).unwrap().dim(), 3);
        assert!(AdmissibleFn::<f64>::parse("gaussian(s = 1)", 2).is_err());
        assert!(AdmissibleFn::<f64>::parse("tensor_linear(alpha = [0.1, 0.1, 0.1])", 2).is_err());
    }

    #[test]
    fn box_iteration() {
        let mut n = 0;
        for_each_in_box(&[-1, 0], &[1, 2], |_| n += 1);
        assert_eq!(n, 9);
        for_each_in_box(&[1], &[0], |_| panic!("empty box"));
    }
}
