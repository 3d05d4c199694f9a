//! Directional singularity detection with anisotropic dyadic chains.
//!
//! The test data is a bivariate box spline given by its Fourier
//! coefficients. Its jump lines and their endpoints are known exactly, so a
//! wavelet part rendered on a square grid can be scored by how much of its
//! energy sits near those features.

use num_complex::Complex;
use rayon::prelude::*;

use crate::admissible::AdmissibleFn;
use crate::error::{Error, Result};
use crate::intlat::{ChainSpec, GeneratingSet, IntMat, Variant};
use crate::latfft::LatticeFft;
use crate::scalar::Real;
use crate::transform::{sample_series, FilterBank, SampleGrid};

use std::f64::consts::{PI, TAU};

const SAMPLE_BLOCK: usize = 16;

/// Box spline `B_Ξ` centred at the origin and periodized over `[-π, π)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpline {
    directions: Vec<[f64; 2]>,
}

/// Segment `start + t (end - start)`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl Segment {
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let d = [self.end[0] - self.start[0], self.end[1] - self.start[1]];
        let q = [p[0] - self.start[0], p[1] - self.start[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = if len2 == 0.0 { 0.0 } else { ((q[0] * d[0] + q[1] * d[1]) / len2).clamp(0.0, 1.0) };
        (q[0] - t * d[0]).hypot(q[1] - t * d[1])
    }
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

fn parallel(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] * b[1] - a[1] * b[0]).abs() <= 1e-12 * a[0].hypot(a[1]) * b[0].hypot(b[1])
}

impl BoxSpline {
    pub fn new(directions: Vec<[f64; 2]>) -> Result<Self> {
        if directions.iter().any(|d| d[0] == 0.0 && d[1] == 0.0) {
            return Err(Error::InvalidParameter("box spline direction must be nonzero".into()));
        }
        let spans = directions.iter().any(|a| directions.iter().any(|b| !parallel(*a, *b)));
        if !spans {
            return Err(Error::InvalidParameter("box spline directions must span the plane".into()));
        }
        Ok(BoxSpline { directions })
    }

    /// Directions `{4u e1, 4u e1, u e2, 2u e2, c (1, -1)}`: the diagonal
    /// direction carries twelve parallel jump lines of the third
    /// derivative, equally spaced by `u / sqrt 2`.
    pub fn twelve_lines(u: f64, c: f64) -> Self {
        BoxSpline { directions: vec![[4.0 * u, 0.0], [4.0 * u, 0.0], [0.0, u], [0.0, 2.0 * u], [c, -c]] }
    }

    pub fn directions(&self) -> &[[f64; 2]] {
        &self.directions
    }

    /// `c_k = (2π)^{-2} prod_θ sinc(θ^T k / 2)`.
    pub fn coefficient(&self, k: [f64; 2]) -> f64 {
        self.directions.iter().fold(1.0 / (TAU * TAU), |acc, d| acc * sinc(0.5 * (d[0] * k[0] + d[1] * k[1])))
    }

    fn center(&self) -> [f64; 2] {
        let s = self.directions.iter().fold([0.0, 0.0], |a, d| [a[0] + d[0], a[1] + d[1]]);
        [0.5 * s[0], 0.5 * s[1]]
    }

    /// Samples on the pattern of `m`, folding all coefficients with
    /// `|k|_∞ <= radius` onto `G(M^T)`.
    pub fn sample<T: Real>(&self, m: &IntMat, radius: i64) -> Result<SampleGrid<T>> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: m.dim() });
        }
        let classes = GeneratingSet::new(&m.transpose(), Variant::Symmetric)?;
        let n = classes.len();
        // fixed row blocks summed in order keep the result independent of
        // the thread schedule
        let rows: Vec<i64> = (-radius..=radius).collect();
        let partial: Vec<Vec<f64>> = rows
            .par_chunks(SAMPLE_BLOCK)
            .map(|block| {
                let mut acc = vec![0.0f64; n];
                for &k0 in block {
                    for k1 in -radius..=radius {
                        acc[classes.class_index(&[k0, k1])] += self.coefficient([k0 as f64, k1 as f64]);
                    }
                }
                acc
            })
            .collect();
        let mut sums = vec![0.0f64; n];
        for acc in &partial {
            for (s, a) in sums.iter_mut().zip(acc) {
                *s += a;
            }
        }
        let plan = LatticeFft::<T>::new(m)?;
        let hat: Vec<Complex<T>> = sums.iter().map(|&v| Complex::new(T::lit(v * n as f64), T::zero())).collect();
        SampleGrid::new(m.clone(), plan.inverse(&hat)?)
    }

    /// Jump segments parallel to `dir`: one segment `Σ_S + Z(Ξ ∩ H)` per
    /// subset `S` of the remaining directions whose alternating multiplicity
    /// does not cancel, with `H = span(dir)`.
    pub fn jump_segments(&self, dir: [f64; 2]) -> Vec<Segment> {
        let (inside, rest): (Vec<[f64; 2]>, Vec<[f64; 2]>) = self.directions.iter().partition(|d| parallel(**d, dir));
        if inside.is_empty() {
            return Vec::new();
        }
        let along = inside.iter().fold([0.0, 0.0], |a, d| [a[0] + d[0], a[1] + d[1]]);
        let c = self.center();
        let mut groups: Vec<([f64; 2], i64)> = Vec::new();
        for mask in 0u32..(1 << rest.len()) {
            let mut p = [-c[0], -c[1]];
            for (i, d) in rest.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    p = [p[0] + d[0], p[1] + d[1]];
                }
            }
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            match groups.iter_mut().find(|(q, _)| (q[0] - p[0]).abs() < 1e-9 && (q[1] - p[1]).abs() < 1e-9) {
                Some(g) => g.1 += sign,
                None => groups.push((p, sign)),
            }
        }
        groups
            .into_iter()
            .filter(|(_, w)| *w != 0)
            .map(|(p, _)| Segment { start: p, end: [p[0] + along[0], p[1] + along[1]] })
            .collect()
    }
}

/// Real grid of `size x size` pixels over `[-π, π)^2`; row 0 is the top
/// (largest `x2`), column 0 the left (smallest `x1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SquareImage {
    pub size: usize,
    pub data: Vec<f64>,
}

impl SquareImage {
    /// Rearranges values on the pattern of `diag(R, R)`, `R` even, into pixels.
    pub fn from_grid<T: Real>(sg: &SampleGrid<T>, value: impl Fn(Complex<T>) -> f64) -> Result<Self> {
        let m = sg.matrix();
        let r = m.get(0, 0);
        if m.dim() != 2 || m.get(1, 1) != r || m.get(0, 1) != 0 || m.get(1, 0) != 0 || r <= 0 || r % 2 != 0 {
            return Err(Error::InvalidParameter(format!("render grid must be diag(R, R) with R even, got {m}")));
        }
        let size = r as usize;
        let classes = GeneratingSet::new(m, Variant::Symmetric)?;
        let mut data = vec![0.0; size * size];
        for (k, v) in classes.reps().iter().zip(sg.values()) {
            let col = (k[0] + r / 2) as usize;
            let row = (r / 2 - 1 - k[1]) as usize;
            data[row * size + col] = value(*v);
        }
        Ok(SquareImage { size, data })
    }

    /// Inverse of [`SquareImage::from_grid`]: real samples on `diag(R, R)`.
    pub fn to_grid<T: Real>(&self) -> Result<SampleGrid<T>> {
        let r = self.size as i64;
        if r == 0 || r % 2 != 0 || self.data.len() != self.size * self.size {
            return Err(Error::InvalidParameter(format!("image must be R x R with R even, got size {r}")));
        }
        let m = IntMat::diagonal(&[r, r])?;
        let classes = GeneratingSet::new(&m, Variant::Symmetric)?;
        let values = classes
            .reps()
            .iter()
            .map(|k| {
                let col = (k[0] + r / 2) as usize;
                let row = (r / 2 - 1 - k[1]) as usize;
                Complex::new(T::lit(self.data[row * self.size + col]), T::zero())
            })
            .collect();
        SampleGrid::new(m, values)
    }

    /// Torus coordinates of a pixel.
    pub fn point(&self, row: usize, col: usize) -> [f64; 2] {
        let r = self.size as f64;
        let h = (self.size / 2) as f64;
        [TAU * (col as f64 - h) / r, TAU * (h - 1.0 - row as f64) / r]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Splits the squared values into the part at pixels selected by `near`
    /// and the rest.
    fn split_energy(&self, near: impl Fn([f64; 2]) -> bool + Sync) -> (f64, f64, f64, f64, usize) {
        (0..self.size)
            .into_par_iter()
            .map(|row| {
                let mut acc = (0.0, 0.0, 0.0, 0.0, 0usize);
                for col in 0..self.size {
                    let v = self.data[row * self.size + col];
                    if near(self.point(row, col)) {
                        acc.0 += v * v;
                        acc.2 = f64::max(acc.2, v.abs());
                    } else {
                        acc.1 += v * v;
                        acc.3 = f64::max(acc.3, v.abs());
                        acc.4 += 1;
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0, 0.0, 0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2), a.3.max(b.3), a.4 + b.4))
    }

    /// Energy share and peak-to-background ratio of a feature mask.
    pub fn feature_stats(&self, near: impl Fn([f64; 2]) -> bool + Sync) -> FeatureStats {
        let (inside, outside, peak, _, count) = self.split_energy(near);
        let total = inside + outside;
        let background = if count == 0 { 0.0 } else { (outside / count as f64).sqrt() };
        FeatureStats {
            fraction: if total == 0.0 { 0.0 } else { inside / total },
            peak,
            background_rms: background,
            peak_to_background: if background == 0.0 { f64::INFINITY } else { peak / background },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureStats {
    /// Share of the squared values inside the mask.
    pub fraction: f64,
    pub peak: f64,
    pub background_rms: f64,
    pub peak_to_background: f64,
}

/// Smallest distance from `p` to any periodic image of the segments.
pub fn torus_distance_to_segments(p: [f64; 2], segments: &[Segment]) -> f64 {
    let mut best = f64::INFINITY;
    for s in segments {
        for a in -1..=1 {
            for b in -1..=1 {
                let q = [p[0] + TAU * a as f64, p[1] + TAU * b as f64];
                best = best.min(s.distance(q));
            }
        }
    }
    best
}

/// Smallest distance from `p` to any periodic image of the points.
pub fn torus_distance_to_points(p: [f64; 2], points: &[[f64; 2]]) -> f64 {
    let wrap = |t: f64| {
        let r = t.rem_euclid(TAU);
        if r > PI {
            TAU - r
        } else {
            r
        }
    };
    points.iter().map(|q| wrap(p[0] - q[0]).hypot(wrap(p[1] - q[1]))).fold(f64::INFINITY, f64::min)
}

/// Endpoints of a segment list with duplicates removed.
pub fn segment_endpoints(segments: &[Segment]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::new();
    for s in segments {
        for p in [s.start, s.end] {
            if !out.iter().any(|q| (q[0] - p[0]).abs() < 1e-9 && (q[1] - p[1]).abs() < 1e-9) {
                out.push(p);
            }
        }
    }
    out
}

/// Parameters of the directional detection experiment.
///
/// Both chains end in the square grid `diag(R, R)` on which the data is
/// sampled; their lowest step is the anisotropic one that is inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalSetup {
    /// `N_1 -> M_1 = J_X N_1 -> ... -> diag(R, R)` via `J_Y^3` and `J_D`.
    pub first: ChainSpec,
    /// `N_2 -> M_2 = J_Y N_2 -> ... -> diag(R, R)` via `J_X^3` and `J_D`.
    pub second: ChainSpec,
    pub alpha: f64,
    pub data: BoxSpline,
    /// Line direction watched in the first wavelet part.
    pub line_direction: [f64; 2],
    /// Truncation of the box spline's Fourier series.
    pub radius: i64,
    /// Half-width of the bands around the jump lines.
    pub band: f64,
    /// Radius of the disks around the line endpoints.
    pub disk: f64,
}

impl DirectionalSetup {
    /// `M_1 = [[4s, 4s], [-s/2, s/2]]` and `M_2 = [[s/2, s/2], [-4s, 4s]]`
    /// inside `R = 8s`; `s = 32` gives a 256 x 256 grid with `m_1 = 4096`,
    /// `s = 128` gives 1024 x 1024 with `m_1 = 65536`.
    pub fn with_scale(s: i64) -> Result<Self> {
        if s < 8 || s % 4 != 0 {
            return Err(Error::InvalidParameter(format!("scale {s} must be a multiple of 4, at least 8")));
        }
        let n1 = IntMat::from_rows(&[vec![2 * s, 2 * s], vec![-s / 2, s / 2]])?;
        let n2 = IntMat::from_rows(&[vec![s / 2, s / 2], vec![-2 * s, 2 * s]])?;
        let (jx, jy, jd) = (IntMat::jx(), IntMat::jy(), IntMat::jd());
        let first = ChainSpec::new(n1, vec![jx.clone(), jy.clone(), jy.clone(), jy.clone(), jd.clone()])?;
        let second = ChainSpec::new(n2, vec![jy, jx.clone(), jx.clone(), jx, jd])?;
        let resolution = 32.0 / s as f64;
        Ok(DirectionalSetup {
            first,
            second,
            alpha: 0.1,
            data: BoxSpline::twelve_lines(0.45, 0.9),
            line_direction: [1.0, -1.0],
            radius: 16 * s,
            band: 0.12 * resolution,
            disk: 0.2 * resolution,
        })
    }

    pub fn desk() -> Self {
        Self::with_scale(32).expect("valid scale")
    }

    pub fn full() -> Self {
        Self::with_scale(128).expect("valid scale")
    }

    /// The common top matrix `diag(R, R)`.
    pub fn grid(&self) -> &IntMat {
        self.first.level_matrix(self.first.n())
    }
}

/// Rendered wavelet parts and their scores for one window.
#[derive(Debug, Clone)]
pub struct DirectionalRun {
    pub first_detail: SquareImage,
    pub second_detail: SquareImage,
    /// Bands around the watched jump lines, first wavelet part.
    pub first_lines: FeatureStats,
    /// Disks around the line endpoints, first wavelet part.
    pub first_points: FeatureStats,
    pub second_lines: FeatureStats,
    pub second_points: FeatureStats,
}

/// Samples the box spline on the square grid, decomposes down both chains
/// with window `g` and renders the lowest wavelet parts.
pub fn run_directional<T: Real>(setup: &DirectionalSetup, g: &AdmissibleFn<T>) -> Result<DirectionalRun> {
    let segments = setup.data.jump_segments(setup.line_direction);
    let ends = segment_endpoints(&segments);
    let grid = setup.grid();
    if setup.second.level_matrix(setup.second.n()) != grid {
        return Err(Error::InvalidParameter("both chains must end in the same grid".into()));
    }
    let sg = setup.data.sample::<T>(grid, setup.radius)?;
    let detail = |chain: &ChainSpec| -> Result<SquareImage> {
        let bank = FilterBank::new(chain, g, chain.n())?;
        let r = bank.decompose_samples(&sg)?;
        let values = sample_series(&bank.detail_series(&r, 0)?, grid)?;
        SquareImage::from_grid(&values, |v| v.re.to_f64_lossy())
    };
    let first_detail = detail(&setup.first)?;
    let second_detail = detail(&setup.second)?;
    let band = setup.band;
    let disk = setup.disk;
    let lines = |p: [f64; 2]| torus_distance_to_segments(p, &segments) <= band;
    let points = |p: [f64; 2]| torus_distance_to_points(p, &ends) <= disk;
    Ok(DirectionalRun {
        first_lines: first_detail.feature_stats(lines),
        first_points: first_detail.feature_stats(points),
        second_lines: second_detail.feature_stats(lines),
        second_points: second_detail.feature_stats(points),
        first_detail,
        second_detail,
    })
}

/// The experiment with the de la Vallée Poussin window and the Dirichlet
/// baseline on the same data.
#[derive(Debug, Clone)]
pub struct DirectionalReport {
    pub dvp: DirectionalRun,
    pub dirichlet: DirectionalRun,
    pub segments: Vec<Segment>,
    pub endpoints: Vec<[f64; 2]>,
}

pub fn directional_report(setup: &DirectionalSetup) -> Result<DirectionalReport> {
    let segments = setup.data.jump_segments(setup.line_direction);
    let endpoints = segment_endpoints(&segments);
    let dvp = run_directional(setup, &AdmissibleFn::<f64>::b_alpha(2, setup.alpha)?)?;
    let dirichlet = run_directional(setup, &AdmissibleFn::<f64>::characteristic(2))?;
    Ok(DirectionalReport { dvp, dirichlet, segments, endpoints })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_segments_and_endpoints() {
        let b = BoxSpline::twelve_lines(0.45, 0.9);
        let s = b.jump_segments([1.0, -1.0]);
        assert_eq!(s.len(), 12);
        assert_eq!(segment_endpoints(&s).len(), 24);
        let mut offsets: Vec<f64> = s.iter().map(|seg| seg.start[0] + seg.start[1]).collect();
        offsets.sort_by(f64::total_cmp);
        for w in offsets.windows(2) {
            assert!((w[1] - w[0] - 0.45).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficient_at_zero_is_mean() {
        let b = BoxSpline::twelve_lines(0.45, 0.9);
        assert_eq!(b.coefficient([0.0, 0.0]), 1.0 / (TAU * TAU));
    }

    #[test]
    fn samples_are_finite_and_real() {
        let b = BoxSpline::twelve_lines(0.45, 0.9);
        let m = IntMat::from_rows(&[vec![32, 32], vec![-4, 4]]).unwrap();
        let sg = b.sample::<f64>(&m, 64).unwrap();
        assert!(sg.values().iter().all(|v| v.re.is_finite() && v.im.abs() < 1e-12));
        // the sample mean is the folded coefficient sum over M^T Z^2
        let mean: f64 = sg.values().iter().map(|v| v.re).sum::<f64>() / sg.len() as f64;
        let mut folded = 0.0;
        for k0 in -64i64..=64 {
            for k1 in -64i64..=64 {
                let z = m.transpose().inverse_apply(&crate::intlat::RatVec::from_int(&[k0, k1]));
                if z.is_integral() {
                    folded += b.coefficient([k0 as f64, k1 as f64]);
                }
            }
        }
        assert!((mean - folded).abs() < 1e-14);
    }

    #[test]
    fn image_layout() {
        let m = IntMat::diagonal(&[4, 4]).unwrap();
        let classes = GeneratingSet::new(&m, Variant::Symmetric).unwrap();
        let values = classes.reps().iter().map(|k| Complex::new(k[0] as f64 + 10.0 * k[1] as f64, 0.0)).collect();
        let img = SquareImage::from_grid(&SampleGrid::new(m, values).unwrap(), |v: Complex<f64>| v.re).unwrap();
        // top-left pixel holds k = (-2, 1)
        assert_eq!(img.data[0], -2.0 + 10.0);
        assert_eq!(img.point(0, 0), [-PI, TAU / 4.0]);
        let back = img.to_grid::<f64>().unwrap();
        let again = SquareImage::from_grid(&back, |v: Complex<f64>| v.re).unwrap();
        assert_eq!(again, img);
    }

    #[test]
    fn degenerate_directions_rejected() {
        assert!(BoxSpline::new(vec![[1.0, 0.0], [2.0, 0.0]]).is_err());
        assert!(BoxSpline::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
    }
}
