//! Vector and frame types, sampled functions on a uniform arc-length grid, and
//! the numerical kernels (differentiation, quadrature, interpolation, RK4)
//! shared by the rest of the crate.

mod interp;
mod ode;
mod stencil;

pub use interp::{lagrange_cubic, CubicSpline, MonotoneCubic};
pub use ode::rk4_step;
pub use stencil::{cumulative_integral, cumulative_integral_runs, derivative, derivative_field, integrate};

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};

pub type Vector3 = nalgebra::Vector3<f64>;

/// Orthonormality tolerance for frames built algebraically.
pub const FRAME_TOL_CONSTRUCTED: f64 = 1e-8;
/// Orthonormality tolerance for frames produced by finite differences.
pub const FRAME_TOL_NUMERIC: f64 = 1e-5;

/// Relative tolerance for the uniform-spacing check.
pub const GRID_TOL: f64 = 1e-12;

pub fn is_finite(v: &Vector3) -> bool {
    v.iter().all(|c| c.is_finite())
}

pub(crate) fn nan_vector() -> Vector3 {
    Vector3::repeat(f64::NAN)
}

/// A moving orthonormal frame `(t, n, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: Vector3,
    pub n: Vector3,
    pub b: Vector3,
}

impl Frame {
    /// Validates orthonormality and handedness within `tol`.
    pub fn new(t: Vector3, n: Vector3, b: Vector3, tol: f64) -> Result<Self> {
        let frame = Frame { t, n, b };
        let deviation = frame.gram_deviation();
        let det = frame.determinant();
        if !deviation.is_finite() || deviation > tol || (det - 1.0).abs() > tol {
            return Err(Error::InvalidFrame { deviation, det });
        }
        Ok(frame)
    }

    pub fn identity() -> Self {
        Frame {
            t: Vector3::x(),
            n: Vector3::y(),
            b: Vector3::z(),
        }
    }

    pub(crate) fn nan() -> Self {
        Frame {
            t: nan_vector(),
            n: nan_vector(),
            b: nan_vector(),
        }
    }

    /// One Gram-Schmidt pass on `(t, n)`; `b` is completed as `t x n`.
    pub fn orthonormalize(t: &Vector3, n: &Vector3) -> Option<Self> {
        let tn = t.norm();
        if !(tn > 0.0) {
            return None;
        }
        let t = t / tn;
        let n = n - t * t.dot(n);
        let nn = n.norm();
        if !(nn > 0.0) {
            return None;
        }
        let n = n / nn;
        let b = t.cross(&n);
        Some(Frame { t, n, b })
    }

    /// Max-norm deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let v = [self.t, self.n, self.b];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v[i].dot(&v[j]) - target).abs());
            }
        }
        if worst.is_nan() {
            f64::INFINITY
        } else {
            worst
        }
    }

    /// Scalar triple product `t . (n x b)`.
    pub fn determinant(&self) -> f64 {
        self.t.dot(&self.n.cross(&self.b))
    }

    pub fn is_finite(&self) -> bool {
        is_finite(&self.t) && is_finite(&self.n) && is_finite(&self.b)
    }

    /// Rotation applied to every axis.
    pub fn rotated(&self, r: &nalgebra::Rotation3<f64>) -> Self {
        Frame {
            t: r * self.t,
            n: r * self.n,
            b: r * self.b,
        }
    }
}

/// Uniform grid `start + i * step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    start: f64,
    step: f64,
    len: usize,
}

impl Grid {
    pub fn uniform(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && step.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        if !(step > 0.0) {
            return Err(Error::NonIncreasingGrid { index: 1 });
        }
        Ok(Grid { start, step, len })
    }

    /// Grid from `len` samples spanning `[start, end]` inclusive.
    pub fn linspace(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: len });
        }
        Self::uniform(start, (end - start) / (len - 1) as f64, len)
    }

    /// Accepts explicit parameter values and checks that they form a uniform grid.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: n });
        }
        for (i, w) in values.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if w[1] <= w[0] {
                return Err(Error::NonIncreasingGrid { index: i + 1 });
            }
        }
        let grid = Self::linspace(values[0], values[n - 1], n)?;
        let scale = values[0].abs().max(values[n - 1].abs()).max(values[n - 1] - values[0]);
        for (i, &v) in values.iter().enumerate() {
            let deviation = (v - grid.at(i)).abs();
            if deviation > GRID_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NonUniformGrid { index: i, deviation });
            }
        }
        Ok(grid)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.at(self.len.saturating_sub(1))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn span(&self) -> f64 {
        self.end() - self.start
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }

    /// Sub-grid over an index range.
    pub fn slice(&self, range: Range<usize>) -> Grid {
        Grid {
            start: self.at(range.start),
            step: self.step,
            len: range.len(),
        }
    }

    /// Same spacing, shifted to a new first sample.
    pub fn with_start(&self, start: f64) -> Grid {
        Grid { start, ..*self }
    }
}

/// Maximal runs of consecutive `true` entries.
pub fn valid_runs(mask: &[bool]) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < mask.len() {
        if mask[i] {
            let start = i;
            while i < mask.len() && mask[i] {
                i += 1;
            }
            runs.push(start..i);
        } else {
            i += 1;
        }
    }
    runs
}

/// Longest run of valid samples (first one on ties).
pub fn longest_run(mask: &[bool]) -> Option<Range<usize>> {
    valid_runs(mask)
        .into_iter()
        .fold(None, |best: Option<Range<usize>>, r| match best {
            Some(b) if b.len() >= r.len() => Some(b),
            _ => Some(r),
        })
}

/// A real function sampled on a uniform grid, with a per-sample validity mask.
///
/// Invalid samples hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl SampledFunction {
    /// Samples are valid exactly where finite.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let mask = values.iter().map(|v| v.is_finite()).collect();
        Self::with_mask(grid, values, mask)
    }

    pub fn with_mask(grid: Grid, mut values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::LengthMismatch {
                grid: grid.len(),
                data: values.len().min(mask.len()),
            });
        }
        for (i, (v, &m)) in values.iter_mut().zip(&mask).enumerate() {
            if m && !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if !m {
                *v = f64::NAN;
            }
        }
        Ok(SampledFunction { grid, values, mask })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|i| f(grid.at(i))).collect();
        let mask = values.iter().map(|v| v.is_finite()).collect();
        SampledFunction { grid, values, mask }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        if self.mask[i] {
            Some(self.values[i])
        } else {
            None
        }
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Iterator over `(index, s, value)` of valid samples.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.len())
            .filter(|&i| self.mask[i])
            .map(|i| (i, self.grid.at(i), self.values[i]))
    }

    /// Pointwise map; the result is invalid wherever `f` returns a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut mask = self.mask.clone();
        let values = self
            .values
            .iter()
            .zip(mask.iter_mut())
            .map(|(&v, m)| {
                if !*m {
                    return f64::NAN;
                }
                let out = f(v);
                if !out.is_finite() {
                    *m = false;
                    return f64::NAN;
                }
                out
            })
            .collect();
        SampledFunction {
            grid: self.grid,
            values,
            mask,
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "zip_with on mismatched grids");
        let mut mask = Vec::with_capacity(self.len());
        let values = (0..self.len())
            .map(|i| {
                if self.mask[i] && other.mask[i] {
                    let v = f(self.values[i], other.values[i]);
                    mask.push(v.is_finite());
                    if v.is_finite() {
                        v
                    } else {
                        f64::NAN
                    }
                } else {
                    mask.push(false);
                    f64::NAN
                }
            })
            .collect();
        SampledFunction {
            grid: self.grid,
            values,
            mask,
        }
    }

    /// Additionally invalidates samples where `keep` is false.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        let mut out = self.clone();
        for (i, &k) in keep.iter().enumerate() {
            if !k {
                out.mask[i] = false;
                out.values[i] = f64::NAN;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.iter_valid().map(|(_, _, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        SampledFunction {
            grid: self.grid.slice(range.clone()),
            values: self.values[range.clone()].to_vec(),
            mask: self.mask[range].to_vec(),
        }
    }

    pub(crate) fn with_grid(mut self, grid: Grid) -> Self {
        debug_assert_eq!(grid.len(), self.len());
        self.grid = grid;
        self
    }
}

/// A vector field sampled on a uniform grid, with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledVectorField {
    grid: Grid,
    vectors: Vec<Vector3>,
    mask: Vec<bool>,
}

impl SampledVectorField {
    pub fn new(grid: Grid, vectors: Vec<Vector3>) -> Result<Self> {
        let mask = vectors.iter().map(is_finite).collect();
        Self::with_mask(grid, vectors, mask)
    }

    pub fn with_mask(grid: Grid, mut vectors: Vec<Vector3>, mask: Vec<bool>) -> Result<Self> {
        if vectors.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::LengthMismatch {
                grid: grid.len(),
                data: vectors.len().min(mask.len()),
            });
        }
        for (i, (v, &m)) in vectors.iter_mut().zip(&mask).enumerate() {
            if m && !is_finite(v) {
                return Err(Error::NonFinite { index: i });
            }
            if !m {
                *v = nan_vector();
            }
        }
        Ok(SampledVectorField { grid, vectors, mask })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Vector3) -> Self {
        let vectors: Vec<Vector3> = (0..grid.len()).map(|i| f(grid.at(i))).collect();
        let mask = vectors.iter().map(is_finite).collect();
        SampledVectorField { grid, vectors, mask }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn vectors(&self) -> &[Vector3] {
        &self.vectors
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Vector3> {
        if self.mask[i] {
            Some(&self.vectors[i])
        } else {
            None
        }
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn component(&self, c: usize) -> SampledFunction {
        SampledFunction {
            grid: self.grid,
            values: self.vectors.iter().map(|v| v[c]).collect(),
            mask: self.mask.clone(),
        }
    }

    pub fn from_components(x: &SampledFunction, y: &SampledFunction, z: &SampledFunction) -> Self {
        let grid = *x.grid();
        let mask: Vec<bool> = (0..x.len())
            .map(|i| x.is_valid(i) && y.is_valid(i) && z.is_valid(i))
            .collect();
        let vectors = (0..x.len())
            .map(|i| {
                if mask[i] {
                    Vector3::new(x.values()[i], y.values()[i], z.values()[i])
                } else {
                    nan_vector()
                }
            })
            .collect();
        SampledVectorField { grid, vectors, mask }
    }

    /// Pointwise norm as a sampled function.
    pub fn norms(&self) -> SampledFunction {
        SampledFunction {
            grid: self.grid,
            values: self
                .vectors
                .iter()
                .zip(&self.mask)
                .map(|(v, &m)| if m { v.norm() } else { f64::NAN })
                .collect(),
            mask: self.mask.clone(),
        }
    }

    pub fn restrict(&self, keep: &[bool]) -> Self {
        let mut out = self.clone();
        for (i, &k) in keep.iter().enumerate() {
            if !k {
                out.mask[i] = false;
                out.vectors[i] = nan_vector();
            }
        }
        out
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        SampledVectorField {
            grid: self.grid.slice(range.clone()),
            vectors: self.vectors[range.clone()].to_vec(),
            mask: self.mask[range].to_vec(),
        }
    }

    pub(crate) fn with_grid(mut self, grid: Grid) -> Self {
        debug_assert_eq!(grid.len(), self.len());
        self.grid = grid;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_from_values_accepts_linspace_and_rejects_jitter() {
        let vals: Vec<f64> = (0..101).map(|i| 0.15 + i as f64 * 0.001).collect();
        let g = Grid::from_values(&vals).unwrap();
        assert_eq!(g.len(), 101);
        assert!((g.step() - 0.001).abs() < 1e-15);

        let mut bad = vals.clone();
        bad[50] += 1e-6;
        assert!(matches!(
            Grid::from_values(&bad),
            Err(Error::NonUniformGrid { index: 50, .. })
        ));
        bad[50] = bad[49];
        assert!(matches!(Grid::from_values(&bad), Err(Error::NonIncreasingGrid { .. })));
    }

    #[test]
    fn frame_validation_rejects_skewed_and_left_handed() {
        let t = Vector3::x();
        let n = Vector3::y();
        assert!(Frame::new(t, n, Vector3::z(), FRAME_TOL_CONSTRUCTED).is_ok());
        assert!(Frame::new(t, n, -Vector3::z(), FRAME_TOL_CONSTRUCTED).is_err());
        let skew = Vector3::new(1e-6, 1.0, 0.0).normalize();
        assert!(Frame::new(t, skew, t.cross(&skew), FRAME_TOL_CONSTRUCTED).is_err());
        assert!(Frame::new(t, skew, t.cross(&skew), FRAME_TOL_NUMERIC).is_ok());
    }

    #[test]
    fn gram_schmidt_produces_right_handed_frame() {
        let f = Frame::orthonormalize(&Vector3::new(1.0, 2.0, 3.0), &Vector3::new(0.0, 1.0, 0.5)).unwrap();
        assert!(f.gram_deviation() < 1e-15);
        assert!((f.determinant() - 1.0).abs() < 1e-15);
        assert!(Frame::orthonormalize(&Vector3::x(), &Vector3::x()).is_none());
    }

    #[test]
    fn runs_split_on_invalid_samples() {
        let mask = [true, true, false, true, true, true, false, false, true];
        assert_eq!(valid_runs(&mask), vec![0..2, 3..6, 8..9]);
        assert_eq!(longest_run(&mask), Some(3..6));
        assert_eq!(longest_run(&[false, false]), None);
    }

    #[test]
    fn map_masks_non_finite_results() {
        let g = Grid::linspace(-1.0, 1.0, 5).unwrap();
        let f = SampledFunction::from_fn(g, |s| s);
        let inv = f.map(|v| 1.0 / v);
        assert!(!inv.is_valid(2));
        assert_eq!(inv.valid_count(), 4);
    }
}
