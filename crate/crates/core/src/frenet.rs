//! Frenet apparatus of sampled curves and reconstruction of curves from
//! their intrinsic equations.
//!
//! Sign convention: `T' = kN`, `N' = -kT + tB`, `B' = -tN`, with the torsion
//! read off as `<N', B>`.

use nalgebra::Rotation3;

use crate::error::{Error, Result};
use crate::geometry::{
    derivative_field, rk4_step, CubicSpline, Frame, Grid, SampledFunction, SampledVectorField, Vector3,
    FRAME_TOL_CONSTRUCTED,
};

/// Unit-speed tolerance of an arc-length sampled curve.
pub const REPARAM_TOL: f64 = 1e-6;
/// Relative curvature floor; below `KAPPA_FLOOR_REL * max k` the normal is undefined.
pub const KAPPA_FLOOR_REL: f64 = 1e-7;
/// Frenet residual tolerance, relative to `1 + max(k, |t|)`.
pub const FRENET_TOL: f64 = 1e-3;
/// Round-trip tolerance of `frenet_apparatus(curve_from_intrinsic(..))`.
pub const ROUNDTRIP_TOL: f64 = 1e-4;
/// Absolute speed below which a parametrization counts as singular.
pub const SINGULAR_SPEED: f64 = 1e-12;

const MIN_APPARATUS_SAMPLES: usize = 7;
const MAX_MASKED_FRACTION: f64 = 0.5;
// Samples excluded at each end when checking interior-only properties.
const INTERIOR_TRIM: usize = 3;

/// A curve sampled on a uniform arc-length grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSampledCurve {
    points: SampledVectorField,
}

impl ArcSampledCurve {
    /// Checks the unit-speed invariant `| |dp/ds| - 1 | < REPARAM_TOL` on interior samples.
    pub fn new(points: SampledVectorField) -> Result<Self> {
        if points.len() < 5 {
            return Err(Error::TooFewSamples {
                needed: 5,
                got: points.len(),
            });
        }
        if let Some(i) = points.mask().iter().position(|&m| !m) {
            return Err(Error::NonFinite { index: i });
        }
        let speed = derivative_field(&points)?.norms();
        let n = points.len();
        for i in 2..n - 2 {
            let deviation = (speed.values()[i] - 1.0).abs();
            if !(deviation <= REPARAM_TOL) {
                return Err(Error::NotUnitSpeed { index: i, deviation });
            }
        }
        Ok(ArcSampledCurve { points })
    }

    pub fn grid(&self) -> &Grid {
        self.points.grid()
    }

    pub fn points(&self) -> &SampledVectorField {
        &self.points
    }

    pub fn positions(&self) -> &[Vector3] {
        self.points.vectors()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Relabels the arc-length grid to begin at `s0`.
    pub fn with_start(self, s0: f64) -> Self {
        let grid = self.grid().with_start(s0);
        ArcSampledCurve {
            points: self.points.with_grid(grid),
        }
    }

    /// Applies the rigid motion `p -> r p + shift`.
    pub fn transformed(&self, r: &Rotation3<f64>, shift: &Vector3) -> Self {
        let moved = self.positions().iter().map(|p| r * p + shift).collect();
        ArcSampledCurve {
            points: SampledVectorField::new(*self.grid(), moved).expect("rigid motion keeps points finite"),
        }
    }
}

/// Per-sample Frenet frame with curvature and torsion.
///
/// `mask[i]` holds when the frame, `kappa` and `tau` are all valid at `i`;
/// invalid frames are filled with `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrenetApparatus {
    grid: Grid,
    frames: Vec<Frame>,
    kappa: SampledFunction,
    tau: SampledFunction,
    frame_mask: Vec<bool>,
    mask: Vec<bool>,
}

/// Max Frenet-equation residuals over interior valid samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetResidual {
    pub tangent: f64,
    pub normal: f64,
    pub binormal: f64,
}

impl FrenetResidual {
    pub fn max(&self) -> f64 {
        self.tangent.max(self.normal).max(self.binormal)
    }
}

impl FrenetApparatus {
    pub fn from_parts(
        frames: Vec<Frame>,
        frame_mask: Vec<bool>,
        kappa: SampledFunction,
        tau: SampledFunction,
    ) -> Result<Self> {
        let grid = *kappa.grid();
        let n = grid.len();
        if frames.len() != n || frame_mask.len() != n || tau.len() != n {
            return Err(Error::LengthMismatch {
                grid: n,
                data: frames.len().min(tau.len()).min(frame_mask.len()),
            });
        }
        let mut frames = frames;
        for (f, &m) in frames.iter_mut().zip(&frame_mask) {
            if !m {
                *f = Frame::nan();
            }
        }
        let mask = (0..n)
            .map(|i| frame_mask[i] && kappa.is_valid(i) && tau.is_valid(i))
            .collect();
        Ok(FrenetApparatus {
            grid,
            frames,
            kappa,
            tau: tau.with_grid(grid),
            frame_mask,
            mask,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> Option<&Frame> {
        if self.frame_mask[i] {
            Some(&self.frames[i])
        } else {
            None
        }
    }

    pub fn kappa(&self) -> &SampledFunction {
        &self.kappa
    }

    pub fn tau(&self) -> &SampledFunction {
        &self.tau
    }

    pub fn frame_mask(&self) -> &[bool] {
        &self.frame_mask
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    fn field(&self, pick: impl Fn(&Frame) -> Vector3) -> SampledVectorField {
        let vectors = self.frames.iter().map(pick).collect();
        SampledVectorField::with_mask(self.grid, vectors, self.frame_mask.clone()).expect("valid frames are finite")
    }

    pub fn tangents(&self) -> SampledVectorField {
        self.field(|f| f.t)
    }

    pub fn normals(&self) -> SampledVectorField {
        self.field(|f| f.n)
    }

    pub fn binormals(&self) -> SampledVectorField {
        self.field(|f| f.b)
    }

    /// Restriction to an index range (grid relabelled accordingly).
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        FrenetApparatus {
            grid: self.grid.slice(range.clone()),
            frames: self.frames[range.clone()].to_vec(),
            kappa: self.kappa.slice(range.clone()),
            tau: self.tau.slice(range.clone()),
            frame_mask: self.frame_mask[range.clone()].to_vec(),
            mask: self.mask[range].to_vec(),
        }
    }

    /// Largest Gram-matrix deviation among valid frames.
    pub fn max_frame_deviation(&self) -> f64 {
        self.frames
            .iter()
            .zip(&self.frame_mask)
            .filter(|(_, &m)| m)
            .map(|(f, _)| f.gram_deviation().max((f.determinant() - 1.0).abs()))
            .fold(0.0, f64::max)
    }

    /// `|T' - kN|`, `|N' + kT - tB|`, `|B' + tN|` with numerically
    /// differentiated frames, over valid samples away from the ends,
    /// normalized by `1 + max(k, |t|)`.
    pub fn frenet_residual(&self) -> Result<FrenetResidual> {
        let dt = derivative_field(&self.tangents())?;
        let dn = derivative_field(&self.normals())?;
        let db = derivative_field(&self.binormals())?;
        let scale = 1.0 + self.kappa.max_abs().max(self.tau.max_abs());
        let mut r = FrenetResidual {
            tangent: 0.0,
            normal: 0.0,
            binormal: 0.0,
        };
        let n = self.len();
        for i in INTERIOR_TRIM..n.saturating_sub(INTERIOR_TRIM) {
            if !self.mask[i] {
                continue;
            }
            let (Some(a), Some(b), Some(c)) = (dt.get(i), dn.get(i), db.get(i)) else {
                continue;
            };
            let f = &self.frames[i];
            let k = self.kappa.values()[i];
            let t = self.tau.values()[i];
            r.tangent = r.tangent.max((a - f.n * k).norm() / scale);
            r.normal = r.normal.max((b + f.t * k - f.b * t).norm() / scale);
            r.binormal = r.binormal.max((c + f.n * t).norm() / scale);
        }
        Ok(r)
    }
}

/// Sampled intrinsic equations `k(s)`, `t(s)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicProfile {
    kappa: SampledFunction,
    tau: SampledFunction,
}

impl IntrinsicProfile {
    pub fn new(kappa: SampledFunction, tau: SampledFunction) -> Result<Self> {
        if kappa.grid() != tau.grid() {
            return Err(Error::LengthMismatch {
                grid: kappa.len(),
                data: tau.len(),
            });
        }
        if let Some((i, _, v)) = kappa.iter_valid().find(|&(_, _, v)| v < 0.0) {
            return Err(Error::NegativeKappa { index: i, value: v });
        }
        Ok(IntrinsicProfile { kappa, tau })
    }

    pub fn from_fns(grid: Grid, kappa: impl Fn(f64) -> f64, tau: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            SampledFunction::from_fn(grid, kappa),
            SampledFunction::from_fn(grid, tau),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.kappa.grid()
    }

    pub fn kappa(&self) -> &SampledFunction {
        &self.kappa
    }

    pub fn tau(&self) -> &SampledFunction {
        &self.tau
    }
}

fn gauss_legendre_5(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    X.iter().zip(W).map(|(&x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

struct SplineCurve {
    c: [CubicSpline; 3],
}

impl SplineCurve {
    fn eval(&self, t: f64) -> Vector3 {
        Vector3::new(self.c[0].eval(t), self.c[1].eval(t), self.c[2].eval(t))
    }

    fn speed(&self, t: f64) -> f64 {
        Vector3::new(
            self.c[0].derivative(t),
            self.c[1].derivative(t),
            self.c[2].derivative(t),
        )
        .norm()
    }
}

/// Resamples a regular curve onto a uniform arc-length grid with the same
/// number of samples. Arc length is taken along a not-a-knot cubic spline
/// through the points; the output grid starts at `s = 0`.
pub fn reparameterize(points: &SampledVectorField) -> Result<ArcSampledCurve> {
    if let Some(i) = points.mask().iter().position(|&m| !m) {
        return Err(Error::NonFinite { index: i });
    }
    reparameterize_points(&points.grid().values(), points.vectors())
}

/// As [`reparameterize`], for arbitrary strictly increasing parameter values.
pub fn reparameterize_points(params: &[f64], points: &[Vector3]) -> Result<ArcSampledCurve> {
    let n = points.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: n });
    }
    if params.len() != n {
        return Err(Error::LengthMismatch {
            grid: params.len(),
            data: n,
        });
    }
    let comp = |c: usize| -> Vec<f64> { points.iter().map(|p| p[c]).collect() };
    let curve = SplineCurve {
        c: [
            CubicSpline::not_a_knot(params, &comp(0))?,
            CubicSpline::not_a_knot(params, &comp(1))?,
            CubicSpline::not_a_knot(params, &comp(2))?,
        ],
    };
    for (i, &t) in params.iter().enumerate() {
        let speed = curve.speed(t);
        if !(speed >= SINGULAR_SPEED) {
            return Err(Error::SingularSpeed { index: i, speed });
        }
    }
    let piece = |a: f64, b: f64| gauss_legendre_5(a, b, |t| curve.speed(t));
    let mut cum = vec![0.0; n];
    for i in 0..n - 1 {
        cum[i + 1] = cum[i] + piece(params[i], params[i + 1]);
    }
    let total = cum[n - 1];
    let grid = Grid::linspace(0.0, total, n)?;

    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for j in 0..n {
        let target = grid.at(j);
        if j == 0 {
            out.push(points[0]);
            continue;
        }
        if j == n - 1 {
            out.push(points[n - 1]);
            continue;
        }
        while k < n - 2 && cum[k + 1] <= target {
            k += 1;
        }
        let (a, b) = (params[k], params[k + 1]);
        let (sa, sb) = (cum[k], cum[k + 1]);
        let want = target - sa;
        if want.abs() <= 1e-15 * total.max(1.0) {
            out.push(points[k]);
            continue;
        }
        // safeguarded Newton on t -> arc length from a
        let (mut lo, mut hi) = (a, b);
        let mut t = a + (b - a) * (want / (sb - sa)).clamp(0.0, 1.0);
        for _ in 0..60 {
            let g = piece(a, t) - want;
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = g / curve.speed(t);
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * (b - a).abs().max(f64::MIN_POSITIVE) + 1e-300 {
                t = next;
                break;
            }
            t = next;
        }
        out.push(curve.eval(t));
    }
    ArcSampledCurve::new(SampledVectorField::new(grid, out)?)
}

fn kappa_floor(kappa: &SampledFunction, noise_floor: f64) -> f64 {
    (KAPPA_FLOOR_REL * kappa.max_abs()).max(noise_floor)
}

/// Frenet apparatus by numerical differentiation of a unit-speed curve.
///
/// `T = p'`, `k = |T'|`, `N = T'/k`, `B = T x N`, `t = <N', B>`, with one
/// Gram-Schmidt pass per frame. Samples with `k` under the floor are masked.
pub fn frenet_apparatus(curve: &ArcSampledCurve) -> Result<FrenetApparatus> {
    let n = curve.len();
    if n < MIN_APPARATUS_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_APPARATUS_SAMPLES,
            got: n,
        });
    }
    let grid = *curve.grid();
    let h = grid.step();
    let raw_t = derivative_field(curve.points())?;
    let unit_t: Vec<Vector3> = raw_t.vectors().iter().map(|v| v.normalize()).collect();
    let unit_t = SampledVectorField::new(grid, unit_t)?;
    let dt = derivative_field(&unit_t)?;
    let kappa_raw = dt.norms();

    // roundoff in the positions, amplified by two differentiations
    let extent = curve.positions().iter().map(|p| p.norm()).fold(0.0, f64::max);
    let noise = 1e3 * f64::EPSILON * extent.max(1.0) / (h * h);
    let floor = kappa_floor(&kappa_raw, noise);
    let kappa_ok: Vec<bool> = (0..n)
        .map(|i| kappa_raw.is_valid(i) && kappa_raw.values()[i] >= floor)
        .collect();
    let masked = kappa_ok.iter().filter(|&&m| !m).count();
    if masked as f64 > MAX_MASKED_FRACTION * n as f64 {
        return Err(Error::DegenerateCurve(format!(
            "curvature below floor {floor:e} on {masked} of {n} samples"
        )));
    }

    let mut frames = vec![Frame::nan(); n];
    let mut frame_mask = vec![false; n];
    for i in 0..n {
        if !kappa_ok[i] {
            continue;
        }
        let normal = dt.vectors()[i] / kappa_raw.values()[i];
        if let Some(f) = Frame::orthonormalize(&unit_t.vectors()[i], &normal) {
            frames[i] = f;
            frame_mask[i] = true;
        }
    }
    let normals = SampledVectorField::with_mask(grid, frames.iter().map(|f| f.n).collect(), frame_mask.clone())?;
    let dn = derivative_field(&normals)?;
    let tau_vals: Vec<f64> = (0..n)
        .map(|i| match dn.get(i) {
            Some(d) if frame_mask[i] => d.dot(&frames[i].b),
            _ => f64::NAN,
        })
        .collect();
    let tau = SampledFunction::new(grid, tau_vals)?;
    let kappa = kappa_raw.restrict(&kappa_ok);
    FrenetApparatus::from_parts(frames, frame_mask, kappa, tau)
}

/// Midpoint samples `f(s_i + h/2)` from the local cubic.
fn midpoints(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n - 1)
        .map(|i| {
            if i == 0 {
                (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0
            } else if i == n - 2 {
                (5.0 * v[n - 1] + 15.0 * v[n - 2] - 5.0 * v[n - 3] + v[n - 4]) / 16.0
            } else {
                (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0
            }
        })
        .collect()
}

/// Integrates `p' = T` together with the Frenet equations using fixed-step
/// RK4 at the profile spacing, re-orthonormalizing the frame after every step.
///
/// Returns the curve and the integrated apparatus, whose curvature and
/// torsion are the profile values.
pub fn curve_from_intrinsic(
    profile: &IntrinsicProfile,
    initial: &Frame,
    origin: &Vector3,
) -> Result<(ArcSampledCurve, FrenetApparatus)> {
    let deviation = initial.gram_deviation().max((initial.determinant() - 1.0).abs());
    if !(deviation <= FRAME_TOL_CONSTRUCTED) {
        return Err(Error::NonOrthonormalSeed { deviation });
    }
    let kappa = profile.kappa();
    let tau = profile.tau();
    let n = kappa.len();
    if n < MIN_APPARATUS_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_APPARATUS_SAMPLES,
            got: n,
        });
    }
    for i in 0..n {
        if !kappa.is_valid(i) || !tau.is_valid(i) {
            return Err(Error::MaskedRegion { index: i });
        }
        if kappa.values()[i] < 0.0 {
            return Err(Error::NegativeKappa {
                index: i,
                value: kappa.values()[i],
            });
        }
    }
    let grid = *profile.grid();
    let h = grid.step();
    let (kv, tv) = (kappa.values(), tau.values());
    let (km, tm) = (midpoints(kv), midpoints(tv));

    // stage abscissae are i, i + 1/2, i + 1 in index units
    let coeffs = |u: f64| -> (f64, f64) {
        let i = u.floor() as usize;
        if u - i as f64 > 0.25 {
            (km[i], tm[i])
        } else {
            (kv[i], tv[i])
        }
    };
    let rhs = |u: f64, y: &[f64; 12]| -> [f64; 12] {
        let (k, t) = coeffs(u);
        let tt = [y[3], y[4], y[5]];
        let nn = [y[6], y[7], y[8]];
        let bb = [y[9], y[10], y[11]];
        let mut out = [0.0; 12];
        for c in 0..3 {
            out[c] = h * tt[c];
            out[3 + c] = h * k * nn[c];
            out[6 + c] = h * (-k * tt[c] + t * bb[c]);
            out[9 + c] = -h * t * nn[c];
        }
        out
    };
    let pack = |p: &Vector3, f: &Frame| -> [f64; 12] {
        [
            p.x, p.y, p.z, f.t.x, f.t.y, f.t.z, f.n.x, f.n.y, f.n.z, f.b.x, f.b.y, f.b.z,
        ]
    };

    let mut points = Vec::with_capacity(n);
    let mut frames = Vec::with_capacity(n);
    let mut p = *origin;
    let mut frame = Frame::orthonormalize(&initial.t, &initial.n).ok_or(Error::NonOrthonormalSeed { deviation })?;
    points.push(p);
    frames.push(frame);
    for i in 0..n - 1 {
        let y = rk4_step(i as f64, &pack(&p, &frame), 1.0, rhs);
        p = Vector3::new(y[0], y[1], y[2]);
        frame = Frame::orthonormalize(&Vector3::new(y[3], y[4], y[5]), &Vector3::new(y[6], y[7], y[8]))
            .ok_or_else(|| Error::DegenerateCurve(format!("frame collapsed at step {i}")))?;
        points.push(p);
        frames.push(frame);
    }
    let curve = ArcSampledCurve::new(SampledVectorField::new(grid, points)?)?;
    let floor = kappa_floor(kappa, 0.0);
    let keep: Vec<bool> = kv.iter().map(|&k| k >= floor).collect();
    let app = FrenetApparatus::from_parts(frames, vec![true; n], kappa.restrict(&keep), tau.clone())?;
    Ok((curve, app))
}

/// Max over samples of `|a - b| / max |b|`, restricted to samples valid in both
/// and at least `trim` samples from either end.
pub fn max_relative_error(a: &SampledFunction, b: &SampledFunction, trim: usize) -> f64 {
    let n = a.len().min(b.len());
    let scale = b.max_abs().max(f64::MIN_POSITIVE);
    (trim..n.saturating_sub(trim))
        .filter_map(|i| Some((a.get(i)? - b.get(i)?).abs() / scale))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn raw(params: &[f64], f: impl Fn(f64) -> Vector3) -> Vec<Vector3> {
        params.iter().map(|&t| f(t)).collect()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        Grid::linspace(a, b, n).unwrap().values()
    }

    #[test]
    fn reparameterize_keeps_unit_speed_line() {
        let t = linspace(0.0, 1.0, 101);
        let pts = raw(&t, |s| Vector3::new(s, 0.0, 0.0));
        let c = reparameterize_points(&t, &pts).unwrap();
        assert!((c.grid().end() - 1.0).abs() < 1e-14);
        for (p, q) in c.positions().iter().zip(&pts) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn reparameterize_unit_circle_length() {
        let t = linspace(0.0, TAU, 1001);
        let c = reparameterize_points(&t, &raw(&t, |s| Vector3::new(s.cos(), s.sin(), 0.0))).unwrap();
        assert!((c.grid().end() - TAU).abs() < 1e-6);
    }

    #[test]
    fn reparameterize_double_speed_circle() {
        let t = linspace(0.0, PI, 1001);
        let c = reparameterize_points(&t, &raw(&t, |s| Vector3::new((2.0 * s).cos(), (2.0 * s).sin(), 0.0))).unwrap();
        assert!((c.grid().end() - TAU).abs() < 1e-6);
    }

    #[test]
    fn reparameterize_nonuniform_speed() {
        // speed varies by a factor of ~5 along the parameter
        let t = linspace(0.0, 2.0, 2001);
        let pts = raw(&t, |u| {
            let w = u * u + 0.5 * u;
            Vector3::new(w.cos(), w.sin(), 0.3 * w)
        });
        let c = reparameterize_points(&t, &pts).unwrap();
        let w_end: f64 = 4.0 + 1.0;
        assert!((c.grid().end() - w_end * (1.0f64 + 0.09).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn reparameterize_rejects_stalled_curve() {
        let t = linspace(-1.0, 1.0, 11);
        let pts = raw(&t, |u| Vector3::new(u * u * u, 0.0, 0.0));
        assert!(matches!(
            reparameterize_points(&t, &pts),
            Err(Error::SingularSpeed { index: 5, .. })
        ));
        assert!(matches!(
            reparameterize_points(&t[..4], &pts[..4]),
            Err(Error::TooFewSamples { .. })
        ));
    }

    fn helix_points(a: f64, b: f64, n: usize, len: f64) -> ArcSampledCurve {
        let c = (a * a + b * b).sqrt();
        let t = linspace(0.0, len / c, n);
        reparameterize_points(&t, &raw(&t, |u| Vector3::new(a * u.cos(), a * u.sin(), b * u))).unwrap()
    }

    #[test]
    fn apparatus_of_circular_helix() {
        let app = frenet_apparatus(&helix_points(1.0, 1.0, 4001, 20.0)).unwrap();
        // nested one-sided stencils leave O(ds^2) error on the outermost samples
        for i in INTERIOR_TRIM..app.len() - INTERIOR_TRIM {
            let k = app.kappa().get(i).unwrap();
            let t = app.tau().get(i).unwrap();
            assert!((k - 0.5).abs() < 1e-6, "k[{i}] = {k}");
            assert!((t - 0.5).abs() < 1e-6, "t[{i}] = {t}");
        }
        assert!(app.max_frame_deviation() < 1e-12);
        assert!(app.frenet_residual().unwrap().max() < FRENET_TOL);
    }

    #[test]
    fn apparatus_of_plane_circle() {
        let t = linspace(0.0, TAU, 2001);
        let c = reparameterize_points(&t, &raw(&t, |u| Vector3::new(u.cos(), u.sin(), 0.0))).unwrap();
        let app = frenet_apparatus(&c).unwrap();
        for i in 0..app.len() {
            assert!((app.kappa().get(i).unwrap() - 1.0).abs() < 1e-6);
            assert!(app.tau().get(i).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn straight_line_is_degenerate() {
        let t = linspace(0.0, 1.0, 101);
        let c = reparameterize_points(&t, &raw(&t, |u| Vector3::new(u, 2.0 * u, -u) / 6f64.sqrt())).unwrap();
        assert!(matches!(frenet_apparatus(&c), Err(Error::DegenerateCurve(_))));
    }

    #[test]
    fn circle_from_constant_curvature_closes() {
        let n = 6284;
        let grid = Grid::linspace(0.0, TAU, n).unwrap();
        let prof = IntrinsicProfile::from_fns(grid, |_| 1.0, |_| 0.0).unwrap();
        let (c, app) = curve_from_intrinsic(&prof, &Frame::identity(), &Vector3::zeros()).unwrap();
        let gap = (c.positions()[n - 1] - c.positions()[0]).norm();
        assert!(gap < 1e-6, "gap {gap:e}");
        assert!(app.max_frame_deviation() < 1e-9);
    }

    #[test]
    fn helix_round_trip_from_intrinsic() {
        let grid = Grid::linspace(0.0, 20.0, 4001).unwrap();
        let prof = IntrinsicProfile::from_fns(grid, |_| 0.5, |_| 0.5).unwrap();
        let (c, _) = curve_from_intrinsic(&prof, &Frame::identity(), &Vector3::zeros()).unwrap();
        let app = frenet_apparatus(&c).unwrap();
        for i in INTERIOR_TRIM..app.len() - INTERIOR_TRIM {
            assert!((app.kappa().get(i).unwrap() - 0.5).abs() < 1e-6);
            assert!((app.tau().get(i).unwrap() - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn intrinsic_errors() {
        let grid = Grid::linspace(0.0, 1.0, 11).unwrap();
        assert!(matches!(
            IntrinsicProfile::from_fns(grid, |s| s - 0.5, |_| 0.0),
            Err(Error::NegativeKappa { .. })
        ));
        let prof = IntrinsicProfile::from_fns(grid, |_| 1.0, |_| 0.0).unwrap();
        let skew = Frame {
            t: Vector3::x(),
            n: Vector3::new(0.1, 1.0, 0.0),
            b: Vector3::z(),
        };
        assert!(matches!(
            curve_from_intrinsic(&prof, &skew, &Vector3::zeros()),
            Err(Error::NonOrthonormalSeed { .. })
        ));
    }

    #[test]
    fn general_profile_round_trip() {
        let grid = Grid::linspace(0.0, 6.0, 6001).unwrap();
        let prof = IntrinsicProfile::from_fns(grid, |s| 1.0 + 0.3 * s.sin(), |s| 0.4 * (0.7 * s).cos()).unwrap();
        let (c, integrated) = curve_from_intrinsic(&prof, &Frame::identity(), &Vector3::zeros()).unwrap();
        let app = frenet_apparatus(&c).unwrap();
        assert!(max_relative_error(app.kappa(), prof.kappa(), 0) < ROUNDTRIP_TOL);
        assert!(max_relative_error(app.tau(), prof.tau(), 0) < ROUNDTRIP_TOL);
        assert!(integrated.frenet_residual().unwrap().max() < FRENET_TOL);
        assert!(app.frenet_residual().unwrap().max() < FRENET_TOL);
    }

    #[test]
    fn rigid_motion_equivariance() {
        let grid = Grid::linspace(0.0, 4.0, 2001).unwrap();
        let prof = IntrinsicProfile::from_fns(grid, |s| 1.0 + 0.2 * s, |s| (0.5 * s).sin()).unwrap();
        let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let shift = Vector3::new(1.0, -2.0, 0.5);
        let (c0, a0) = curve_from_intrinsic(&prof, &Frame::identity(), &Vector3::zeros()).unwrap();
        let (c1, a1) = curve_from_intrinsic(&prof, &Frame::identity().rotated(&rot), &shift).unwrap();
        for (p, q) in c0.positions().iter().zip(c1.positions()) {
            assert!((rot * p + shift - q).norm() < 1e-12);
        }
        assert_eq!(a0.kappa(), a1.kappa());
        assert_eq!(a0.tau(), a1.tau());
        let n0 = frenet_apparatus(&c0).unwrap();
        let n1 = frenet_apparatus(&c1).unwrap();
        assert!(max_relative_error(n0.kappa(), n1.kappa(), 0) < 1e-8);
        assert!(max_relative_error(n0.tau(), n1.tau(), 0) < 1e-6);
    }
}
