//! Fixture curves with known slant structure.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{curve_from_intrinsic, ArcSampledCurve, FrenetApparatus, IntrinsicProfile};
use crate::geometry::{rk4_step, Frame, Grid, SampledFunction, SampledVectorField, Vector3};
use crate::slant::K_MAX;

/// Slant ODE solutions are cut where any level exceeds this magnitude.
pub const F_CAP: f64 = 1e3;
/// Margin kept from the zeros of `sin(mu s)` for constant precession, times `1/mu`.
pub const PRECESSION_MARGIN: f64 = 0.15;
/// Fewest samples a fixture may have.
pub const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `(a cos t, a sin t, b t)`.
    CircularHelix { a: f64, b: f64 },
    /// `k = 1 + 0.3 sin s`, `t = cot(phi) k`.
    GeneralHelix { phi: f64 },
    /// `k = 1`, `sigma = c`.
    Salkowski { c: f64 },
    /// `t = 1`, `sigma = c`.
    AntiSalkowski { c: f64 },
    /// `k = (mu/m) sin(mu s)`, `t = (mu/m) cos(mu s)`.
    ConstantPrecession { mu: f64, m: f64 },
    /// Circle of radius `r` in the xy-plane.
    PlaneCircle { r: f64 },
    /// `k = 1`, `sigma_k = c`.
    DesignedKSlant { k: usize, c: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::CircularHelix { .. } => "circular-helix",
            Family::GeneralHelix { .. } => "general-helix",
            Family::Salkowski { .. } => "salkowski",
            Family::AntiSalkowski { .. } => "anti-salkowski",
            Family::ConstantPrecession { .. } => "constant-precession",
            Family::PlaneCircle { .. } => "plane-circle",
            Family::DesignedKSlant { .. } => "designed-k-slant",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(format!("{}: {msg}", self.name())));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            Family::CircularHelix { a, b } if !finite(&[a, b]) || a <= 0.0 => bad("need a > 0"),
            Family::GeneralHelix { phi } if !(phi > 0.0 && phi < PI) => bad("need 0 < phi < pi"),
            Family::Salkowski { c } | Family::AntiSalkowski { c } if !finite(&[c]) || c == 0.0 => bad("need c != 0"),
            Family::ConstantPrecession { mu, m } if !finite(&[mu, m]) || mu <= 0.0 || m == 0.0 => {
                bad("need mu > 0 and m != 0")
            }
            Family::PlaneCircle { r } if !(r > 0.0 && r.is_finite()) => bad("need r > 0"),
            Family::DesignedKSlant { k, c } if !finite(&[c]) || c == 0.0 || k == 0 || k >= K_MAX => {
                bad("need c != 0 and 1 <= k < 6")
            }
            _ => Ok(()),
        }
    }

    /// Default arc-length span.
    pub fn default_span(&self) -> (f64, f64) {
        match *self {
            Family::CircularHelix { .. } => (0.0, 20.0),
            Family::GeneralHelix { .. } => (0.0, 10.0),
            Family::Salkowski { c } => (-0.75 / c.abs(), 0.75 / c.abs()),
            Family::AntiSalkowski { c } => (-0.15 / c.abs(), 0.15 / c.abs()),
            Family::ConstantPrecession { mu, .. } => (PRECESSION_MARGIN / mu, (PI - PRECESSION_MARGIN) / mu),
            Family::PlaneCircle { r } => (0.0, 2.0 * PI * r),
            Family::DesignedKSlant { k: 1 | 2, .. } => (-0.75, 0.75),
            Family::DesignedKSlant { .. } => (-0.5, 0.5),
        }
    }

    /// Default sample spacing.
    pub fn default_step(&self) -> f64 {
        match *self {
            Family::CircularHelix { .. } => 5e-3,
            Family::PlaneCircle { r } => 2.5e-3 * r,
            _ => 1e-3,
        }
    }
}

/// A fixture request. `span` and `samples` default per family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZooSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl ZooSpec {
    pub fn new(family: Family) -> Self {
        ZooSpec {
            family,
            span: None,
            samples: None,
        }
    }

    pub fn with_span(mut self, from: f64, to: f64) -> Self {
        self.span = Some((from, to));
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = Some(n);
        self
    }

    /// Validated span and sample count.
    pub fn resolve(&self) -> Result<Grid> {
        self.family.validate()?;
        let (a, b) = self.span.unwrap_or_else(|| self.family.default_span());
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidSpec(format!("degenerate span [{a}, {b}]")));
        }
        let n = self
            .samples
            .unwrap_or_else(|| ((b - a) / self.family.default_step()).round() as usize + 1);
        if n < MIN_SAMPLES {
            return Err(Error::InvalidSpec(format!(
                "need at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if let Family::ConstantPrecession { mu, .. } = self.family {
            if (b * mu / PI).floor() != (a * mu / PI).floor() {
                return Err(Error::InvalidSpec("span crosses a zero of sin(mu s)".into()));
            }
        }
        Grid::linspace(a, b, n)
    }
}

/// Values a fixture is built to have.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooTruth {
    pub k_star: usize,
    pub cot_phi: f64,
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
    /// Known constant levels `(k, sigma_k)`.
    pub sigmas: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZooCurve {
    pub spec: ZooSpec,
    pub curve: ArcSampledCurve,
    pub apparatus: FrenetApparatus,
    pub truth: ZooTruth,
    /// Span actually generated; narrower than requested if an ODE was cut.
    pub span: (f64, f64),
    pub notes: Vec<String>,
}

fn truth(family: &Family) -> ZooTruth {
    let level = |k: usize, c: f64, kappa: Option<f64>, tau: Option<f64>| ZooTruth {
        k_star: k,
        cot_phi: c,
        kappa,
        tau,
        sigmas: vec![(k, c), (k + 1, 0.0)],
    };
    match *family {
        Family::CircularHelix { a, b } => {
            let c2 = a * a + b * b;
            level(0, b / a, Some(a / c2), Some(b / c2))
        }
        Family::PlaneCircle { r } => level(0, 0.0, Some(1.0 / r), Some(0.0)),
        Family::GeneralHelix { phi } => level(0, 1.0 / phi.tan(), None, None),
        Family::Salkowski { c } => level(1, c, Some(1.0), None),
        Family::AntiSalkowski { c } => level(1, c, None, Some(1.0)),
        Family::ConstantPrecession { m, .. } => level(1, -m, None, None),
        Family::DesignedKSlant { k, c } => level(k, c, Some(1.0), None),
    }
}

fn analytic(
    grid: Grid,
    pos: impl Fn(f64) -> Vector3,
    frame: impl Fn(f64) -> Frame,
    kappa: f64,
    tau: f64,
) -> Result<(ArcSampledCurve, FrenetApparatus)> {
    let curve = ArcSampledCurve::new(SampledVectorField::from_fn(grid, pos))?;
    let frames: Vec<Frame> = grid.values().into_iter().map(frame).collect();
    let app = FrenetApparatus::from_parts(
        frames,
        vec![true; grid.len()],
        SampledFunction::constant(grid, kappa),
        SampledFunction::constant(grid, tau),
    )?;
    Ok((curve, app))
}

// Step-doubling disagreement above this, relative to 1 + |y|, means the step
// no longer resolves the solution (a pole is near).
const STEP_CHECK_TOL: f64 = 1e-8;

/// RK4 step that also checks itself against two half steps.
fn checked_step<const N: usize>(y: &[f64; N], h: f64, rhs: impl Fn(&[f64; N]) -> [f64; N] + Copy) -> Option<[f64; N]> {
    let full = rk4_step(0.0, y, h, |_, y| rhs(y));
    let half = rk4_step(0.0, y, 0.5 * h, |_, y| rhs(y));
    let two = rk4_step(0.0, &half, 0.5 * h, |_, y| rhs(y));
    let resolved = (0..N).all(|j| {
        full[j].is_finite()
            && full[j].abs() <= F_CAP
            && (full[j] - two[j]).abs() <= STEP_CHECK_TOL * (1.0 + two[j].abs())
    });
    resolved.then_some(full)
}

/// RK4 from the middle sample outward in both directions. Returns the states
/// and the index range kept before any component exceeded [`F_CAP`] or a
/// step stopped resolving the solution.
fn solve_from_middle<const N: usize>(
    grid: &Grid,
    y_mid: [f64; N],
    rhs: impl Fn(&[f64; N]) -> [f64; N] + Copy,
) -> (Vec<[f64; N]>, std::ops::Range<usize>) {
    let n = grid.len();
    let mid = n / 2;
    let h = grid.step();
    let mut ys = vec![[f64::NAN; N]; n];
    ys[mid] = y_mid;
    let mut hi = mid + 1;
    while hi < n {
        let Some(y) = checked_step(&ys[hi - 1], h, rhs) else {
            break;
        };
        ys[hi] = y;
        hi += 1;
    }
    let mut lo = mid;
    while lo > 0 {
        let Some(y) = checked_step(&ys[lo], -h, rhs) else { break };
        ys[lo - 1] = y;
        lo -= 1;
    }
    (ys, lo..hi)
}

fn sigma_ladder_rhs<const N: usize>(c: f64) -> impl Fn(&[f64; N]) -> [f64; N] + Copy {
    // sigma_j' = sigma_{j+1} prod_{i<j} sqrt(1+sigma_i^2) (1+sigma_j^2)^{3/2}, k = 1
    move |y: &[f64; N]| {
        let mut out = [0.0; N];
        let mut prod = 1.0;
        for j in 0..N {
            let next = if j + 1 < N { y[j + 1] } else { c };
            let q = 1.0 + y[j] * y[j];
            out[j] = next * prod * q * q.sqrt();
            prod *= q.sqrt();
        }
        out
    }
}

fn designed_profile<const N: usize>(grid: &Grid, c: f64) -> (Vec<f64>, std::ops::Range<usize>) {
    let mut y0 = [0.0; N];
    y0[0] = 1.0;
    let (ys, range) = solve_from_middle(grid, y0, sigma_ladder_rhs::<N>(c));
    (ys.iter().map(|y| y[0]).collect(), range)
}

fn intrinsic_fixture(grid: Grid, kappa: Vec<f64>, tau: Vec<f64>) -> Result<(ArcSampledCurve, FrenetApparatus)> {
    let s0 = grid.start();
    let prof = IntrinsicProfile::new(SampledFunction::new(grid, kappa)?, SampledFunction::new(grid, tau)?)?;
    let (curve, app) = curve_from_intrinsic(&prof, &Frame::identity(), &Vector3::zeros())?;
    Ok((curve.with_start(s0), app))
}

/// Builds the fixture described by `spec`.
pub fn generate(spec: &ZooSpec) -> Result<ZooCurve> {
    let grid = spec.resolve()?;
    let mut notes = Vec::new();
    let mut cut = |grid: Grid, range: std::ops::Range<usize>, cap_center: f64| -> Result<Grid> {
        if range.len() < MIN_SAMPLES {
            return Err(Error::OdeBlowUp {
                cap: F_CAP,
                center: cap_center,
            });
        }
        if range.len() < grid.len() {
            let g = grid.slice(range.clone());
            notes.push(format!(
                "span shrunk to [{}, {}]: slant ODE exceeded {F_CAP} beyond it",
                g.start(),
                g.end()
            ));
            return Ok(g);
        }
        Ok(grid)
    };
    let (curve, apparatus) = match spec.family {
        Family::CircularHelix { a, b } => {
            let c = (a * a + b * b).sqrt();
            analytic(
                grid,
                |s| {
                    let u = s / c;
                    Vector3::new(a * u.cos(), a * u.sin(), b * u)
                },
                |s| {
                    let (sn, cs) = (s / c).sin_cos();
                    Frame {
                        t: Vector3::new(-a * sn, a * cs, b) / c,
                        n: Vector3::new(-cs, -sn, 0.0),
                        b: Vector3::new(b * sn, -b * cs, a) / c,
                    }
                },
                a / (a * a + b * b),
                b / (a * a + b * b),
            )?
        }
        Family::PlaneCircle { r } => analytic(
            grid,
            |s| {
                let (sn, cs) = (s / r).sin_cos();
                Vector3::new(r * cs, r * sn, 0.0)
            },
            |s| {
                let (sn, cs) = (s / r).sin_cos();
                Frame {
                    t: Vector3::new(-sn, cs, 0.0),
                    n: Vector3::new(-cs, -sn, 0.0),
                    b: Vector3::z(),
                }
            },
            1.0 / r,
            0.0,
        )?,
        Family::GeneralHelix { phi } => {
            let cot = 1.0 / phi.tan();
            let kappa: Vec<f64> = grid.values().iter().map(|s| 1.0 + 0.3 * s.sin()).collect();
            let tau = kappa.iter().map(|k| cot * k).collect();
            intrinsic_fixture(grid, kappa, tau)?
        }
        Family::ConstantPrecession { mu, m } => {
            let s = grid.values();
            let kappa = s.iter().map(|s| (mu / m) * (mu * s).sin()).collect::<Vec<_>>();
            let tau = s.iter().map(|s| (mu / m) * (mu * s).cos()).collect();
            if kappa.iter().any(|&k| k < 0.0) {
                return Err(Error::InvalidSpec(
                    "curvature (mu/m) sin(mu s) must stay positive".into(),
                ));
            }
            intrinsic_fixture(grid, kappa, tau)?
        }
        Family::Salkowski { c } => {
            // f' = c (1+f^2)^{3/2}, k = 1
            let (ys, range) = solve_from_middle(&grid, [0.0], move |y: &[f64; 1]| {
                let q = 1.0 + y[0] * y[0];
                [c * q * q.sqrt()]
            });
            let g = cut(grid, range.clone(), grid.at(grid.len() / 2))?;
            let tau: Vec<f64> = ys[range].iter().map(|y| y[0]).collect();
            intrinsic_fixture(g, vec![1.0; g.len()], tau)?
        }
        Family::AntiSalkowski { c } => {
            // k' = -c (1+k^2)^{3/2}, t = 1
            let (ys, range) = solve_from_middle(&grid, [1.0], move |y: &[f64; 1]| {
                let q = 1.0 + y[0] * y[0];
                [-c * q * q.sqrt()]
            });
            let kappa: Vec<f64> = ys[range.clone()].iter().map(|y| y[0]).collect();
            if kappa.iter().any(|&k| k <= 0.0) {
                return Err(Error::InvalidSpec("span too wide: curvature reaches zero".into()));
            }
            let g = cut(grid, range, grid.at(grid.len() / 2))?;
            intrinsic_fixture(g, kappa, vec![1.0; g.len()])?
        }
        Family::DesignedKSlant { k, c } => {
            let (f, range) = match k {
                1 => designed_profile::<1>(&grid, c),
                2 => designed_profile::<2>(&grid, c),
                3 => designed_profile::<3>(&grid, c),
                4 => designed_profile::<4>(&grid, c),
                _ => designed_profile::<5>(&grid, c),
            };
            let g = cut(grid, range.clone(), grid.at(grid.len() / 2))?;
            intrinsic_fixture(g, vec![1.0; g.len()], f[range].to_vec())?
        }
    };
    let span = (curve.grid().start(), curve.grid().end());
    Ok(ZooCurve {
        spec: *spec,
        curve,
        apparatus,
        truth: truth(&spec.family),
        span,
        notes,
    })
}

/// Result of fitting a quadric surface to a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidFit {
    /// Eigenvalues of the quadratic part, sign chosen so at least two are positive, descending.
    pub eigenvalues: [f64; 3],
    pub signature_ok: bool,
    /// `(l1 - l2) / l1` of the two positive eigenvalues.
    pub positive_spread: f64,
    /// `| |l3| / mean(l1, l2) - m^2 | / m^2`.
    pub ratio_error: f64,
    pub passed: bool,
}

/// Fits `q(x) = 0` with `q` a general quadric (ten coefficients, unit norm,
/// least squares) and tests for a circular one-sheeted hyperboloid with axis
/// ratio `m`: eigenvalue signature `(+, +, -)`, equal positive eigenvalues
/// within 1% and `|negative| : positive = m^2` within 2%.
pub fn hyperboloid_check(curve: &ArcSampledCurve, m: f64) -> Result<HyperboloidFit> {
    let pts = curve.positions();
    let n = pts.len();
    if n < 10 {
        return Err(Error::FitDegenerate(format!("{n} points cannot fix a quadric")));
    }
    let mean: Vector3 = pts.iter().sum::<Vector3>() / n as f64;
    let mut cov = Matrix3::zeros();
    for p in pts {
        let d = p - mean;
        cov += d * d.transpose();
    }
    cov /= n as f64;
    let spread = cov.symmetric_eigenvalues();
    let (lo, hi) = (spread.min(), spread.max());
    if !(hi > 0.0) || lo <= 1e-12 * hi {
        return Err(Error::FitDegenerate("points span fewer than three dimensions".into()));
    }
    let scale = 1.0 / cov.trace().sqrt();
    let rows = DMatrix::from_fn(n, 10, |i, j| {
        let p = (pts[i] - mean) * scale;
        let (x, y, z) = (p.x, p.y, p.z);
        [x * x, y * y, z * z, x * y, x * z, y * z, x, y, z, 1.0][j]
    });
    let svd = rows.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::FitDegenerate("SVD failed".into()))?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let q = v_t.row(imin);
    let a = Matrix3::new(
        q[0],
        q[3] / 2.0,
        q[4] / 2.0,
        q[3] / 2.0,
        q[1],
        q[5] / 2.0,
        q[4] / 2.0,
        q[5] / 2.0,
        q[2],
    );
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    if ev.iter().filter(|&&v| v > 0.0).count() < 2 {
        ev.iter_mut().for_each(|v| *v = -*v);
    }
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let [l1, l2, l3] = [ev[0], ev[1], ev[2]];
    let signature_ok = l2 > 0.0 && l3 < 0.0;
    let positive_spread = if l1 > 0.0 { (l1 - l2) / l1 } else { f64::INFINITY };
    let m2 = m * m;
    let ratio_error = (l3.abs() / (0.5 * (l1 + l2)) - m2).abs() / m2;
    Ok(HyperboloidFit {
        eigenvalues: [l1, l2, l3],
        signature_ok,
        positive_spread,
        ratio_error,
        passed: signature_ok && positive_spread <= 0.01 && ratio_error <= 0.02,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slant::{classify, sigma_recursion, DEFAULT_CONST_TOL};

    fn dispersion(f: &SampledFunction) -> f64 {
        let v: Vec<f64> = f.iter_valid().map(|x| x.2).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn helix_truth_and_apparatus() {
        let z = generate(&ZooSpec::new(Family::CircularHelix { a: 1.0, b: 1.0 })).unwrap();
        assert_eq!(z.truth.k_star, 0);
        assert_eq!(z.truth.cot_phi, 1.0);
        assert_eq!(z.curve.len(), 4001);
        assert!(z.apparatus.kappa().values().iter().all(|&k| k == 0.5));
        assert!(z.apparatus.max_frame_deviation() < 1e-14);
        assert!(z.apparatus.frenet_residual().unwrap().max() < 1e-6);
    }

    #[test]
    fn precession_truth() {
        let z = generate(&ZooSpec::new(Family::ConstantPrecession { mu: 1.0, m: 1.0 })).unwrap();
        assert_eq!(z.truth.k_star, 1);
        assert_eq!(z.truth.cot_phi, -1.0);
        assert!((z.span.0 - 0.15).abs() < 1e-15);
        for i in 0..z.apparatus.len() {
            let (k, t) = (z.apparatus.kappa().values()[i], z.apparatus.tau().values()[i]);
            assert!(((k * k + t * t).sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn salkowski_sigma_is_c() {
        let z = generate(&ZooSpec::new(Family::Salkowski { c: 0.5 })).unwrap();
        assert_eq!(dispersion(z.apparatus.kappa()), 0.0);
        let p = sigma_recursion(&z.apparatus, 2).unwrap();
        for (_, _, v) in p.sigmas[1].iter_valid() {
            assert!((v - 0.5).abs() < 1e-6);
        }
        // RK4 against the closed form c x / sqrt(1 - c^2 x^2)
        let mid = z.curve.grid().at(z.curve.len() / 2);
        for (_, s, f) in z.apparatus.tau().iter_valid() {
            let x = 0.5 * (s - mid);
            assert!((f - x / (1.0 - x * x).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn anti_salkowski_torsion_is_constant() {
        let z = generate(&ZooSpec::new(Family::AntiSalkowski { c: 0.5 })).unwrap();
        assert_eq!(dispersion(z.apparatus.tau()), 0.0);
        let p = sigma_recursion(&z.apparatus, 2).unwrap();
        let r = classify(&p, DEFAULT_CONST_TOL).unwrap();
        assert_eq!(r.k_star, Some(1));
        assert!((r.cot_phi.unwrap() - 0.5).abs() < 1e-5);
    }

    #[test]
    fn designed_fixtures_classify() {
        for (k, c) in [(2, 0.4), (3, 0.3)] {
            let z = generate(&ZooSpec::new(Family::DesignedKSlant { k, c })).unwrap();
            let p = sigma_recursion(&z.apparatus, k + 1).unwrap();
            let r = classify(&p, DEFAULT_CONST_TOL).unwrap();
            assert_eq!(r.k_star, Some(k), "{:?}", r.per_k);
            assert!((r.cot_phi.unwrap() - c).abs() < 1e-5);
        }
    }

    #[test]
    fn invalid_specs() {
        for f in [
            Family::CircularHelix { a: 0.0, b: 1.0 },
            Family::GeneralHelix { phi: 0.0 },
            Family::Salkowski { c: 0.0 },
            Family::ConstantPrecession { mu: 1.0, m: 0.0 },
            Family::PlaneCircle { r: -1.0 },
            Family::DesignedKSlant { k: 2, c: 0.0 },
        ] {
            assert!(
                matches!(generate(&ZooSpec::new(f)), Err(Error::InvalidSpec(_))),
                "{f:?}"
            );
        }
        let short = ZooSpec::new(Family::PlaneCircle { r: 1.0 }).with_samples(10);
        assert!(matches!(generate(&short), Err(Error::InvalidSpec(_))));
        let back = ZooSpec::new(Family::PlaneCircle { r: 1.0 }).with_span(1.0, 1.0);
        assert!(matches!(generate(&back), Err(Error::InvalidSpec(_))));
        let across = ZooSpec::new(Family::ConstantPrecession { mu: 1.0, m: 1.0 }).with_span(0.1, 3.5);
        assert!(matches!(generate(&across), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn salkowski_span_is_cut_at_blow_up() {
        // f blows up at |s - mid| = 1/c = 2
        let spec = ZooSpec::new(Family::Salkowski { c: 0.5 }).with_span(-2.5, 2.5);
        let z = generate(&spec).unwrap();
        assert!(z.span.0 > -2.0 && z.span.1 < 2.0);
        assert_eq!(z.notes.len(), 1);
        let tight = ZooSpec::new(Family::Salkowski { c: 0.5 })
            .with_span(-10.0, 10.0)
            .with_samples(101);
        assert!(matches!(generate(&tight), Err(Error::OdeBlowUp { .. })));
    }

    #[test]
    fn hyperboloid_signatures() {
        for (mu, m) in [(1.0, 1.0), (2.0, 0.5), (1.0, 2.0)] {
            let z = generate(&ZooSpec::new(Family::ConstantPrecession { mu, m })).unwrap();
            let fit = hyperboloid_check(&z.curve, m).unwrap();
            assert!(fit.passed, "{mu} {m} {fit:?}");
        }
        let helix = generate(&ZooSpec::new(Family::CircularHelix { a: 1.0, b: 1.0 })).unwrap();
        match hyperboloid_check(&helix.curve, 1.0) {
            Ok(fit) => assert!(!fit.passed && fit.ratio_error > 0.1, "{fit:?}"),
            Err(e) => assert!(matches!(e, Error::FitDegenerate(_))),
        }
        let circle = generate(&ZooSpec::new(Family::PlaneCircle { r: 1.0 })).unwrap();
        assert!(matches!(
            hyperboloid_check(&circle.curve, 1.0),
            Err(Error::FitDegenerate(_))
        ));
    }

    #[test]
    fn spec_serde_round_trip() {
        let spec = ZooSpec::new(Family::DesignedKSlant { k: 3, c: 0.3 }).with_samples(1001);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"family\":\"designed-k-slant\""));
        let back: ZooSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
