//! Spherical indicatrices of a space curve and their Frenet apparatuses,
//! both in closed form (from `f`, `sigma`, `Gamma`, `Lambda`) and by direct
//! numerical differentiation of the indicatrix points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{frenet_apparatus, reparameterize_points, FrenetApparatus};
use crate::geometry::{
    cumulative_integral_runs, derivative, derivative_field, longest_run, Frame, MonotoneCubic, SampledFunction,
    SampledVectorField, Vector3,
};

/// Below this max |derivative| a level is treated as exactly constant.
pub const ZERO_DERIVATIVE_TOL: f64 = 1e-10;
/// Relative floor on |f| for the binormal closed form.
pub const F_FLOOR_REL: f64 = 1e-6;
/// Samples dropped at each end of an oracle apparatus before comparison.
pub const ORACLE_TRIM: usize = 3;
/// Oracle runs are cut where the indicatrix speed drops below this fraction of its max.
pub const ORACLE_MIN_SPEED_REL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndicatrixKind {
    Tangent,
    Normal,
    Binormal,
    Psi3,
}

impl IndicatrixKind {
    pub const ALL: [IndicatrixKind; 4] = [
        IndicatrixKind::Tangent,
        IndicatrixKind::Normal,
        IndicatrixKind::Binormal,
        IndicatrixKind::Psi3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IndicatrixKind::Tangent => "tangent",
            IndicatrixKind::Normal => "normal",
            IndicatrixKind::Binormal => "binormal",
            IndicatrixKind::Psi3 => "psi3",
        }
    }

    /// Suffix used in file names: `t`, `n`, `b`, `psi3`.
    /// Nested derivatives of `f` behind the closed-form torsion.
    pub fn derivative_depth(&self) -> usize {
        match self {
            IndicatrixKind::Tangent | IndicatrixKind::Binormal => 1,
            IndicatrixKind::Normal => 2,
            IndicatrixKind::Psi3 => 3,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            IndicatrixKind::Tangent => "t",
            IndicatrixKind::Normal => "n",
            IndicatrixKind::Binormal => "b",
            IndicatrixKind::Psi3 => "psi3",
        }
    }
}

/// `f = sigma_0`, `sigma = sigma_1`, `Gamma = sigma_2`, `Lambda = sigma_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlantFunctions {
    pub f: SampledFunction,
    pub sigma: SampledFunction,
    pub gamma: SampledFunction,
    pub lambda_: SampledFunction,
}

impl SlantFunctions {
    pub fn level(&self, k: usize) -> Option<&SampledFunction> {
        match k {
            0 => Some(&self.f),
            1 => Some(&self.sigma),
            2 => Some(&self.gamma),
            3 => Some(&self.lambda_),
            _ => None,
        }
    }

    pub fn levels(&self) -> [&SampledFunction; 4] {
        [&self.f, &self.sigma, &self.gamma, &self.lambda_]
    }
}

/// `sigma_0 = t/k`, and for `j >= 1`
/// `sigma_j = sigma_{j-1}' / (k prod_{i<j-1} sqrt(1+sigma_i^2) (1+sigma_{j-1}^2)^{3/2})`.
///
/// A level whose derivative is below [`ZERO_DERIVATIVE_TOL`] everywhere is set to exact zero.
pub(crate) fn sigma_levels(app: &FrenetApparatus, top: usize) -> Result<Vec<SampledFunction>> {
    let kappa = app.kappa();
    let f = app.tau().zip_with(kappa, |t, k| t / k);
    if f.valid_count() == 0 {
        return Err(Error::DegenerateCurve("f = t/k valid nowhere".into()));
    }
    let mut levels = vec![f];
    // k * prod_{i<j-1} sqrt(1+sigma_i^2), updated as levels are added
    let mut scale = kappa.clone();
    for j in 1..=top {
        let prev = &levels[j - 1];
        if j >= 2 {
            scale = scale.zip_with(&levels[j - 2], |a, s| a * (1.0 + s * s).sqrt());
        }
        let d = derivative(prev)?;
        let denom = scale.zip_with(prev, |a, s| a * (1.0 + s * s).powf(1.5));
        let next = if d.max_abs() < ZERO_DERIVATIVE_TOL {
            d.zip_with(&denom, |_, _| 0.0)
        } else {
            d.zip_with(&denom, |a, b| a / b)
        };
        levels.push(next);
    }
    Ok(levels)
}

/// `f`, `sigma`, `Gamma`, `Lambda` of a Frenet apparatus.
pub fn slant_functions(app: &FrenetApparatus) -> Result<SlantFunctions> {
    let mut it = sigma_levels(app, 3)?.into_iter();
    Ok(SlantFunctions {
        f: it.next().unwrap(),
        sigma: it.next().unwrap(),
        gamma: it.next().unwrap(),
        lambda_: it.next().unwrap(),
    })
}

/// One step of the frame recursion: `(T, N, B) -> (N, (-T + sB)/r, (sT + B)/r)`
/// with `r = sqrt(1 + s^2)`.
pub(crate) fn frame_step(f: &Frame, s: f64) -> Frame {
    let r = (1.0 + s * s).sqrt();
    Frame {
        t: f.n,
        n: (f.b * s - f.t) / r,
        b: (f.t * s + f.b) / r,
    }
}

/// Frames of the successive spherical images: level 0 is the Frenet frame,
/// level `j + 1` is obtained from level `j` with `sigma_j`.
pub(crate) fn frame_ladder(
    app: &FrenetApparatus,
    sigmas: &[&SampledFunction],
    top: usize,
) -> Vec<(Vec<Frame>, Vec<bool>)> {
    let n = app.len();
    let mut out: Vec<(Vec<Frame>, Vec<bool>)> = vec![(app.frames().to_vec(), app.frame_mask().to_vec())];
    for j in 0..top.min(sigmas.len()) {
        let (prev, pmask) = &out[j];
        let s = sigmas[j];
        let mut frames = vec![Frame::nan(); n];
        let mut mask = vec![false; n];
        for i in 0..n {
            if let (true, Some(v)) = (pmask[i], s.get(i)) {
                frames[i] = frame_step(&prev[i], v);
                mask[i] = true;
            }
        }
        out.push((frames, mask));
    }
    out
}

/// Closed-form Frenet apparatus of a spherical indicatrix, on the base grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatrixApparatus {
    pub kind: IndicatrixKind,
    /// Arc length of the indicatrix as a function of the base arc length.
    pub natural_param: SampledFunction,
    pub frames: Vec<Frame>,
    pub frame_mask: Vec<bool>,
    pub kappa: SampledFunction,
    pub tau: SampledFunction,
    pub ratio: SampledFunction,
    pub mask: Vec<bool>,
}

impl IndicatrixApparatus {
    pub fn frame(&self, i: usize) -> Option<&Frame> {
        self.frame_mask[i].then(|| &self.frames[i])
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

fn sqrt1p(s: &SampledFunction) -> SampledFunction {
    s.map(|v| (1.0 + v * v).sqrt())
}

/// Closed-form apparatus of the chosen indicatrix.
///
/// Tangent: level-1 frame, `k_t = sqrt(1+f^2)`, `t_t = sigma k_t`, `s_t = int k`.
/// Normal: level-2 frame, `k_n = sqrt(1+sigma^2)`, `t_n = Gamma k_n`, `s_n = int k sqrt(1+f^2)`.
/// Psi3: level-3 frame, `k_3 = sqrt(1+Gamma^2)`, `t_3 = Lambda k_3`,
/// `s_3 = int k sqrt(1+f^2) sqrt(1+sigma^2)`.
/// Binormal: `T_b = -sgn(f) N`, `N_b = sgn(f)(T - fB)/sqrt(1+f^2)`,
/// `B_b = (fT + B)/sqrt(1+f^2)`, `k_b = sqrt(1+f^2)/|f|`,
/// `t_b = -sigma sqrt(1+f^2)/f`, `s_b = int |t|`; samples with `|f|` below the
/// floor are masked.
pub fn closed_form_apparatus(
    app: &FrenetApparatus,
    funcs: &SlantFunctions,
    kind: IndicatrixKind,
) -> Result<IndicatrixApparatus> {
    let n = app.len();
    let kappa = app.kappa();
    let (frames, frame_mask, k_ind, t_ind, integrand) = match kind {
        IndicatrixKind::Tangent | IndicatrixKind::Normal | IndicatrixKind::Psi3 => {
            let level = match kind {
                IndicatrixKind::Tangent => 1,
                IndicatrixKind::Normal => 2,
                _ => 3,
            };
            let sig = funcs.levels();
            let mut ladder = frame_ladder(app, &sig, level);
            let (frames, fmask) = ladder.swap_remove(level);
            let k_ind = sqrt1p(sig[level - 1]);
            let t_ind = sig[level].zip_with(&k_ind, |s, k| s * k);
            let mut integrand = kappa.clone();
            for s in &sig[..level - 1] {
                integrand = integrand.zip_with(&sqrt1p(s), |a, b| a * b);
            }
            (frames, fmask, k_ind, t_ind, integrand)
        }
        IndicatrixKind::Binormal => {
            let f = &funcs.f;
            let floor = F_FLOOR_REL * f.max_abs();
            let ok: Vec<bool> = (0..n)
                .map(|i| matches!(f.get(i), Some(v) if v.abs() >= floor && v != 0.0))
                .collect();
            if !ok.iter().any(|&m| m) {
                return Err(Error::FFloorViolation);
            }
            let f = f.restrict(&ok);
            let mut frames = vec![Frame::nan(); n];
            let mut fmask = vec![false; n];
            for i in 0..n {
                if let (Some(fr), Some(v)) = (app.frame(i), f.get(i)) {
                    let r = (1.0 + v * v).sqrt();
                    let sg = v.signum();
                    frames[i] = Frame {
                        t: -fr.n * sg,
                        n: (fr.t - fr.b * v) * (sg / r),
                        b: (fr.t * v + fr.b) / r,
                    };
                    fmask[i] = true;
                }
            }
            let k_ind = f.map(|v| (1.0 + v * v).sqrt() / v.abs());
            let t_ind = funcs.sigma.zip_with(&f, |s, v| -s * (1.0 + v * v).sqrt() / v);
            let integrand = app.tau().restrict(&ok).map(f64::abs);
            (frames, fmask, k_ind, t_ind, integrand)
        }
    };
    let natural_param = cumulative_integral_runs(&integrand)?;
    let ratio = t_ind.zip_with(&k_ind, |t, k| t / k);
    let mask = (0..n)
        .map(|i| frame_mask[i] && k_ind.is_valid(i) && t_ind.is_valid(i) && natural_param.is_valid(i))
        .collect();
    Ok(IndicatrixApparatus {
        kind,
        natural_param,
        frames,
        frame_mask,
        kappa: k_ind,
        tau: t_ind,
        ratio,
        mask,
    })
}

/// Points of the indicatrix on the unit sphere, on the base grid.
///
/// Psi3 is `(-T + fB)/sqrt(1+f^2)`, with `f = t/k` taken from the apparatus.
pub fn indicatrix_curve(app: &FrenetApparatus, kind: IndicatrixKind) -> Result<SampledVectorField> {
    let n = app.len();
    let mut vectors = vec![Vector3::zeros(); n];
    let mut mask = vec![false; n];
    for i in 0..n {
        let Some(fr) = app.frame(i) else { continue };
        let v = match kind {
            IndicatrixKind::Tangent => fr.t,
            IndicatrixKind::Normal => fr.n,
            IndicatrixKind::Binormal => fr.b,
            IndicatrixKind::Psi3 => {
                let (Some(k), Some(t)) = (app.kappa().get(i), app.tau().get(i)) else {
                    continue;
                };
                let f = t / k;
                (fr.b * f - fr.t) / (1.0 + f * f).sqrt()
            }
        };
        vectors[i] = v;
        mask[i] = true;
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::MaskedEverywhere);
    }
    SampledVectorField::with_mask(*app.grid(), vectors, mask)
}

/// Independent numerical apparatus of an indicatrix, together with the base
/// index range it was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleApparatus {
    pub apparatus: FrenetApparatus,
    pub base_range: std::ops::Range<usize>,
}

/// Longest run of valid indicatrix samples where the indicatrix is not stalled.
pub fn oracle_range(field: &SampledVectorField) -> Result<std::ops::Range<usize>> {
    let speed = derivative_field(field)?.norms();
    let cut = ORACLE_MIN_SPEED_REL * speed.max_abs();
    let ok: Vec<bool> = (0..field.len())
        .map(|i| matches!(speed.get(i), Some(v) if v >= cut && v > 0.0))
        .collect();
    longest_run(&ok).ok_or(Error::MaskedEverywhere)
}

/// Treats the indicatrix points as a raw parametric curve: reparameterizes
/// by arc length and differentiates numerically. No closed forms are used.
pub fn oracle_apparatus(app: &FrenetApparatus, kind: IndicatrixKind) -> Result<OracleApparatus> {
    let field = indicatrix_curve(app, kind)?;
    let range = oracle_range(&field)?;
    oracle_apparatus_on(&field, range)
}

/// As [`oracle_apparatus`] on a given index range of an indicatrix field.
pub fn oracle_apparatus_on(field: &SampledVectorField, range: std::ops::Range<usize>) -> Result<OracleApparatus> {
    let params: Vec<f64> = range.clone().map(|i| field.grid().at(i)).collect();
    let points = field.vectors()[range.clone()].to_vec();
    let curve = reparameterize_points(&params, &points)?;
    Ok(OracleApparatus {
        apparatus: frenet_apparatus(&curve)?,
        base_range: range,
    })
}

/// Deviations between a closed-form apparatus and its oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub kappa_rel: f64,
    pub tau_rel: f64,
    pub frame_angle: f64,
    /// `|oracle t/k - closed-form ratio|`.
    pub ratio_dev: f64,
    pub samples: usize,
}

impl OracleComparison {
    pub fn max_scalar(&self) -> f64 {
        self.kappa_rel.max(self.tau_rel)
    }
}

pub(crate) fn angle_between(a: &Vector3, b: &Vector3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

struct Resampler {
    knots: Vec<f64>,
    kappa: MonotoneCubic,
    tau: MonotoneCubic,
    frame: [MonotoneCubic; 9],
}

impl Resampler {
    fn new(app: &FrenetApparatus, trim: usize) -> Result<Self> {
        let run = longest_run(app.mask()).ok_or(Error::MaskedEverywhere)?;
        if run.len() < 2 * trim + 4 {
            return Err(Error::TooFewSamples {
                needed: 2 * trim + 4,
                got: run.len(),
            });
        }
        let idx: Vec<usize> = (run.start + trim..run.end - trim).collect();
        let x: Vec<f64> = idx.iter().map(|&i| app.grid().at(i)).collect();
        let pick = |g: &dyn Fn(usize) -> f64| -> Result<MonotoneCubic> {
            let y: Vec<f64> = idx.iter().map(|&i| g(i)).collect();
            MonotoneCubic::new(&x, &y)
        };
        let fr = app.frames();
        let comp = |v: usize, c: usize| -> Result<MonotoneCubic> {
            pick(&|i| {
                let f = &fr[i];
                [f.t, f.n, f.b][v][c]
            })
        };
        Ok(Resampler {
            kappa: pick(&|i| app.kappa().values()[i])?,
            tau: pick(&|i| app.tau().values()[i])?,
            frame: [
                comp(0, 0)?,
                comp(0, 1)?,
                comp(0, 2)?,
                comp(1, 0)?,
                comp(1, 1)?,
                comp(1, 2)?,
                comp(2, 0)?,
                comp(2, 1)?,
                comp(2, 2)?,
            ],
            knots: x,
        })
    }

    fn covers(&self, u: f64) -> bool {
        u >= self.knots[0] && u <= *self.knots.last().unwrap()
    }

    fn vector(&self, v: usize, u: f64) -> Vector3 {
        Vector3::new(
            self.frame[3 * v].eval(u),
            self.frame[3 * v + 1].eval(u),
            self.frame[3 * v + 2].eval(u),
        )
    }
}

/// `mask` with the `trim` outermost samples of every valid run cleared.
pub fn interior_mask(mask: &[bool], trim: usize) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for run in crate::geometry::valid_runs(mask) {
        if run.len() > 2 * trim {
            out[run.start + trim..run.end - trim].iter_mut().for_each(|m| *m = true);
        }
    }
    out
}

/// Closed-form samples this close to a run end carry one-sided stencil error
/// from every nested derivative level.
pub fn closed_form_trim(kind: IndicatrixKind) -> usize {
    2 * kind.derivative_depth()
}

/// Aligns the oracle with the closed form by natural parameter and reports
/// the largest deviations. The oracle is resampled by monotone cubic
/// interpolation at `s_ind(s_i) - s_ind(s_start)`; the outermost
/// [`ORACLE_TRIM`] oracle samples are excluded, and so are closed-form samples
/// within `closed_trim` of a run end. Scalar errors are relative to
/// `max(|closed|, 1)`.
pub fn compare_with_oracle(
    closed: &IndicatrixApparatus,
    oracle: &OracleApparatus,
    closed_trim: usize,
) -> Result<OracleComparison> {
    let keep = interior_mask(&closed.mask, closed_trim);
    let range = oracle.base_range.clone();
    let np = &closed.natural_param;
    let origin = np.get(range.start).ok_or(Error::MaskedRegion { index: range.start })?;
    let res = Resampler::new(&oracle.apparatus, ORACLE_TRIM)?;
    let mut out = OracleComparison {
        kappa_rel: 0.0,
        tau_rel: 0.0,
        frame_angle: 0.0,
        ratio_dev: 0.0,
        samples: 0,
    };
    for i in range {
        if !keep[i] {
            continue;
        }
        let Some(u) = np.get(i).map(|v| v - origin) else {
            continue;
        };
        if !res.covers(u) {
            continue;
        }
        let (kc, tc) = (closed.kappa.values()[i], closed.tau.values()[i]);
        let (ko, to) = (res.kappa.eval(u), res.tau.eval(u));
        out.kappa_rel = out.kappa_rel.max((ko - kc).abs() / kc.abs().max(1.0));
        out.tau_rel = out.tau_rel.max((to - tc).abs() / tc.abs().max(1.0));
        out.ratio_dev = out.ratio_dev.max((to / ko - closed.ratio.values()[i]).abs());
        let f = &closed.frames[i];
        for (v, w) in [f.t, f.n, f.b].iter().enumerate() {
            out.frame_angle = out.frame_angle.max(angle_between(&res.vector(v, u), w));
        }
        out.samples += 1;
    }
    if out.samples == 0 {
        return Err(Error::MaskedEverywhere);
    }
    Ok(out)
}

/// Closed form, oracle and comparison for one kind.
pub fn verify_kind(
    app: &FrenetApparatus,
    funcs: &SlantFunctions,
    kind: IndicatrixKind,
) -> Result<(IndicatrixApparatus, OracleApparatus, OracleComparison)> {
    let closed = closed_form_apparatus(app, funcs, kind)?;
    let field = indicatrix_curve(app, kind)?;
    // keep the oracle on a stretch where the closed form is defined
    let usable = field.restrict(&closed.mask);
    let range = oracle_range(&usable)?;
    let oracle = oracle_apparatus_on(&field, range)?;
    let cmp = compare_with_oracle(&closed, &oracle, closed_form_trim(kind))?;
    Ok((closed, oracle, cmp))
}

/// `max |B_t - W/|W||` with the Darboux vector `W = tT + kB`.
pub fn darboux_deviation(app: &FrenetApparatus, funcs: &SlantFunctions) -> f64 {
    let bt = frame_ladder(app, &[&funcs.f], 1).swap_remove(1);
    (0..app.len())
        .filter(|&i| bt.1[i])
        .filter_map(|i| {
            let fr = app.frame(i)?;
            let w = fr.t * app.tau().get(i)? + fr.b * app.kappa().get(i)?;
            Some((bt.0[i].b - w.normalize()).norm())
        })
        .fold(0.0, f64::max)
}

/// Max over samples of `|N_t + sgn(f) N_b|` and `|B_t - B_b|`.
pub fn tangent_binormal_deviation(
    tangent: &IndicatrixApparatus,
    binormal: &IndicatrixApparatus,
    f: &SampledFunction,
) -> f64 {
    (0..tangent.frames.len())
        .filter_map(|i| {
            let a = tangent.frame(i)?;
            let b = binormal.frame(i)?;
            let sg = f.get(i)?.signum();
            Some((a.n + b.n * sg).norm().max((a.b - b.b).norm()))
        })
        .fold(0.0, f64::max)
}

/// Deviation of each point from the unit sphere.
pub fn sphere_deviation(field: &SampledVectorField) -> f64 {
    (0..field.len())
        .filter_map(|i| field.get(i).map(|p| (p.norm() - 1.0).abs()))
        .fold(0.0, f64::max)
}
