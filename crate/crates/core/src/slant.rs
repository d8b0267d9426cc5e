//! The `psi_k` ladder, the `sigma_k` hierarchy and k-slant classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{ArcSampledCurve, FrenetApparatus};
use crate::geometry::{
    cumulative_integral_runs, derivative_field, valid_runs, Frame, Grid, SampledFunction, SampledVectorField, Vector3,
};
use crate::indicatrix::{angle_between, frame_ladder, sigma_levels};

/// Highest supported level.
pub const K_MAX: usize = 6;
/// Default relative dispersion below which `sigma_k` counts as constant.
pub const DEFAULT_CONST_TOL: f64 = 1e-5;
/// Closed-form and numerical `psi_k` disagreeing by more than this masks the sample.
pub const LADDER_TOL: f64 = 1e-4;
/// Norm below which `psi_k'` is treated as vanishing.
pub const VANISHING_NORM: f64 = 1e-10;

fn check_level(k: usize) -> Result<()> {
    if k > K_MAX {
        Err(Error::LevelTooHigh { level: k, max: K_MAX })
    } else {
        Ok(())
    }
}

/// `sigma_k`, `s_k`, `k_k`, `t_k` for `k = 0..=K`, plus the closed-form frames
/// `(T_k, N_k, B_k)` of every level.
///
/// Level 0 is the curve itself: `s_0 = s`, `k_0 = k`, `t_0 = t`. For `k >= 1`,
/// `k_k = sqrt(1+sigma_{k-1}^2)`, `t_k = sigma_k k_k` and
/// `s_k = int k prod_{j<=k-2} sqrt(1+sigma_j^2) ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlantProfile {
    pub sigmas: Vec<SampledFunction>,
    pub natural_params: Vec<SampledFunction>,
    pub kappas: Vec<SampledFunction>,
    pub taus: Vec<SampledFunction>,
    pub frames: Vec<(Vec<Frame>, Vec<bool>)>,
}

impl SlantProfile {
    pub fn top(&self) -> usize {
        self.sigmas.len() - 1
    }

    pub fn grid(&self) -> &Grid {
        self.sigmas[0].grid()
    }

    /// `T_k` and `B_k` as vector fields.
    pub fn level_fields(&self, k: usize) -> (SampledVectorField, SampledVectorField) {
        let (frames, mask) = &self.frames[k];
        let g = *self.grid();
        let t = SampledVectorField::with_mask(g, frames.iter().map(|f| f.t).collect(), mask.clone());
        let b = SampledVectorField::with_mask(g, frames.iter().map(|f| f.b).collect(), mask.clone());
        (t.expect("valid frames are finite"), b.expect("valid frames are finite"))
    }
}

/// The recursion for `sigma_0..sigma_K` together with natural parameters,
/// curvatures, torsions and frames of each level.
pub fn sigma_recursion(app: &FrenetApparatus, k: usize) -> Result<SlantProfile> {
    check_level(k)?;
    let sigmas = sigma_levels(app, k)?;
    let sq = |s: &SampledFunction| s.map(|v| (1.0 + v * v).sqrt());
    let mut natural_params = vec![cumulative_integral_runs(&SampledFunction::constant(*app.grid(), 1.0))?];
    let mut kappas = vec![app.kappa().clone()];
    let mut taus = vec![app.tau().clone()];
    let mut integrand = app.kappa().clone();
    for j in 1..=k {
        if j >= 2 {
            integrand = integrand.zip_with(&sq(&sigmas[j - 2]), |a, b| a * b);
        }
        natural_params.push(cumulative_integral_runs(&integrand)?);
        let kj = sq(&sigmas[j - 1]);
        taus.push(sigmas[j].zip_with(&kj, |s, r| s * r));
        kappas.push(kj);
    }
    let refs: Vec<&SampledFunction> = sigmas.iter().collect();
    let frames = frame_ladder(app, &refs, k);
    Ok(SlantProfile {
        sigmas,
        natural_params,
        kappas,
        taus,
        frames,
    })
}

/// `psi_0 = curve`, `psi_1 = T`, ..., `psi_{K+2}`, using the closed forms
/// `psi_{j+1} = T_j`. Each closed-form level is compared with the normalized
/// derivative of the level below; samples disagreeing by more than
/// [`LADDER_TOL`] are masked.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiLadder {
    pub psis: Vec<SampledVectorField>,
    /// Largest closed-form vs numerical disagreement per level (index 0 unused).
    pub disagreement: Vec<f64>,
}

impl PsiLadder {
    pub fn top(&self) -> usize {
        self.psis.len() - 1
    }

    /// `B_k = psi_{k+1} x psi_{k+2} / |psi_{k+1} x psi_{k+2}|`, sign kept continuous.
    pub fn binormal(&self, k: usize) -> Result<SampledVectorField> {
        if k + 2 > self.top() {
            return Err(Error::LevelTooHigh {
                level: k,
                max: self.top() - 2,
            });
        }
        let (a, b) = (&self.psis[k + 1], &self.psis[k + 2]);
        let n = a.len();
        let mut out = vec![Vector3::zeros(); n];
        let mut mask = vec![false; n];
        let mut prev: Option<Vector3> = None;
        for i in 0..n {
            let (Some(u), Some(v)) = (a.get(i), b.get(i)) else {
                continue;
            };
            let c = u.cross(v);
            let norm = c.norm();
            if norm < VANISHING_NORM {
                continue;
            }
            let mut c = c / norm;
            if let Some(p) = prev {
                if p.dot(&c) < 0.0 {
                    c = -c;
                }
            }
            prev = Some(c);
            out[i] = c;
            mask[i] = true;
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::CrossProductDegenerate { level: k });
        }
        SampledVectorField::with_mask(*a.grid(), out, mask)
    }
}

fn frames_field(frames: &(Vec<Frame>, Vec<bool>), grid: Grid) -> Result<SampledVectorField> {
    SampledVectorField::with_mask(grid, frames.0.iter().map(|f| f.t).collect(), frames.1.clone())
}

/// Builds the ladder from an already computed profile.
pub fn psi_ladder_with(curve: &ArcSampledCurve, profile: &SlantProfile) -> Result<PsiLadder> {
    let grid = *curve.grid();
    let top = profile.top();
    let mut psis = vec![curve.points().clone()];
    let mut disagreement = vec![0.0];
    for j in 1..=top + 2 {
        let closed = if j - 1 <= top {
            frames_field(&profile.frames[j - 1], grid)?
        } else {
            // T_{top+1} = N_top
            let (frames, mask) = &profile.frames[top];
            SampledVectorField::with_mask(grid, frames.iter().map(|f| f.n).collect(), mask.clone())?
        };
        let d = derivative_field(&psis[j - 1])?;
        let n = grid.len();
        let mut vanishing = 0;
        let mut valid = 0;
        let mut keep = vec![false; n];
        let mut worst: f64 = 0.0;
        for (i, kept) in keep.iter_mut().enumerate() {
            let (Some(dv), Some(cv)) = (d.get(i), closed.get(i)) else {
                continue;
            };
            valid += 1;
            let norm = dv.norm();
            if norm < VANISHING_NORM {
                vanishing += 1;
                continue;
            }
            let gap = (dv / norm - cv).norm();
            worst = worst.max(gap);
            *kept = gap <= LADDER_TOL;
        }
        if valid > 0 && 2 * vanishing > valid {
            return Err(Error::VanishingDerivative { level: j - 1 });
        }
        disagreement.push(worst);
        psis.push(closed.restrict(&keep));
    }
    Ok(PsiLadder { psis, disagreement })
}

/// `psi_0..psi_{K+2}` of a unit-speed curve.
pub fn psi_ladder(curve: &ArcSampledCurve, app: &FrenetApparatus, k: usize) -> Result<PsiLadder> {
    psi_ladder_with(curve, &sigma_recursion(app, k)?)
}

/// Weighted mean and relative dispersion of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStatistic {
    pub k: usize,
    pub mean: Option<f64>,
    pub dev: Option<f64>,
    pub valid: usize,
}

/// Distance in samples from each valid sample to the nearer end of its run.
pub fn run_weights(mask: &[bool]) -> Vec<f64> {
    let mut w = vec![0.0; mask.len()];
    for run in valid_runs(mask) {
        for i in run.clone() {
            w[i] = (i - run.start + 1).min(run.end - i) as f64;
        }
    }
    w
}

/// `(weighted mean, weighted std / (1 + |mean|))`, weights from [`run_weights`].
pub fn constancy(f: &SampledFunction) -> Option<(f64, f64)> {
    let w = run_weights(f.mask());
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mean = f.iter_valid().map(|(i, _, v)| w[i] * v).sum::<f64>() / total;
    let var = f.iter_valid().map(|(i, _, v)| w[i] * (v - mean).powi(2)).sum::<f64>() / total;
    Some((mean, var.sqrt() / (1.0 + mean.abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub k_star: Option<usize>,
    pub cot_phi: Option<f64>,
    pub phi: Option<f64>,
    pub axis: Option<Vector3>,
    pub residual_sigma: Option<f64>,
    pub residual_axis: Option<f64>,
    pub per_k: Vec<LevelStatistic>,
}

/// `phi = arccot(c)` on `(0, pi)`.
pub fn arccot(c: f64) -> f64 {
    1f64.atan2(c)
}

/// Smallest `k` whose `sigma_k` is constant within `const_tol`, with the
/// constant angle and the mean axis at that level.
pub fn classify(profile: &SlantProfile, const_tol: f64) -> Result<ClassificationReport> {
    if profile.sigmas.iter().all(|s| s.valid_count() == 0) {
        return Err(Error::EmptyProfile);
    }
    let per_k: Vec<LevelStatistic> = profile
        .sigmas
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let c = constancy(s);
            LevelStatistic {
                k,
                mean: c.map(|c| c.0),
                dev: c.map(|c| c.1),
                valid: s.valid_count(),
            }
        })
        .collect();
    let hit = per_k.iter().find(|l| matches!(l.dev, Some(d) if d < const_tol));
    let mut report = ClassificationReport {
        k_star: None,
        cot_phi: None,
        phi: None,
        axis: None,
        residual_sigma: None,
        residual_axis: None,
        per_k: per_k.clone(),
    };
    let Some(level) = hit else {
        return Ok(report);
    };
    let k = level.k;
    let cot_phi = level.mean.unwrap();
    let phi = arccot(cot_phi);
    let (t, b) = profile.level_fields(k);
    let d = axis_from_fields(&t, &b, phi)?;
    let (axis, wobble) = mean_axis(&d)?;
    report.k_star = Some(k);
    report.cot_phi = Some(cot_phi);
    report.phi = Some(phi);
    report.axis = Some(axis);
    report.residual_sigma = level.dev;
    report.residual_axis = Some(wobble);
    Ok(report)
}

fn axis_from_fields(t: &SampledVectorField, b: &SampledVectorField, phi: f64) -> Result<SampledVectorField> {
    if !(phi > 0.0 && phi < std::f64::consts::PI) {
        return Err(Error::InvalidAngle(phi));
    }
    let (c, s) = (phi.cos(), phi.sin());
    let n = t.len();
    let mut out = vec![Vector3::zeros(); n];
    let mut mask = vec![false; n];
    for i in 0..n {
        if let (Some(tv), Some(bv)) = (t.get(i), b.get(i)) {
            out[i] = tv * c + bv * s;
            mask[i] = true;
        }
    }
    let Some(first) = mask.iter().position(|&m| m) else {
        return Err(Error::MaskedEverywhere);
    };
    if t.vectors()[first].dot(&out[first]) < 0.0 {
        out.iter_mut().for_each(|v| *v = -*v);
    }
    SampledVectorField::with_mask(*t.grid(), out, mask)
}

/// `d(s) = cos(phi) T_k + sin(phi) B_k` with `T_k = psi_{k+1}` and `B_k` from
/// the ladder; the overall sign makes `<psi_{k+1}, d>` positive at the first
/// valid sample.
pub fn axis_field(ladder: &PsiLadder, profile: &SlantProfile, k: usize, phi: f64) -> Result<SampledVectorField> {
    if k > profile.top() {
        return Err(Error::LevelTooHigh {
            level: k,
            max: profile.top(),
        });
    }
    let b = ladder.binormal(k)?;
    axis_from_fields(&ladder.psis[k + 1], &b, phi)
}

/// Normalized mean direction of a unit field and the largest angle any
/// sample makes with it.
pub fn mean_axis(field: &SampledVectorField) -> Result<(Vector3, f64)> {
    let sum: Vector3 = (0..field.len()).filter_map(|i| field.get(i)).sum();
    let norm = sum.norm();
    if field.valid_count() == 0 || norm == 0.0 {
        return Err(Error::MaskedEverywhere);
    }
    let axis = sum / norm;
    let wobble = (0..field.len())
        .filter_map(|i| field.get(i))
        .map(|v| angle_between(v, &axis))
        .fold(0.0, f64::max);
    Ok((axis, wobble))
}

/// `max |<v(s), d> - mean <v, d>|` over valid samples.
pub fn constant_angle_residual(field: &SampledVectorField, d: &Vector3) -> f64 {
    let dots: Vec<f64> = (0..field.len())
        .filter_map(|i| field.get(i).map(|v| v.dot(d)))
        .collect();
    if dots.is_empty() {
        return 0.0;
    }
    let mean = dots.iter().sum::<f64>() / dots.len() as f64;
    dots.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max)
}
