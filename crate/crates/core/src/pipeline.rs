//! End-to-end analysis: inputs, the report document, CSV and JSON I/O, plot
//! data and batch runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{frenet_apparatus, reparameterize_points, ArcSampledCurve, FrenetApparatus};
use crate::geometry::{SampledFunction, Vector3};
use crate::indicatrix::{
    closed_form_apparatus, darboux_deviation, indicatrix_curve, slant_functions, sphere_deviation, verify_kind,
    IndicatrixKind, SlantFunctions,
};
use crate::slant::{
    axis_field, classify, constant_angle_residual, mean_axis, psi_ladder_with, sigma_recursion, ClassificationReport,
    SlantProfile, DEFAULT_CONST_TOL, K_MAX,
};
use crate::zoo::{generate, ZooCurve, ZooSpec, ZooTruth};

/// Environment variable overriding the default `const_tol`.
pub const CONST_TOL_ENV: &str = "SLANT_DEFAULT_TOL";
/// Default number of levels above the curve.
pub const DEFAULT_K: usize = 4;

/// Exit codes of the command-line front end.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INPUT_ERROR: i32 = 2;
    pub const NO_CLASSIFICATION: i32 = 3;
    pub const DEGENERATE: i32 = 4;
}

/// Maps an error to its exit code: input problems 2, geometry problems 4.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TooFewSamples { .. }
        | Error::NonUniformGrid { .. }
        | Error::NonIncreasingGrid { .. }
        | Error::LengthMismatch { .. }
        | Error::NonFinite { .. }
        | Error::RangeOutOfGrid { .. }
        | Error::NonOrthonormalSeed { .. }
        | Error::InvalidFrame { .. }
        | Error::NegativeKappa { .. }
        | Error::LevelTooHigh { .. }
        | Error::InvalidAngle(_)
        | Error::InvalidSpec(_)
        | Error::Parse(_)
        | Error::Io(_) => exit::INPUT_ERROR,
        Error::MaskedRegion { .. }
        | Error::SingularSpeed { .. }
        | Error::NotUnitSpeed { .. }
        | Error::DegenerateCurve(_)
        | Error::MaskedEverywhere
        | Error::FFloorViolation
        | Error::VanishingDerivative { .. }
        | Error::EmptyProfile
        | Error::CrossProductDegenerate { .. }
        | Error::OdeBlowUp { .. }
        | Error::FitDegenerate(_) => exit::DEGENERATE,
    }
}

/// Verification thresholds, defaulted in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub const_tol: f64,
    /// Relative scalar deviation allowed between closed form and oracle.
    pub oracle_rel: f64,
    /// Frame angle allowed between closed form and oracle, in radians.
    pub oracle_angle: f64,
    pub ratio_closed: f64,
    pub ratio_oracle: f64,
    pub axis: f64,
    pub darboux: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            const_tol: DEFAULT_CONST_TOL,
            oracle_rel: 1e-3,
            oracle_angle: 1e-3,
            ratio_closed: 1e-10,
            ratio_oracle: 1e-3,
            axis: 1e-4,
            darboux: 1e-9,
        }
    }
}

/// `const_tol` from `flag`, else from [`CONST_TOL_ENV`], else the default.
pub fn resolve_const_tol(flag: Option<f64>, env: Option<&str>) -> Result<f64> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(s)) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("{CONST_TOL_ENV}={s:?} is not a number")))?,
        (None, None) => DEFAULT_CONST_TOL,
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidSpec(format!("const_tol must be positive, got {tol}")));
    }
    Ok(tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    /// A generated fixture.
    Zoo(ZooSpec),
    /// A points CSV with header `s,x,y,z`.
    Points(PathBuf),
}

/// Where the Frenet apparatus of a fixture comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApparatusSource {
    /// The fixture's exact or integrated apparatus.
    #[default]
    Fixture,
    /// Differentiate the fixture's sampled positions, as for a points file.
    Positions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub input: InputSource,
    pub k: usize,
    pub apparatus: ApparatusSource,
    pub verify_lemmas: bool,
    pub format: OutputFormat,
    pub tolerances: Tolerances,
    /// Truth sidecar to compare a points file against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
}

impl AnalysisConfig {
    pub fn new(input: InputSource) -> Self {
        AnalysisConfig {
            input,
            k: DEFAULT_K,
            apparatus: ApparatusSource::default(),
            verify_lemmas: false,
            format: OutputFormat::default(),
            tolerances: Tolerances::default(),
            truth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > K_MAX {
            return Err(Error::LevelTooHigh {
                level: self.k,
                max: K_MAX,
            });
        }
        let t = &self.tolerances;
        let all = [
            t.const_tol,
            t.oracle_rel,
            t.oracle_angle,
            t.ratio_closed,
            t.ratio_oracle,
            t.axis,
            t.darboux,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidSpec("tolerances must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Per-sample values; `null` marks a masked sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub s: Vec<f64>,
    pub kappa: Vec<Option<f64>>,
    pub tau: Vec<Option<f64>>,
    pub f: Vec<Option<f64>>,
    /// `sigma_1..sigma_K`.
    pub sigma: Vec<Vec<Option<f64>>>,
    pub frame_mask: Vec<bool>,
}

fn column(f: &SampledFunction) -> Vec<Option<f64>> {
    (0..f.len()).map(|i| f.get(i).filter(|v| v.is_finite())).collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Outcome of a check that may not apply to every input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check<T> {
    Value(T),
    Skipped(String),
}

impl<T> Check<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Check::Value(v) => Some(v),
            Check::Skipped(_) => None,
        }
    }

    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Check::Value(v),
            Err(e) => Check::Skipped(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    /// `max |t/k - expected|` on the closed-form path.
    pub closed: Option<f64>,
    /// `max |t/k - expected|` on the oracle path, when lemmas are verified.
    pub oracle: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub kappa_rel: Option<f64>,
    pub tau_rel: Option<f64>,
    pub frame_angle: Option<f64>,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisCheck {
    pub k: usize,
    pub axis: Vector3,
    pub wobble: f64,
    /// Residual of `psi_{k+1}` against the mean axis.
    pub psi_residual: f64,
    /// Residual of `B_k` against the mean axis.
    pub binormal_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaChecks {
    pub frenet_residual: Option<f64>,
    pub darboux: Option<f64>,
    pub darboux_passed: bool,
    /// Largest distance of the indicatrix points from the unit sphere, per kind.
    pub sphere: BTreeMap<String, Check<f64>>,
    pub ratio_identities: BTreeMap<String, Check<RatioCheck>>,
    /// Present only with `verify_lemmas`.
    pub oracle: Option<BTreeMap<String, Check<OracleCheck>>>,
    pub axis: Check<AxisCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison {
    pub expected_k_star: usize,
    pub found_k_star: Option<usize>,
    pub expected_cot_phi: f64,
    pub found_cot_phi: Option<f64>,
    pub cot_phi_error: Option<f64>,
    /// Same `k_star` and `|cot_phi error| <= const_tol (1 + |cot_phi|)`.
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: AnalysisConfig,
    pub samples: SampleTable,
    pub classification: ClassificationReport,
    pub lemma_checks: LemmaChecks,
    pub truth_comparison: Option<TruthComparison>,
}

impl ReportDocument {
    /// Exit code for a finished analysis.
    pub fn exit_code(&self) -> i32 {
        if self.classification.k_star.is_some() {
            exit::SUCCESS
        } else {
            exit::NO_CLASSIFICATION
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The sample table as CSV: `s,kappa,tau,f,sigma_1..sigma_K,frame_valid`.
    pub fn samples_csv(&self) -> String {
        let t = &self.samples;
        let mut header = vec!["s".to_string(), "kappa".into(), "tau".into(), "f".into()];
        header.extend((1..=t.sigma.len()).map(|k| format!("sigma_{k}")));
        header.push("frame_valid".into());
        let mut out = header.join(",");
        out.push('\n');
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for i in 0..t.s.len() {
            let mut row = vec![t.s[i].to_string(), cell(t.kappa[i]), cell(t.tau[i]), cell(t.f[i])];
            row.extend(t.sigma.iter().map(|c| cell(c[i])));
            row.push(u8::from(t.frame_mask[i]).to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// The report rendered in the configured format.
    pub fn render(&self) -> String {
        match self.config.format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.samples_csv(),
        }
    }
}

/// Everything computed along the way, for callers that need more than the report.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub curve: ArcSampledCurve,
    pub apparatus: FrenetApparatus,
    pub funcs: SlantFunctions,
    pub profile: SlantProfile,
    pub report: ReportDocument,
}

/// Truth sidecar written next to a generated points file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub spec: ZooSpec,
    pub truth: ZooTruth,
    pub span: (f64, f64),
    pub samples: usize,
    pub notes: Vec<String>,
}

impl TruthSidecar {
    pub fn of(z: &ZooCurve) -> Self {
        TruthSidecar {
            spec: z.spec,
            truth: z.truth.clone(),
            span: z.span,
            samples: z.curve.len(),
            notes: z.notes.clone(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }
}

/// Sidecar path for a points file: `<dir>/<stem>.truth.json`.
pub fn sidecar_path(points: &Path) -> PathBuf {
    let stem = points
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    points.with_file_name(format!("{stem}.truth.json"))
}

/// Points as CSV with header `s,x,y,z`; floats in shortest round-trip form.
pub fn points_csv(curve: &ArcSampledCurve) -> String {
    let mut out = String::from("s,x,y,z\n");
    for (s, p) in curve.grid().values().iter().zip(curve.positions()) {
        out.push_str(&format!("{s},{},{},{}\n", p.x, p.y, p.z));
    }
    out
}

/// Parses a points CSV with header `s,x,y,z`.
pub fn parse_points(text: &str) -> Result<(Vec<f64>, Vec<Vector3>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["s", "x", "y", "z"] {
        return Err(Error::Parse(format!(
            "expected header s,x,y,z, got {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut params = Vec::new();
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
        let mut v = [0.0; 4];
        for (j, field) in record.iter().enumerate() {
            v[j] = field
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: {field:?} is not a number", row + 1)))?;
            if !v[j].is_finite() {
                return Err(Error::NonFinite { index: row });
            }
        }
        params.push(v[0]);
        points.push(Vector3::new(v[1], v[2], v[3]));
    }
    Ok((params, points))
}

pub fn read_points(path: &Path) -> Result<(Vec<f64>, Vec<Vector3>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_points(&text)
}

/// Generates a fixture and writes its points CSV and truth sidecar.
/// Returns the sidecar path.
pub fn write_fixture(spec: &ZooSpec, points: &Path) -> Result<(ZooCurve, PathBuf)> {
    let z = generate(spec)?;
    write_file(points, &points_csv(&z.curve))?;
    let side = sidecar_path(points);
    write_file(&side, &TruthSidecar::of(&z).to_json())?;
    Ok((z, side))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load(config: &AnalysisConfig) -> Result<(ArcSampledCurve, FrenetApparatus, Option<ZooTruth>)> {
    match &config.input {
        InputSource::Zoo(spec) => {
            let z = generate(spec)?;
            match config.apparatus {
                ApparatusSource::Fixture => Ok((z.curve, z.apparatus, Some(z.truth))),
                ApparatusSource::Positions => {
                    let curve = reparameterize_points(&z.curve.grid().values(), z.curve.positions())?;
                    let app = frenet_apparatus(&curve)?;
                    Ok((curve, app, Some(z.truth)))
                }
            }
        }
        InputSource::Points(path) => {
            let (params, points) = read_points(path)?;
            let curve = reparameterize_points(&params, &points)?;
            let app = frenet_apparatus(&curve)?;
            let truth = match &config.truth {
                Some(p) => Some(TruthSidecar::read(p)?.truth),
                None => None,
            };
            Ok((curve, app, truth))
        }
    }
}

fn expected_ratio(funcs: &SlantFunctions, kind: IndicatrixKind) -> SampledFunction {
    match kind {
        IndicatrixKind::Tangent => funcs.sigma.clone(),
        IndicatrixKind::Normal => funcs.gamma.clone(),
        // signed curvature sqrt(1+f^2)/f gives t/k = -sigma; the unsigned
        // curvature carries the sign of f
        IndicatrixKind::Binormal => funcs.sigma.zip_with(&funcs.f, |s, f| -s * f.signum()),
        IndicatrixKind::Psi3 => funcs.lambda_.clone(),
    }
}

fn max_gap(a: &SampledFunction, b: &SampledFunction) -> Option<f64> {
    a.iter_valid()
        .filter_map(|(i, _, v)| b.get(i).map(|w| (v - w).abs()))
        .fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
}

fn ratio_check(
    app: &FrenetApparatus,
    funcs: &SlantFunctions,
    kind: IndicatrixKind,
    verify: bool,
    tol: &Tolerances,
) -> Result<(RatioCheck, Option<OracleCheck>)> {
    let expected = expected_ratio(funcs, kind);
    if !verify {
        let closed = closed_form_apparatus(app, funcs, kind)?;
        let gap = max_gap(&closed.ratio, &expected).and_then(finite);
        let passed = gap.is_some_and(|g| g < tol.ratio_closed);
        return Ok((
            RatioCheck {
                closed: gap,
                oracle: None,
                passed,
            },
            None,
        ));
    }
    let (closed, _, cmp) = verify_kind(app, funcs, kind)?;
    let gap = max_gap(&closed.ratio, &expected).and_then(finite);
    // the oracle ratio is compared with the closed-form ratio sample by sample
    let oracle_gap = gap.map(|g| g + cmp.ratio_dev).and_then(finite);
    let passed = gap.is_some_and(|g| g < tol.ratio_closed) && oracle_gap.is_some_and(|g| g < tol.ratio_oracle);
    let oracle = OracleCheck {
        kappa_rel: finite(cmp.kappa_rel),
        tau_rel: finite(cmp.tau_rel),
        frame_angle: finite(cmp.frame_angle),
        samples: cmp.samples,
        passed: cmp.samples > 0
            && cmp.kappa_rel < tol.oracle_rel
            && cmp.tau_rel < tol.oracle_rel
            && cmp.frame_angle < tol.oracle_angle,
    };
    Ok((
        RatioCheck {
            closed: gap,
            oracle: oracle_gap,
            passed,
        },
        Some(oracle),
    ))
}

/// Axis and constant-angle residuals at level `k`.
pub fn axis_check(curve: &ArcSampledCurve, profile: &SlantProfile, k: usize, phi: f64, tol: f64) -> Result<AxisCheck> {
    let ladder = psi_ladder_with(curve, profile)?;
    let field = axis_field(&ladder, profile, k, phi)?;
    let (axis, wobble) = mean_axis(&field)?;
    let psi_residual = constant_angle_residual(&ladder.psis[k + 1], &axis);
    let binormal_residual = constant_angle_residual(&ladder.binormal(k)?, &axis);
    Ok(AxisCheck {
        k,
        axis,
        wobble,
        psi_residual,
        binormal_residual,
        passed: wobble < tol && psi_residual < tol && binormal_residual < tol,
    })
}

fn lemma_checks(
    curve: &ArcSampledCurve,
    app: &FrenetApparatus,
    funcs: &SlantFunctions,
    profile: &SlantProfile,
    classification: &ClassificationReport,
    config: &AnalysisConfig,
) -> LemmaChecks {
    let tol = &config.tolerances;
    let mut sphere = BTreeMap::new();
    let mut ratio_identities = BTreeMap::new();
    let mut oracle = config.verify_lemmas.then(BTreeMap::new);
    for kind in IndicatrixKind::ALL {
        let name = kind.short_name().to_string();
        sphere.insert(
            name.clone(),
            Check::from_result(indicatrix_curve(app, kind).map(|f| sphere_deviation(&f))),
        );
        match ratio_check(app, funcs, kind, config.verify_lemmas, tol) {
            Ok((r, o)) => {
                ratio_identities.insert(name.clone(), Check::Value(r));
                if let (Some(map), Some(o)) = (oracle.as_mut(), o) {
                    map.insert(name, Check::Value(o));
                }
            }
            Err(e) => {
                ratio_identities.insert(name.clone(), Check::Skipped(e.to_string()));
                if let Some(map) = oracle.as_mut() {
                    map.insert(name, Check::Skipped(e.to_string()));
                }
            }
        }
    }
    let darboux = finite(darboux_deviation(app, funcs));
    let axis = match (classification.k_star, classification.phi) {
        (Some(k), Some(phi)) => Check::from_result(axis_check(curve, profile, k, phi, tol.axis)),
        _ => Check::Skipped("no level classified".into()),
    };
    LemmaChecks {
        frenet_residual: app.frenet_residual().ok().map(|r| r.max()).and_then(finite),
        darboux,
        darboux_passed: darboux.is_some_and(|d| d < tol.darboux),
        sphere,
        ratio_identities,
        oracle,
        axis,
    }
}

fn compare_truth(truth: &ZooTruth, c: &ClassificationReport, const_tol: f64) -> TruthComparison {
    let err = c.cot_phi.map(|v| (v - truth.cot_phi).abs());
    TruthComparison {
        expected_k_star: truth.k_star,
        found_k_star: c.k_star,
        expected_cot_phi: truth.cot_phi,
        found_cot_phi: c.cot_phi,
        cot_phi_error: err,
        matches: c.k_star == Some(truth.k_star) && err.is_some_and(|e| e <= const_tol * (1.0 + truth.cot_phi.abs())),
    }
}

fn sanitize(mut c: ClassificationReport) -> ClassificationReport {
    let clean = |v: &mut Option<f64>| *v = v.and_then(finite);
    clean(&mut c.cot_phi);
    clean(&mut c.phi);
    clean(&mut c.residual_sigma);
    clean(&mut c.residual_axis);
    for l in &mut c.per_k {
        clean(&mut l.mean);
        clean(&mut l.dev);
    }
    c
}

/// Runs the full pipeline and keeps the intermediate results.
pub fn analyze_full(config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let (curve, app, truth) = load(config)?;
    let funcs = slant_functions(&app)?;
    let profile = sigma_recursion(&app, config.k)?;
    let classification = sanitize(classify(&profile, config.tolerances.const_tol)?);
    let samples = SampleTable {
        s: curve.grid().values(),
        kappa: column(app.kappa()),
        tau: column(app.tau()),
        f: column(&profile.sigmas[0]),
        sigma: profile.sigmas[1..].iter().map(column).collect(),
        frame_mask: app.frame_mask().to_vec(),
    };
    let lemma_checks = lemma_checks(&curve, &app, &funcs, &profile, &classification, config);
    let truth_comparison = truth.map(|t| compare_truth(&t, &classification, config.tolerances.const_tol));
    let report = ReportDocument {
        config: config.clone(),
        samples,
        classification,
        lemma_checks,
        truth_comparison,
    };
    Ok(Analysis {
        curve,
        apparatus: app,
        funcs,
        profile,
        report,
    })
}

/// Runs the full pipeline and returns the report.
pub fn analyze(config: &AnalysisConfig) -> Result<ReportDocument> {
    analyze_full(config).map(|a| a.report)
}

/// Writes `<stem>_sigma{k}.csv`, `<stem>_indicatrix_{t,n,b,psi3}.csv`,
/// `<stem>_axis.csv` and `<stem>_cone.csv` into `dir`; returns the paths
/// written, in a fixed order.
pub fn export_plotdata(analysis: &Analysis, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut emit = |name: String, body: String| -> Result<()> {
        let path = dir.join(format!("{stem}_{name}.csv"));
        write_file(&path, &body)?;
        written.push(path);
        Ok(())
    };
    for (k, sigma) in analysis.profile.sigmas.iter().enumerate() {
        let mut body = format!("s,sigma_{k}\n");
        for (_, s, v) in sigma.iter_valid() {
            body.push_str(&format!("{s},{v}\n"));
        }
        emit(format!("sigma{k}"), body)?;
    }
    for kind in IndicatrixKind::ALL {
        let Ok(field) = indicatrix_curve(&analysis.apparatus, kind) else {
            continue;
        };
        let mut body = String::from("x,y,z\n");
        for p in (0..field.len()).filter_map(|i| field.get(i)) {
            body.push_str(&format!("{},{},{}\n", p.x, p.y, p.z));
        }
        emit(format!("indicatrix_{}", kind.short_name()), body)?;
    }
    let c = &analysis.report.classification;
    if let Some(k) = c.k_star {
        let axis = match analysis.report.lemma_checks.axis.value() {
            Some(a) => a.axis,
            None => c.axis.expect("classified reports carry an axis"),
        };
        emit("axis".into(), format!("x,y,z\n{},{},{}\n", axis.x, axis.y, axis.z))?;
        // angle of T_k with the axis along the curve; constant on the cone
        let (t, _) = analysis.profile.level_fields(k);
        let mut body = format!("s,angle_psi{}\n", k + 1);
        for i in 0..t.len() {
            if let Some(v) = t.get(i) {
                body.push_str(&format!(
                    "{},{}\n",
                    t.grid().at(i),
                    v.dot(&axis).clamp(-1.0, 1.0).acos()
                ));
            }
        }
        emit("cone".into(), body)?;
    }
    Ok(written)
}

/// One line of a batch summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub file: String,
    pub exit_code: i32,
    pub k_star: Option<usize>,
    pub cot_phi: Option<f64>,
    pub error: Option<String>,
}

/// Analyzes every `*.csv` in `dir` in parallel, writing `<stem>.report.json`
/// into `out`. Entries come back sorted by file name.
pub fn run_batch(dir: &Path, out: &Path, template: &AnalysisConfig) -> Result<Vec<BatchEntry>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let entries = files
        .par_iter()
        .map(|path| {
            let file = path.file_name().unwrap().to_string_lossy().into_owned();
            let mut config = template.clone();
            config.input = InputSource::Points(path.clone());
            let side = sidecar_path(path);
            config.truth = side.is_file().then_some(side);
            let result = analyze(&config).and_then(|report| {
                let stem = path.file_stem().unwrap().to_string_lossy();
                write_file(&out.join(format!("{stem}.report.json")), &report.to_json())?;
                Ok(report)
            });
            match result {
                Ok(r) => BatchEntry {
                    file,
                    exit_code: r.exit_code(),
                    k_star: r.classification.k_star,
                    cot_phi: r.classification.cot_phi,
                    error: None,
                },
                Err(e) => BatchEntry {
                    file,
                    exit_code: exit_code(&e),
                    k_star: None,
                    cot_phi: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::Family;

    fn zoo(f: Family) -> AnalysisConfig {
        AnalysisConfig::new(InputSource::Zoo(ZooSpec::new(f)))
    }

    #[test]
    fn const_tol_precedence() {
        assert_eq!(resolve_const_tol(None, None).unwrap(), DEFAULT_CONST_TOL);
        assert_eq!(resolve_const_tol(None, Some("2e-4")).unwrap(), 2e-4);
        assert_eq!(resolve_const_tol(Some(3e-3), Some("2e-4")).unwrap(), 3e-3);
        assert!(matches!(resolve_const_tol(None, Some("abc")), Err(Error::Parse(_))));
        assert!(matches!(
            resolve_const_tol(Some(-1.0), None),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn points_round_trip_exactly() {
        let z = generate(
            &ZooSpec::new(Family::CircularHelix { a: 1.0, b: 1.0 })
                .with_span(0.0, 2.0)
                .with_samples(101),
        )
        .unwrap();
        let text = points_csv(&z.curve);
        let (s, p) = parse_points(&text).unwrap();
        assert_eq!(s, z.curve.grid().values());
        assert_eq!(p, z.curve.positions());
        assert!(!text.contains('\r'));
    }

    #[test]
    fn bad_points_are_parse_errors() {
        assert!(matches!(parse_points("a,b,c,d\n1,2,3,4\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_points("s,x,y,z\n1,2,x,4\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_points("s,x,y,z\n1,2,3\n"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_points("s,x,y,z\n1,2,NaN,4\n"),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn exit_codes_partition() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::InvalidSpec("x".into())), 2);
        assert_eq!(exit_code(&Error::DegenerateCurve("x".into())), 4);
        assert_eq!(exit_code(&Error::OdeBlowUp { cap: 1e3, center: 0.0 }), 4);
    }

    #[test]
    fn precession_report() {
        let mut c = zoo(Family::ConstantPrecession { mu: 1.0, m: 1.0 });
        c.verify_lemmas = true;
        let r = analyze(&c).unwrap();
        assert_eq!(r.classification.k_star, Some(1));
        assert!(r.truth_comparison.as_ref().unwrap().matches);
        let oracle = r.lemma_checks.oracle.as_ref().unwrap();
        for (name, check) in oracle {
            let o = check.value().unwrap_or_else(|| panic!("{name} skipped"));
            assert!(o.passed, "{name} {o:?}");
        }
        for (name, check) in &r.lemma_checks.ratio_identities {
            assert!(check.value().unwrap().passed, "{name} {check:?}");
        }
        assert!(r.lemma_checks.axis.value().unwrap().passed);
        assert!(r.lemma_checks.darboux_passed);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn plane_circle_skips_binormal() {
        let r = analyze(&zoo(Family::PlaneCircle { r: 1.0 })).unwrap();
        assert_eq!(r.classification.k_star, Some(0));
        assert!(matches!(r.lemma_checks.ratio_identities["b"], Check::Skipped(_)));
        let json = r.to_json();
        assert!(!json.contains("NaN"));
    }

    #[test]
    fn report_has_fixed_keys() {
        let r = analyze(&zoo(Family::CircularHelix { a: 1.0, b: 1.0 })).unwrap();
        let json = r.to_json();
        let keys: Vec<&str> = json
            .lines()
            .filter_map(|l| l.strip_prefix("  \"")?.split('"').next())
            .collect();
        assert_eq!(
            keys,
            [
                "config",
                "samples",
                "classification",
                "lemma_checks",
                "truth_comparison"
            ]
        );
        assert_eq!(r.samples.sigma.len(), DEFAULT_K);
    }

    #[test]
    fn csv_table_shape() {
        let mut c = zoo(Family::CircularHelix { a: 1.0, b: 1.0 });
        c.format = OutputFormat::Csv;
        c.k = 2;
        let r = analyze(&c).unwrap();
        let text = r.render();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "s,kappa,tau,f,sigma_1,sigma_2,frame_valid");
        assert_eq!(lines.count(), r.samples.s.len());
    }

    #[test]
    fn level_above_max_is_rejected() {
        let mut c = zoo(Family::CircularHelix { a: 1.0, b: 1.0 });
        c.k = K_MAX + 1;
        assert!(matches!(analyze(&c), Err(Error::LevelTooHigh { .. })));
    }
}
