use std::f64::consts::FRAC_PI_3;

use kslant::pipeline::{analyze, read_points, write_fixture, AnalysisConfig, InputSource};
use kslant::zoo::{generate, Family, ZooSpec};

fn from_file(f: Family, const_tol: f64) -> (Option<usize>, usize, Vec<Option<f64>>) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let (_, side) = write_fixture(&ZooSpec::new(f), &path).unwrap();
    let mut c = AnalysisConfig::new(InputSource::Points(path));
    c.truth = Some(side);
    c.tolerances.const_tol = const_tol;
    let r = analyze(&c).unwrap();
    let t = r.truth_comparison.unwrap();
    let devs = r.classification.per_k.iter().map(|l| l.dev).collect();
    assert_eq!(
        t.matches,
        r.classification.k_star == Some(t.expected_k_star)
            && t.cot_phi_error.unwrap() <= const_tol * (1.0 + t.expected_cot_phi.abs())
    );
    (r.classification.k_star, t.expected_k_star, devs)
}

#[test]
fn points_file_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let (z, _) = write_fixture(&ZooSpec::new(Family::ConstantPrecession { mu: 1.0, m: 1.0 }), &path).unwrap();
    let (s, p) = read_points(&path).unwrap();
    assert_eq!(s, z.curve.grid().values());
    assert_eq!(p, z.curve.positions());
}

#[test]
fn helices_round_trip_through_points_at_default_tol() {
    for f in [
        Family::CircularHelix { a: 1.0, b: 1.0 },
        Family::GeneralHelix { phi: FRAC_PI_3 },
        Family::PlaneCircle { r: 1.0 },
    ] {
        let (found, expected, devs) = from_file(f, 1e-5);
        assert_eq!(found, Some(expected), "{f:?} {devs:?}");
    }
}

#[test]
fn slant_helices_round_trip_through_points_at_relaxed_tol() {
    // sigma_1 from positions needs four nested derivatives; its dispersion
    // sits between 4e-6 and 9e-5 at ds = 1e-3
    for f in [
        Family::Salkowski { c: 0.5 },
        Family::AntiSalkowski { c: 0.5 },
        Family::ConstantPrecession { mu: 1.0, m: 1.0 },
        Family::ConstantPrecession { mu: 2.0, m: 0.5 },
        Family::ConstantPrecession { mu: 1.0, m: 2.0 },
    ] {
        let (found, expected, devs) = from_file(f, 1e-4);
        assert_eq!(found, Some(expected), "{f:?} {devs:?}");
    }
}

#[test]
fn fixture_path_matches_truth_for_every_family() {
    for f in [
        Family::CircularHelix { a: 1.0, b: 1.0 },
        Family::GeneralHelix { phi: FRAC_PI_3 },
        Family::Salkowski { c: 0.5 },
        Family::AntiSalkowski { c: 0.5 },
        Family::ConstantPrecession { mu: 1.0, m: 1.0 },
        Family::PlaneCircle { r: 1.0 },
        Family::DesignedKSlant { k: 2, c: 0.4 },
        Family::DesignedKSlant { k: 3, c: 0.3 },
    ] {
        let spec = ZooSpec::new(f);
        let r = analyze(&AnalysisConfig::new(InputSource::Zoo(spec))).unwrap();
        let t = r.truth_comparison.unwrap();
        assert!(t.matches, "{f:?} {t:?}");
        assert_eq!(generate(&spec).unwrap().truth.k_star, t.expected_k_star);
    }
}
