use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn kslant(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kslant"))
        .current_dir(dir)
        .env_remove("SLANT_DEFAULT_TOL")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_spec(dir: &Path, name: &str, spec: &str) -> String {
    fs::write(dir.join(name), spec).unwrap();
    name.to_string()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn generate_helix_rows() {
    let dir = TempDir::new().unwrap();
    let o = kslant(
        dir.path(),
        &[
            "generate",
            "circular-helix",
            "--a",
            "1",
            "--b",
            "1",
            "--span",
            "0:20",
            "--samples",
            "4001",
            "--out",
            "h.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert!(text.starts_with("s,x,y,z\n"));
    assert!(!text.contains('\r'));
    let r = rows(&dir.path().join("h.csv"));
    assert_eq!(r.len(), 4001);
    assert!(r.windows(2).all(|w| w[1][0] > w[0][0]));
}

#[test]
fn generate_sidecar_truth() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&kslant(
            dir.path(),
            &[
                "generate",
                "constant-precession",
                "--mu",
                "1",
                "--m",
                "1",
                "--out",
                "p.csv"
            ]
        )),
        0
    );
    let t = json(&dir.path().join("p.truth.json"));
    assert_eq!(t["truth"]["k_star"], 1);
    assert_eq!(t["truth"]["cot_phi"], -1.0);
    assert_eq!(
        code(&kslant(
            dir.path(),
            &["generate", "plane-circle", "--r", "1", "--out", "c.csv"]
        )),
        0
    );
    let t = json(&dir.path().join("c.truth.json"));
    assert_eq!(t["truth"]["tau"], 0.0);
}

#[test]
fn bad_generate_input_exits_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&kslant(dir.path(), &["generate", "plane-circle", "--r", "-1"])), 2);
    assert_eq!(
        code(&kslant(dir.path(), &["generate", "circular-helix", "--a", "1"])),
        2
    );
    assert_eq!(
        code(&kslant(
            dir.path(),
            &["generate", "plane-circle", "--r", "1", "--span", "0-1"]
        )),
        2
    );
    assert_eq!(code(&kslant(dir.path(), &["generate", "no-such-family"])), 2);
    assert_eq!(code(&kslant(dir.path(), &["analyze", "missing.csv"])), 2);
}

#[test]
fn analyze_helix_file() {
    let dir = TempDir::new().unwrap();
    kslant(
        dir.path(),
        &["generate", "circular-helix", "--a", "1", "--b", "1", "--out", "h.csv"],
    );
    let o = kslant(
        dir.path(),
        &[
            "analyze",
            "h.csv",
            "-K",
            "3",
            "--truth",
            "h.truth.json",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["classification"]["k_star"], 0);
    assert_eq!(r["classification"]["per_k"].as_array().unwrap().len(), 4);
    assert_eq!(r["truth_comparison"]["matches"], true);
}

#[test]
fn precession_fixture_lemmas_hold() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "p.json",
        r#"{"family":"constant-precession","mu":1.0,"m":1.0}"#,
    );
    let o = kslant(
        dir.path(),
        &["analyze", "--spec", &spec, "--verify-lemmas", "--out", "r.json"],
    );
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("r.json"));
    for (kind, check) in r["lemma_checks"]["oracle"].as_object().unwrap() {
        let v = &check["value"];
        let worst = v["kappa_rel"].as_f64().unwrap().max(v["tau_rel"].as_f64().unwrap());
        assert!(worst < 1e-3, "{kind} {v}");
        assert!(v["frame_angle"].as_f64().unwrap() < 1e-3);
    }
}

#[test]
fn precession_file_first_order_lemmas_hold() {
    let dir = TempDir::new().unwrap();
    kslant(
        dir.path(),
        &[
            "generate",
            "constant-precession",
            "--mu",
            "1",
            "--m",
            "1",
            "--out",
            "p.csv",
        ],
    );
    kslant(dir.path(), &["analyze", "p.csv", "--verify-lemmas", "--out", "r.json"]);
    let r = json(&dir.path().join("r.json"));
    for kind in ["t", "b"] {
        let v = &r["lemma_checks"]["oracle"][kind]["value"];
        assert_eq!(v["passed"], true, "{kind} {v}");
    }
}

#[test]
fn straight_line_exits_4() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("s,x,y,z\n");
    for i in 0..200 {
        let s = i as f64 * 0.01;
        text.push_str(&format!("{s},{},{},{}\n", s * 0.6, s * 0.8, 0.0));
    }
    fs::write(dir.path().join("line.csv"), text).unwrap();
    let o = kslant(dir.path(), &["analyze", "line.csv"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate curve"));
}

#[test]
fn unclassified_exits_3_with_report() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(dir.path(), "d.json", r#"{"family":"designed-k-slant","k":3,"c":0.3}"#);
    let o = kslant(dir.path(), &["analyze", "--spec", &spec, "-K", "2", "--out", "r.json"]);
    assert_eq!(code(&o), 3);
    let r = json(&dir.path().join("r.json"));
    assert!(r["classification"]["k_star"].is_null());
    assert_eq!(r["truth_comparison"]["matches"], false);
}

#[test]
fn env_tolerance_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    kslant(
        dir.path(),
        &[
            "generate",
            "constant-precession",
            "--mu",
            "1",
            "--m",
            "1",
            "--out",
            "p.csv",
        ],
    );
    // sigma_1 from positions disperses by about 4e-5 at this resolution
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_kslant"));
        cmd.current_dir(dir.path()).env_remove("SLANT_DEFAULT_TOL");
        if let Some(v) = env {
            cmd.env("SLANT_DEFAULT_TOL", v);
        }
        let o = cmd
            .args(["analyze", "p.csv", "--out", "r.json"])
            .args(extra)
            .output()
            .unwrap();
        code(&o)
    };
    assert_eq!(run(None, &[]), 3);
    assert_eq!(run(Some("1e-4"), &[]), 0);
    assert_eq!(run(Some("1e-4"), &["--const-tol", "1e-6"]), 3);
    assert_eq!(run(None, &["--const-tol", "1e-4"]), 0);
    assert_eq!(run(Some("bogus"), &[]), 2);
}

#[test]
fn plotdata_bundle() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "p.json",
        r#"{"family":"constant-precession","mu":1.0,"m":1.0}"#,
    );
    let o = kslant(
        dir.path(),
        &["export-plotdata", "--spec", &spec, "--dir", "plots", "--stem", "out"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let plots = dir.path().join("plots");
    let sigma = rows(&plots.join("out_sigma1.csv"));
    assert!(!sigma.is_empty());
    assert!(sigma.iter().all(|r| (r[1] + 1.0).abs() < 1e-4));
    for kind in ["t", "n", "b", "psi3"] {
        let pts = rows(&plots.join(format!("out_indicatrix_{kind}.csv")));
        assert!(
            pts.iter()
                .all(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0).abs() < 1e-9),
            "{kind}"
        );
    }
    let helix = write_spec(dir.path(), "h.json", r#"{"family":"circular-helix","a":1.0,"b":1.0}"#);
    assert_eq!(
        code(&kslant(
            dir.path(),
            &["export-plotdata", "--spec", &helix, "--dir", "hp", "--stem", "out"]
        )),
        0
    );
    let axis = rows(&dir.path().join("hp/out_axis.csv"));
    assert_eq!(axis.len(), 1);
    let a = &axis[0];
    assert!((a[0] * a[0] + a[1] * a[1] + a[2] * a[2] - 1.0).abs() < 1e-12);
    // the helix axis is e_z
    assert!((a[2] - 1.0).abs() < 1e-9);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    kslant(dir.path(), &["generate", "salkowski", "--c", "0.5", "--out", "s.csv"]);
    let a = kslant(dir.path(), &["analyze", "s.csv", "--verify-lemmas"]);
    let b = kslant(dir.path(), &["analyze", "s.csv", "--verify-lemmas"]);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let c = kslant(dir.path(), &["analyze", "s.csv", "--format", "csv"]);
    let text = String::from_utf8(c.stdout).unwrap();
    assert!(text.starts_with("s,kappa,tau,f,sigma_1,sigma_2,sigma_3,sigma_4,frame_valid\n"));
}

#[test]
fn batch_summary_is_sorted_and_stable() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    kslant(
        &input,
        &["generate", "plane-circle", "--r", "1", "--out", "b_circle.csv"],
    );
    kslant(
        &input,
        &[
            "generate",
            "circular-helix",
            "--a",
            "1",
            "--b",
            "2",
            "--out",
            "a_helix.csv",
        ],
    );
    fs::write(input.join("c_bad.csv"), "s,x,y,z\n0,0,0\n").unwrap();
    let run = |out: &str| {
        let o = kslant(dir.path(), &["analyze", "--batch", "in", "--out", out]);
        (code(&o), o.stdout)
    };
    let (c1, s1) = run("out1");
    let (_, s2) = run("out2");
    assert_eq!(c1, 2);
    assert_eq!(s1, s2);
    let summary: Value = serde_json::from_slice(&s1).unwrap();
    let files: Vec<&str> = summary
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["file"].as_str().unwrap())
        .collect();
    assert_eq!(files, ["a_helix.csv", "b_circle.csv", "c_bad.csv"]);
    assert_eq!(summary[0]["k_star"], 0);
    assert_eq!(summary[1]["k_star"], 0);
    assert_eq!(summary[2]["exit_code"], 2);
    let r1 = fs::read(dir.path().join("out1/a_helix.report.json")).unwrap();
    let r2 = fs::read(dir.path().join("out2/a_helix.report.json")).unwrap();
    assert_eq!(r1, r2);
}
