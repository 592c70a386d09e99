use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emcad_core::materials::bundled_library;
use emcad_core::CurveSeries;

fn emcad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emcad"))
        .args(args)
        .env_remove("EMCAD_DATA_DIR")
        .output()
        .unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/specs/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn design_then_validate_succeeds_for_every_family() {
    let dir = tempfile::tempdir().unwrap();
    for family in ["transformer", "induction", "synchronous", "dc", "srm"] {
        let out = dir.path().join(format!("{family}.doc"));
        let o = emcad(&[
            "design",
            "--family",
            family,
            "--spec",
            &fixture(family),
            "--out",
            p(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{family}: {}", stderr(&o));
        assert!(out.exists());
        let o = emcad(&["validate", "--family", family, "--spec", p(&out)]);
        assert_eq!(o.status.code(), Some(0), "{family}: {}", stderr(&o));
    }
    // Only the reports remain: no stray temporary files.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 5);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.doc");
    let b = dir.path().join("b.doc");
    for out in [&a, &b] {
        let o = emcad(&[
            "design",
            "--family",
            "synchronous",
            "--spec",
            &fixture("synchronous"),
            "--out",
            p(out),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn negative_kva_is_a_validation_error_naming_the_field() {
    let o = emcad(&[
        "validate",
        "--family",
        "transformer",
        "--spec",
        &fixture("bad_transformer"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kva"));

    let o = emcad(&[
        "validate",
        "--family",
        "transformer",
        "--spec",
        &fixture("bad_transformer"),
        "--format",
        "doc",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let body: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(body["code"], "validation_error");
    assert_eq!(body["field_path"], "kva");
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let tampered = dir.path().join("tampered.doc");
    let good = dir.path().join("good.doc");
    emcad(&["design", "--family", "dc", "--spec", &fixture("dc"), "--out", p(&good)]);
    let mut doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&good).unwrap()).unwrap();
    doc["record"]["spec"]["voltage"] = serde_json::json!(500.0);
    std::fs::write(&tampered, serde_json::to_vec(&doc).unwrap()).unwrap();
    let overrides = dir.path().join("constants.json");
    std::fs::write(&overrides, r#"{"b_av": 0.55}"#).unwrap();
    let bad_overrides = dir.path().join("bad_constants.json");
    std::fs::write(&bad_overrides, r#"{"bav": 0.55}"#).unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    let blocked = dir.path().join("missing-dir").join("out.doc");

    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["design", "--family", "srm", "--spec", &fixture("srm")], 0),
        (
            vec![
                "design",
                "--family",
                "dc",
                "--spec",
                &fixture("dc"),
                "--constants",
                p(&overrides),
            ],
            0,
        ),
        (vec!["validate", "--family", "srm", "--spec", &fixture("srm")], 0),
        (vec!["validate", "--spec", p(&good)], 0),
        (vec!["materials"], 0),
        (vec!["curves", "bh", "--material", "M43"], 0),
        (
            vec![
                "validate",
                "--family",
                "transformer",
                "--spec",
                &fixture("bad_transformer"),
            ],
            1,
        ),
        (vec!["validate", "--spec", p(&tampered)], 1),
        (vec!["validate", "--spec", &fixture("srm")], 1),
        (vec!["design", "--family", "dc", "--spec", p(&garbage)], 1),
        (
            vec![
                "design",
                "--family",
                "dc",
                "--spec",
                &fixture("dc"),
                "--constants",
                p(&bad_overrides),
            ],
            1,
        ),
        (vec!["design", "--family", "stepper", "--spec", &fixture("dc")], 1),
        (vec!["curves", "bh", "--material", "unobtainium"], 1),
        (vec!["frobnicate"], 1),
        (
            vec!["design", "--family", "srm", "--spec", &fixture("srm_infeasible")],
            2,
        ),
        (vec!["design", "--family", "srm", "--spec", "/nonexistent/spec.json"], 3),
        (
            vec![
                "design",
                "--family",
                "dc",
                "--spec",
                &fixture("dc"),
                "--out",
                p(&blocked),
            ],
            3,
        ),
        (vec!["materials", "--materials", "/nonexistent/lib.json"], 3),
    ]
    .into_iter()
    .map(|(a, c)| (a.into_iter().map(String::from).collect(), c))
    .collect();
    for (args, code) in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = emcad(&refs);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn bh_csv_rows_match_knot_count() {
    let dir = tempfile::tempdir().unwrap();
    let lib = bundled_library();
    for m in &lib.materials {
        let out = dir.path().join(format!("{}.csv", m.name));
        let o = emcad(&["curves", "bh", "--material", &m.name, "--out", p(&out)]);
        assert_eq!(o.status.code(), Some(0));
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count() - 1, m.bh_points.len());
        let parsed = CurveSeries::from_csv("bh", &text).unwrap();
        assert_eq!(parsed.points, m.bh_points);
    }
}

#[test]
fn csv_bundle_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("bundle");
    let o = emcad(&[
        "design",
        "--family",
        "srm",
        "--spec",
        &fixture("srm"),
        "--format",
        "csv",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["flux_paths.csv", "profile.csv", "profile_full_pitch.csv"]);
    let paths = std::fs::read_to_string(out.join("flux_paths.csv")).unwrap();
    assert_eq!(paths.lines().count(), 1 + 1 + 7);
}

#[test]
fn torque_slip_curve_export() {
    let o = emcad(&[
        "curves",
        "torque_slip",
        "--family",
        "induction",
        "--spec",
        &fixture("induction"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let c = CurveSeries::from_csv("torque_slip", &text).unwrap();
    assert!(c.points.len() > 100);
    let o = emcad(&[
        "curves",
        "occ",
        "--family",
        "induction",
        "--spec",
        &fixture("induction"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("torque_slip"));
}
