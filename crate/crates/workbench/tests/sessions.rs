use std::sync::Arc;

use emcad_core::materials::bundled_library;
use emcad_core::srm::{design_srm, SRMConstants, SRMSpec};
use emcad_core::CurveSeries;
use emcad_workbench::export::{csv_bundle, ExportDocument};
use emcad_workbench::{
    ExportFormat, MachineFamily, NewProject, RecordStatus, Workbench, WorkbenchError, BUNDLED_LIBRARY_REF,
};
use serde_json::{json, Value};

fn fixture(name: &str) -> Value {
    let path = format!("{}/../../fixtures/specs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn workbench() -> (tempfile::TempDir, Workbench) {
    let dir = tempfile::tempdir().unwrap();
    let wb = Workbench::open(dir.path(), bundled_library(), BUNDLED_LIBRARY_REF).unwrap();
    (dir, wb)
}

fn new_project(wb: &Workbench, name: &str) -> String {
    wb.create_project(NewProject {
        name: name.into(),
        constants_overrides: Default::default(),
    })
    .unwrap()
    .id
}

#[test]
fn create_load_round_trip_and_distinct_ids() {
    let (_d, wb) = workbench();
    let a = new_project(&wb, "motor study");
    let b = new_project(&wb, "motor study");
    assert_ne!(a, b);
    let p = wb.project(&a).unwrap();
    assert_eq!(p.name, "motor study");
    assert!(p.records.is_empty());
    assert_eq!(p.material_library_ref, "bundled");
    assert_eq!(wb.list_projects().unwrap().len(), 2);

    let e = wb
        .create_project(NewProject {
            name: "".into(),
            constants_overrides: Default::default(),
        })
        .unwrap_err();
    assert_eq!(e.code(), "validation_error");
}

#[test]
fn every_family_dispatches_and_reruns_bit_identically() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "all");
    for family in MachineFamily::ALL {
        let spec = fixture(family.as_str());
        let r1 = wb.run_design(&id, family, spec.clone(), String::new()).unwrap();
        let r2 = wb.run_design(&id, family, spec, String::new()).unwrap();
        assert_eq!(r1.status, RecordStatus::Succeeded, "{family}: {:?}", r1.diagnostics);
        assert_eq!(
            serde_json::to_vec(&r1.result).unwrap(),
            serde_json::to_vec(&r2.result).unwrap(),
            "{family}"
        );
        assert_eq!(r1.constants, family.default_constants());
    }
    let p = wb.project(&id).unwrap();
    assert_eq!(p.records.len(), 10);
    p.check_invariants().unwrap();
}

#[test]
fn validation_errors_leave_no_record() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "bad");
    let e = wb
        .run_design(
            &id,
            MachineFamily::Transformer,
            fixture("bad_transformer"),
            String::new(),
        )
        .unwrap_err();
    assert_eq!(e.field_path().as_deref(), Some("kva"));
    assert!(wb.project(&id).unwrap().records.is_empty());
}

#[test]
fn infeasible_design_is_a_failed_record() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "srm");
    let r = wb
        .run_design(&id, MachineFamily::Srm, fixture("srm_infeasible"), String::new())
        .unwrap();
    assert_eq!(r.status, RecordStatus::Failed);
    assert!(r.result.is_none());
    let diag = r.diagnostics.unwrap();
    assert_eq!(diag.code, "infeasible");
    assert_eq!(diag.field_path.as_deref(), Some("beta_s + beta_r < 2π/n_r"));
    assert_eq!(wb.project(&id).unwrap().records.len(), 1);

    let e = wb.what_if(&id, &r.id, &json!({})).unwrap_err();
    assert!(matches!(e, WorkbenchError::RecordFailed(_)));
    let e = wb.export(&id, &r.id, ExportFormat::Doc).unwrap_err();
    assert!(matches!(e, WorkbenchError::RecordFailed(_)));
}

#[test]
fn empty_patch_reproduces_parent() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "w");
    let parent = wb
        .run_design(&id, MachineFamily::Induction, fixture("induction"), String::new())
        .unwrap();
    for patch in [json!({}), Value::Null] {
        let child = wb.what_if(&id, &parent.id, &patch).unwrap();
        assert_eq!(child.result, parent.result);
        assert_eq!(child.parent_id.as_deref(), Some(parent.id.as_str()));
        assert!(child.delta.unwrap().is_empty());
    }
}

#[test]
fn unknown_patch_field_rejected() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "w");
    let parent = wb
        .run_design(&id, MachineFamily::Dc, fixture("dc"), String::new())
        .unwrap();
    let e = wb.what_if(&id, &parent.id, &json!({"pole_count": 6})).unwrap_err();
    assert_eq!(e.code(), "validation_error");
    assert_eq!(e.field_path().as_deref(), Some("pole_count"));
    let e = wb.what_if(&id, &parent.id, &json!([1])).unwrap_err();
    assert_eq!(e.code(), "validation_error");
    assert_eq!(wb.project(&id).unwrap().records.len(), 1);
    let e = wb.what_if(&id, "r99", &json!({})).unwrap_err();
    assert_eq!(e.code(), "not_found");
}

#[test]
fn srm_arc_patch_reports_signed_torque_change() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "srm");
    let base = fixture("srm");
    let parent = wb
        .run_design(&id, MachineFamily::Srm, base.clone(), String::new())
        .unwrap();
    let patch = json!({"beta_s": 31.0f64.to_radians(), "beta_r": 33.0f64.to_radians()});
    let child = wb.what_if(&id, &parent.id, &patch).unwrap();
    let delta = child.delta.clone().unwrap();
    assert_eq!(delta.changed_inputs, vec!["beta_r".to_string(), "beta_s".to_string()]);

    // Direct engine evaluation of both specs.
    let lib = bundled_library();
    let m19 = lib.get("M19").unwrap();
    let c = SRMConstants::default();
    let s0: SRMSpec = serde_json::from_value(base).unwrap();
    let s1: SRMSpec = serde_json::from_value(child.spec.clone()).unwrap();
    let t0 = design_srm(&s0, &c, m19).unwrap().average_torque;
    let t1 = design_srm(&s1, &c, m19).unwrap().average_torque;
    let moved = delta.torque_gap.unwrap();
    assert_eq!(moved.torque_change, t1 - t0);
    assert_eq!(moved.torque_change.signum(), (t1 - t0).signum());
    assert_eq!(child.result.as_ref().unwrap()["average_torque"], json!(t1));
}

#[test]
fn patch_chain_lineage() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "chain");
    let mut rid = wb
        .run_design(&id, MachineFamily::Srm, fixture("srm"), String::new())
        .unwrap()
        .id;
    for step in 1..=3 {
        let bs = (30.0 + step as f64).to_radians();
        let br = (32.0 + step as f64).to_radians();
        rid = wb.what_if(&id, &rid, &json!({"beta_s": bs, "beta_r": br})).unwrap().id;
    }
    let p = wb.project(&id).unwrap();
    assert_eq!(p.lineage_depth(&rid).unwrap(), 3);
    p.check_invariants().unwrap();
}

#[test]
fn export_reimport_and_csv_bundle() {
    let (_d, wb) = workbench();
    let lib = bundled_library();
    let id = new_project(&wb, "exp");
    for family in MachineFamily::ALL {
        let r = wb
            .run_design(&id, family, fixture(family.as_str()), String::new())
            .unwrap();
        let bytes = wb.export(&id, &r.id, ExportFormat::Doc).unwrap();
        let doc = ExportDocument::reimport(&bytes, &lib).unwrap();
        assert_eq!(doc.record, r);
        assert_eq!(doc.to_bytes(), bytes);

        for (name, body) in csv_bundle(&r).unwrap() {
            let key = name.trim_end_matches(".csv");
            if let Some(curve) = doc.curves.get(key) {
                assert_eq!(body.lines().count(), curve.points.len() + 1, "{name}");
            }
        }
    }
}

#[test]
fn tampered_export_fails_revalidation() {
    let (_d, wb) = workbench();
    let lib = bundled_library();
    let id = new_project(&wb, "exp");
    let r = wb
        .run_design(&id, MachineFamily::Dc, fixture("dc"), String::new())
        .unwrap();
    let bytes = wb.export(&id, &r.id, ExportFormat::Doc).unwrap();
    let mut doc: Value = serde_json::from_slice(&bytes).unwrap();
    doc["record"]["result"]["armature_conductors"] = json!(1);
    let e = ExportDocument::reimport(&serde_json::to_vec(&doc).unwrap(), &lib).unwrap_err();
    assert_eq!(e.field_path().as_deref(), Some("record.result"));

    let mut doc: Value = serde_json::from_slice(&bytes).unwrap();
    doc["extra"] = json!(true);
    let e = ExportDocument::reimport(&serde_json::to_vec(&doc).unwrap(), &lib).unwrap_err();
    assert_eq!(e.code(), "parse_error");
}

#[test]
fn torque_slip_csv_matches_engine_values() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "im");
    let r = wb
        .run_design(&id, MachineFamily::Induction, fixture("induction"), String::new())
        .unwrap();
    let text = String::from_utf8(wb.export(&id, &r.id, ExportFormat::Csv).unwrap()).unwrap();
    let files = emcad_workbench::export::parse_csv_bundle_text(&text);
    let parsed = CurveSeries::from_csv("torque_slip", &files["torque_slip.csv"]).unwrap();
    let engine = wb.curve(&id, &r.id, "torque_slip").unwrap();
    assert_eq!(parsed.points.len(), engine.points.len());
    for (a, b) in parsed.points.iter().zip(&engine.points) {
        assert_eq!(a, b);
    }
    assert!(matches!(
        wb.curve(&id, &r.id, "nope"),
        Err(WorkbenchError::NotFound { .. })
    ));
}

#[test]
fn constants_overrides_are_snapshotted() {
    let (_d, wb) = workbench();
    let mut overrides = std::collections::BTreeMap::new();
    overrides.insert(MachineFamily::Dc, json!({"b_av": 0.55}));
    let id = wb
        .create_project(NewProject {
            name: "o".into(),
            constants_overrides: overrides,
        })
        .unwrap()
        .id;
    let r = wb
        .run_design(&id, MachineFamily::Dc, fixture("dc"), String::new())
        .unwrap();
    assert_eq!(r.constants["b_av"], json!(0.55));
    let plain = MachineFamily::Dc
        .run(
            &fixture("dc"),
            &MachineFamily::Dc.default_constants(),
            &bundled_library(),
        )
        .unwrap();
    assert_ne!(r.result.unwrap(), plain);
}

#[test]
fn delete_removes_project() {
    let (_d, wb) = workbench();
    let id = new_project(&wb, "gone");
    wb.run_design(&id, MachineFamily::Dc, fixture("dc"), String::new())
        .unwrap();
    wb.delete_project(&id).unwrap();
    assert!(matches!(wb.project(&id), Err(WorkbenchError::NotFound { .. })));
    assert!(matches!(wb.delete_project(&id), Err(WorkbenchError::NotFound { .. })));
}

#[test]
fn concurrent_mutations_are_serialized() {
    let (_d, wb) = workbench();
    let wb = Arc::new(wb);
    let id = new_project(&wb, "busy");
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let wb = wb.clone();
            let id = id.clone();
            std::thread::spawn(move || {
                wb.run_design(&id, MachineFamily::Dc, fixture("dc"), String::new())
                    .unwrap();
                wb.project(&id).unwrap();
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let p = wb.project(&id).unwrap();
    assert_eq!(p.records.len(), 8);
    p.check_invariants().unwrap();
}
