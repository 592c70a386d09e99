//! Projects, design records and what-if lineage.

use std::collections::{BTreeMap, HashSet};

use emcad_core::merge::{changed_paths, merge_strict};
use emcad_core::MaterialLibrary;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ErrorBody, WbResult, WorkbenchError};
use crate::family::MachineFamily;

pub const PROJECT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Project {
    pub schema_version: u32,
    pub id: String,
    pub name: String,
    pub created: String,
    pub modified: String,
    pub material_library_ref: String,
    /// Sparse constants overrides per family, merged over the family
    /// defaults when a design runs.
    #[serde(default)]
    pub constants_overrides: BTreeMap<MachineFamily, Value>,
    #[serde(default)]
    pub records: Vec<DesignRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRecord {
    pub id: String,
    pub machine_family: MachineFamily,
    pub spec: Value,
    /// Full constants snapshot the design ran with.
    pub constants: Value,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<ErrorBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Delta>,
    #[serde(default)]
    pub note: String,
}

/// What changed between a what-if record and its parent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Delta {
    pub changed_inputs: Vec<String>,
    pub changed_outputs: Vec<OutputChange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque_gap: Option<TorqueGapMove>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputChange {
    pub path: String,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorqueGapMove {
    pub before: f64,
    pub after: f64,
    /// Signed change of the average torque, N·m.
    pub torque_change: f64,
    /// True when |torque_gap| shrank.
    pub improved: bool,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.changed_inputs.is_empty() && self.changed_outputs.is_empty() && self.torque_gap.is_none()
    }
}

/// Outcome of one engine run, before it becomes a record.
pub struct Evaluation {
    pub status: RecordStatus,
    pub result: Option<Value>,
    pub diagnostics: Option<ErrorBody>,
}

/// Run a family pipeline. Validation errors are returned; infeasibility
/// becomes a failed evaluation carrying diagnostics.
pub fn evaluate(
    family: MachineFamily,
    spec: &Value,
    constants: &Value,
    library: &MaterialLibrary,
) -> WbResult<Evaluation> {
    family.validate_spec(spec, library).map_err(WorkbenchError::Invalid)?;
    match family.run(spec, constants, library).map_err(WorkbenchError::from) {
        Ok(result) => Ok(Evaluation {
            status: RecordStatus::Succeeded,
            result: Some(result),
            diagnostics: None,
        }),
        Err(e @ WorkbenchError::Infeasible(_)) => Ok(Evaluation {
            status: RecordStatus::Failed,
            result: None,
            diagnostics: Some(e.body()),
        }),
        Err(e) => Err(e),
    }
}

impl Project {
    pub fn new(
        id: String,
        name: &str,
        material_library_ref: &str,
        constants_overrides: BTreeMap<MachineFamily, Value>,
        now: String,
    ) -> WbResult<Project> {
        if name.trim().is_empty() {
            return Err(WorkbenchError::invalid("name", "project name must not be empty"));
        }
        for (family, overrides) in &constants_overrides {
            family.constants_with(overrides).map_err(|e| match e {
                emcad_core::Error::Validation { field, message } => WorkbenchError::invalid(
                    format!(
                        "constants_overrides.{family}.{}",
                        field.trim_start_matches("constants.")
                    ),
                    message,
                ),
                other => WorkbenchError::Invalid(other),
            })?;
        }
        Ok(Project {
            schema_version: PROJECT_SCHEMA_VERSION,
            id,
            name: name.to_string(),
            created: now.clone(),
            modified: now,
            material_library_ref: material_library_ref.to_string(),
            constants_overrides,
            records: Vec::new(),
        })
    }

    pub fn record(&self, rid: &str) -> WbResult<&DesignRecord> {
        self.records
            .iter()
            .find(|r| r.id == rid)
            .ok_or_else(|| WorkbenchError::NotFound {
                what: "record",
                id: rid.to_string(),
            })
    }

    fn next_record_id(&self) -> String {
        format!("r{}", self.records.len() + 1)
    }

    /// Full constants document for `family` under this project's overrides.
    pub fn constants_for(&self, family: MachineFamily) -> WbResult<Value> {
        let overrides = self.constants_overrides.get(&family).cloned().unwrap_or(Value::Null);
        family.constants_with(&overrides).map_err(WorkbenchError::Invalid)
    }

    /// Run a design and append it. Infeasible designs are appended as failed
    /// records; invalid specs leave the project untouched.
    pub fn run_design(
        &mut self,
        family: MachineFamily,
        spec: Value,
        note: String,
        library: &MaterialLibrary,
    ) -> WbResult<DesignRecord> {
        let constants = self.constants_for(family)?;
        let eval = evaluate(family, &spec, &constants, library)?;
        let record = DesignRecord {
            id: self.next_record_id(),
            machine_family: family,
            spec,
            constants,
            status: eval.status,
            result: eval.result,
            diagnostics: eval.diagnostics,
            parent_id: None,
            delta: None,
            note,
        };
        self.records.push(record.clone());
        Ok(record)
    }

    /// Merge a sparse patch over a succeeded record's spec, rerun with the
    /// parent's constants snapshot and append the child.
    pub fn what_if(&mut self, parent_id: &str, patch: &Value, library: &MaterialLibrary) -> WbResult<DesignRecord> {
        let parent = self.record(parent_id)?.clone();
        if parent.status != RecordStatus::Succeeded {
            return Err(WorkbenchError::RecordFailed(parent.id));
        }
        let mut spec = parent.spec.clone();
        match patch {
            Value::Null => {}
            Value::Object(_) => merge_strict(&mut spec, patch).map_err(WorkbenchError::Invalid)?,
            _ => return Err(WorkbenchError::invalid("", "a what-if patch must be a JSON object")),
        }
        let eval = evaluate(parent.machine_family, &spec, &parent.constants, library)?;
        let before = parent.result.as_ref().expect("succeeded records carry a result");
        let delta = delta_between(&parent.spec, &spec, before, eval.result.as_ref());
        let record = DesignRecord {
            id: self.next_record_id(),
            machine_family: parent.machine_family,
            spec,
            constants: parent.constants.clone(),
            status: eval.status,
            result: eval.result,
            diagnostics: eval.diagnostics,
            parent_id: Some(parent.id.clone()),
            delta: Some(delta),
            note: String::new(),
        };
        self.records.push(record.clone());
        Ok(record)
    }

    /// Number of ancestors of a record.
    pub fn lineage_depth(&self, rid: &str) -> WbResult<usize> {
        let mut depth = 0;
        let mut cur = self.record(rid)?;
        while let Some(p) = &cur.parent_id {
            cur = self.record(p)?;
            depth += 1;
            if depth > self.records.len() {
                return Err(WorkbenchError::invalid("records", "parent links form a cycle"));
            }
        }
        Ok(depth)
    }

    /// Check record ids are unique and every parent precedes its child,
    /// which makes the lineage acyclic.
    pub fn check_invariants(&self) -> WbResult<()> {
        if self.schema_version != PROJECT_SCHEMA_VERSION {
            return Err(WorkbenchError::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        let mut seen = HashSet::new();
        for (i, r) in self.records.iter().enumerate() {
            if let Some(p) = &r.parent_id {
                if !seen.contains(p.as_str()) {
                    return Err(WorkbenchError::invalid(
                        format!("records[{i}].parent_id"),
                        format!("parent `{p}` is not an earlier record of this project"),
                    ));
                }
            }
            if !seen.insert(r.id.as_str()) {
                return Err(WorkbenchError::invalid(
                    format!("records[{i}].id"),
                    format!("duplicate id `{}`", r.id),
                ));
            }
            if (r.status == RecordStatus::Succeeded) != r.result.is_some() {
                return Err(WorkbenchError::invalid(
                    format!("records[{i}].result"),
                    "succeeded records carry a result, failed ones do not",
                ));
            }
        }
        Ok(())
    }
}

/// Numeric leaves of a result, one level of nesting deep. Arrays and curves
/// are skipped.
pub fn key_outputs(result: &Value) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    if let Value::Object(map) = result {
        for (k, v) in map {
            match v {
                Value::Number(n) => {
                    out.insert(k.clone(), n.as_f64().unwrap_or(f64::NAN));
                }
                Value::Object(inner) if inner.get("points").is_none() => {
                    for (k2, v2) in inner {
                        if let Value::Number(n) = v2 {
                            out.insert(format!("{k}.{k2}"), n.as_f64().unwrap_or(f64::NAN));
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

pub fn delta_between(spec_before: &Value, spec_after: &Value, before: &Value, after: Option<&Value>) -> Delta {
    let changed_inputs = changed_paths(spec_before, spec_after);
    let Some(after) = after else {
        return Delta {
            changed_inputs,
            ..Delta::default()
        };
    };
    let a = key_outputs(before);
    let b = key_outputs(after);
    let changed_outputs = a
        .iter()
        .filter_map(|(k, &x)| {
            let &y = b.get(k)?;
            (x != y).then(|| OutputChange {
                path: k.clone(),
                before: x,
                after: y,
            })
        })
        .collect();
    let torque_gap = match (a.get("torque_gap"), b.get("torque_gap")) {
        (Some(&g0), Some(&g1)) if g0 != g1 => Some(TorqueGapMove {
            before: g0,
            after: g1,
            torque_change: b.get("average_torque").copied().unwrap_or(0.0)
                - a.get("average_torque").copied().unwrap_or(0.0),
            improved: g1.abs() < g0.abs(),
        }),
        _ => None,
    };
    Delta {
        changed_inputs,
        changed_outputs,
        torque_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn record(id: &str, parent: Option<&str>) -> DesignRecord {
        DesignRecord {
            id: id.into(),
            machine_family: MachineFamily::Dc,
            spec: json!({}),
            constants: json!({}),
            status: RecordStatus::Succeeded,
            result: Some(json!({})),
            diagnostics: None,
            parent_id: parent.map(str::to_string),
            delta: None,
            note: String::new(),
        }
    }

    fn project() -> Project {
        Project::new("p".into(), "test", "bundled", BTreeMap::new(), "t0".into()).unwrap()
    }

    #[test]
    fn empty_name_rejected() {
        let e = Project::new("p".into(), "  ", "bundled", BTreeMap::new(), "t0".into()).unwrap_err();
        assert_eq!(e.field_path().as_deref(), Some("name"));
    }

    #[test]
    fn bad_overrides_rejected_with_path() {
        let mut o = BTreeMap::new();
        o.insert(MachineFamily::Srm, json!({"efficency": 0.9}));
        let e = Project::new("p".into(), "x", "bundled", o, "t0".into()).unwrap_err();
        assert_eq!(e.field_path().as_deref(), Some("constants_overrides.srm.efficency"));
    }

    #[test]
    fn invariants_catch_forward_and_duplicate_links() {
        let mut p = project();
        p.records = vec![record("r1", None), record("r2", Some("r1")), record("r3", Some("r2"))];
        p.check_invariants().unwrap();
        assert_eq!(p.lineage_depth("r3").unwrap(), 2);

        p.records = vec![record("r1", Some("r2")), record("r2", None)];
        assert!(p.check_invariants().is_err());
        p.records = vec![record("r1", None), record("r1", None)];
        assert!(p.check_invariants().is_err());
    }

    #[test]
    fn delta_of_identical_results_is_empty() {
        let spec = json!({"a": 1.0});
        let res = json!({"torque_gap": -2.0, "average_torque": 8.0, "main": {"diameter": 0.1}});
        assert!(delta_between(&spec, &spec, &res, Some(&res)).is_empty());
    }

    #[test]
    fn delta_reports_gap_movement() {
        let s0 = json!({"beta_s": 0.5});
        let s1 = json!({"beta_s": 0.52});
        let r0 = json!({"torque_gap": -2.0, "average_torque": 8.0, "main": {"diameter": 0.1}});
        let r1 = json!({"torque_gap": -1.5, "average_torque": 8.5, "main": {"diameter": 0.1}});
        let d = delta_between(&s0, &s1, &r0, Some(&r1));
        assert_eq!(d.changed_inputs, vec!["beta_s".to_string()]);
        let paths: Vec<_> = d.changed_outputs.iter().map(|c| c.path.as_str()).collect();
        assert_eq!(paths, vec!["average_torque", "torque_gap"]);
        let g = d.torque_gap.unwrap();
        assert!(g.improved);
        assert_eq!(g.torque_change, 0.5);
    }

    #[test]
    fn project_document_round_trips() {
        let mut p = project();
        p.records.push(record("r1", None));
        let text = serde_json::to_string(&p).unwrap();
        let back: Project = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
