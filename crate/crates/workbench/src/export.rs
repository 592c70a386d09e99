//! Export of succeeded records as a self-contained document or a CSV
//! bundle, and reimport with re-validation.

use std::collections::BTreeMap;

use emcad_core::{CurveSeries, MaterialLibrary};
use serde::{Deserialize, Serialize};

use crate::error::{WbResult, WorkbenchError};
use crate::family::{curves_in, tables_in};
use crate::project::{DesignRecord, RecordStatus};

pub const EXPORT_SCHEMA_VERSION: u32 = 1;
pub const EXPORT_KIND: &str = "design_export";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Doc,
    Csv,
}

/// A record with its spec, constants snapshot, result and every curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportDocument {
    pub schema_version: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project_id: Option<String>,
    pub material_library_ref: String,
    pub record: DesignRecord,
    pub curves: BTreeMap<String, CurveSeries>,
}

impl ExportDocument {
    pub fn new(project_id: Option<String>, material_library_ref: &str, record: &DesignRecord) -> WbResult<Self> {
        let result = succeeded_result(record)?;
        Ok(ExportDocument {
            schema_version: EXPORT_SCHEMA_VERSION,
            kind: EXPORT_KIND.to_string(),
            project_id,
            material_library_ref: material_library_ref.to_string(),
            record: record.clone(),
            curves: curves_in(result),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("export serializes");
        out.push(b'\n');
        out
    }

    /// Parse an export document and check that its result re-derives from
    /// its spec and constants snapshot under `library`.
    pub fn reimport(bytes: &[u8], library: &MaterialLibrary) -> WbResult<Self> {
        let doc: ExportDocument = emcad_core::error::from_json_slice(bytes).map_err(WorkbenchError::Invalid)?;
        if doc.kind != EXPORT_KIND {
            return Err(WorkbenchError::invalid(
                "kind",
                format!("expected `{EXPORT_KIND}`, got `{}`", doc.kind),
            ));
        }
        if doc.schema_version != EXPORT_SCHEMA_VERSION {
            return Err(WorkbenchError::invalid(
                "schema_version",
                format!("unsupported version {}", doc.schema_version),
            ));
        }
        doc.revalidate(library)?;
        Ok(doc)
    }

    /// Re-run the engine and compare with the stored result and curves.
    pub fn revalidate(&self, library: &MaterialLibrary) -> WbResult<()> {
        let stored = succeeded_result(&self.record)?;
        let family = self.record.machine_family;
        let fresh = family.run(&self.record.spec, &self.record.constants, library)?;
        if &fresh != stored {
            let diff = emcad_core::merge::changed_paths(stored, &fresh);
            return Err(WorkbenchError::invalid(
                "record.result",
                format!("result does not re-derive from spec and constants; differing fields: {diff:?}"),
            ));
        }
        if self.curves != curves_in(stored) {
            return Err(WorkbenchError::invalid(
                "curves",
                "curves differ from the record result",
            ));
        }
        Ok(())
    }
}

fn succeeded_result(record: &DesignRecord) -> WbResult<&serde_json::Value> {
    match (&record.status, &record.result) {
        (RecordStatus::Succeeded, Some(r)) => Ok(r),
        _ => Err(WorkbenchError::RecordFailed(record.id.clone())),
    }
}

/// One CSV file per curve (`<field>.csv`) plus family tables.
pub fn csv_bundle(record: &DesignRecord) -> WbResult<BTreeMap<String, String>> {
    let result = succeeded_result(record)?;
    let mut files: BTreeMap<String, String> = curves_in(result)
        .into_iter()
        .map(|(k, c)| (format!("{k}.csv"), c.to_csv()))
        .collect();
    for (k, table) in tables_in(record.machine_family, result) {
        files.insert(format!("{k}.csv"), table);
    }
    Ok(files)
}

/// A CSV bundle as a single text stream: each file is preceded by a
/// `# file: <name>` line.
pub fn csv_bundle_text(files: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (name, body) in files {
        out.push_str(&format!("# file: {name}\n"));
        out.push_str(body);
    }
    out
}

/// Split a stream produced by [`csv_bundle_text`] back into files.
pub fn parse_csv_bundle_text(text: &str) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    let mut current: Option<(String, String)> = None;
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("# file: ") {
            if let Some((n, b)) = current.take() {
                files.insert(n, b);
            }
            current = Some((name.to_string(), String::new()));
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
        }
    }
    if let Some((n, b)) = current {
        files.insert(n, b);
    }
    files
}
