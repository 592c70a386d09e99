//! Design workbench: projects of design records with what-if lineage,
//! report export and the `/api/v1` HTTP API.

pub mod api;
pub mod error;
pub mod export;
pub mod family;
pub mod project;
pub mod store;

use std::collections::BTreeMap;
use std::path::PathBuf;

use emcad_core::{CurveSeries, MaterialLibrary};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use error::{ErrorBody, WbResult, WorkbenchError};
pub use export::{ExportDocument, ExportFormat};
pub use family::MachineFamily;
pub use project::{DesignRecord, Project, RecordStatus};
pub use store::{write_atomic, ProjectStore};

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "EMCAD_DATA_DIR";

/// Reference stored in projects that use the library compiled into the
/// engine.
pub const BUNDLED_LIBRARY_REF: &str = "bundled";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewProject {
    pub name: String,
    #[serde(default)]
    pub constants_overrides: BTreeMap<MachineFamily, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub id: String,
    pub name: String,
    pub created: String,
    pub modified: String,
    pub records: usize,
}

pub struct Workbench {
    store: ProjectStore,
    library: MaterialLibrary,
    library_ref: String,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Workbench {
    pub fn open(
        data_dir: impl Into<PathBuf>,
        library: MaterialLibrary,
        library_ref: impl Into<String>,
    ) -> WbResult<Self> {
        Ok(Workbench {
            store: ProjectStore::open(data_dir)?,
            library,
            library_ref: library_ref.into(),
        })
    }

    pub fn library(&self) -> &MaterialLibrary {
        &self.library
    }

    pub fn library_ref(&self) -> &str {
        &self.library_ref
    }

    pub fn bh_curve(&self, material: &str) -> WbResult<CurveSeries> {
        self.library
            .get(material)
            .map(|m| m.bh_curve())
            .ok_or_else(|| WorkbenchError::NotFound {
                what: "material",
                id: material.to_string(),
            })
    }

    pub fn create_project(&self, req: NewProject) -> WbResult<Project> {
        let id = uuid::Uuid::new_v4().to_string();
        let project = Project::new(id, &req.name, &self.library_ref, req.constants_overrides, now())?;
        self.store.create(&project)?;
        Ok(project)
    }

    pub fn project(&self, id: &str) -> WbResult<Project> {
        self.store.load(id)
    }

    pub fn list_projects(&self) -> WbResult<Vec<ProjectSummary>> {
        let mut out = Vec::new();
        for id in self.store.ids()? {
            let p = match self.store.load(&id) {
                Ok(p) => p,
                Err(WorkbenchError::NotFound { .. }) => continue,
                Err(e) => return Err(e),
            };
            out.push(ProjectSummary {
                id: p.id,
                name: p.name,
                created: p.created,
                modified: p.modified,
                records: p.records.len(),
            });
        }
        Ok(out)
    }

    pub fn delete_project(&self, id: &str) -> WbResult<()> {
        self.store.delete(id)
    }

    pub fn run_design(&self, id: &str, family: MachineFamily, spec: Value, note: String) -> WbResult<DesignRecord> {
        self.store
            .update(id, now(), |p| p.run_design(family, spec, note, &self.library))
    }

    pub fn what_if(&self, id: &str, parent_id: &str, patch: &Value) -> WbResult<DesignRecord> {
        self.store
            .update(id, now(), |p| p.what_if(parent_id, patch, &self.library))
    }

    pub fn record(&self, id: &str, rid: &str) -> WbResult<DesignRecord> {
        Ok(self.store.load(id)?.record(rid)?.clone())
    }

    pub fn curve(&self, id: &str, rid: &str, name: &str) -> WbResult<CurveSeries> {
        let record = self.record(id, rid)?;
        let result = match (&record.status, &record.result) {
            (RecordStatus::Succeeded, Some(r)) => r,
            _ => return Err(WorkbenchError::RecordFailed(record.id)),
        };
        family::curves_in(result)
            .remove(name)
            .ok_or_else(|| WorkbenchError::NotFound {
                what: "curve",
                id: name.to_string(),
            })
    }

    pub fn export(&self, id: &str, rid: &str, format: ExportFormat) -> WbResult<Vec<u8>> {
        let record = self.record(id, rid)?;
        match format {
            ExportFormat::Doc => Ok(ExportDocument::new(Some(id.to_string()), &self.library_ref, &record)?.to_bytes()),
            ExportFormat::Csv => Ok(export::csv_bundle_text(&export::csv_bundle(&record)?).into_bytes()),
        }
    }
}
