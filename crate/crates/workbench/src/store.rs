//! One JSON document per project under `<data_dir>/projects/`.
//!
//! Writes go to a temporary file in the same directory and are renamed into
//! place, so readers never see a half-written document. Mutations of one
//! project are serialized by a per-project lock; reads take no lock.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::error::{WbResult, WorkbenchError};
use crate::project::Project;

/// Write `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub struct ProjectStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl ProjectStore {
    pub fn open(data_dir: impl Into<PathBuf>) -> WbResult<Self> {
        let dir = data_dir.into().join("projects");
        std::fs::create_dir_all(&dir).map_err(|e| WorkbenchError::io(format!("creating {}", dir.display()), e))?;
        Ok(ProjectStore {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    fn path(&self, id: &str) -> WbResult<PathBuf> {
        let plain = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !plain {
            return Err(WorkbenchError::NotFound {
                what: "project",
                id: id.to_string(),
            });
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    fn save(&self, project: &Project) -> WbResult<()> {
        let path = self.path(&project.id)?;
        let mut text = serde_json::to_vec_pretty(project).expect("project serializes");
        text.push(b'\n');
        write_atomic(&path, &text).map_err(|e| WorkbenchError::io(format!("writing {}", path.display()), e))
    }

    pub fn create(&self, project: &Project) -> WbResult<()> {
        let lock = self.lock_for(&project.id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        self.save(project)
    }

    pub fn load(&self, id: &str) -> WbResult<Project> {
        let path = self.path(id)?;
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(WorkbenchError::NotFound {
                    what: "project",
                    id: id.to_string(),
                })
            }
            Err(e) => return Err(WorkbenchError::io(format!("reading {}", path.display()), e)),
        };
        let project: Project = emcad_core::error::from_json_slice(&bytes).map_err(|e| WorkbenchError::Corrupt {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        project.check_invariants().map_err(|e| WorkbenchError::Corrupt {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(project)
    }

    /// Load, mutate and save one project under its lock. Nothing is written
    /// when `f` fails.
    pub fn update<T>(&self, id: &str, now: String, f: impl FnOnce(&mut Project) -> WbResult<T>) -> WbResult<T> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut project = self.load(id)?;
        let out = f(&mut project)?;
        project.modified = now;
        self.save(&project)?;
        Ok(out)
    }

    pub fn delete(&self, id: &str) -> WbResult<()> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.path(id)?;
        match std::fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(WorkbenchError::NotFound {
                what: "project",
                id: id.to_string(),
            }),
            Err(e) => Err(WorkbenchError::io(format!("removing {}", path.display()), e)),
        }
    }

    /// Ids of stored projects, sorted.
    pub fn ids(&self) -> WbResult<Vec<String>> {
        let entries = std::fs::read_dir(&self.dir)
            .map_err(|e| WorkbenchError::io(format!("listing {}", self.dir.display()), e))?;
        let mut ids = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| WorkbenchError::io("listing projects", e))?;
            let name = entry.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".json")) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}
