//! HTTP API under `/api/v1`. Bodies are JSON in the project document
//! format; errors are `{code, message, field_path}`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::WorkbenchError;
use crate::{ExportFormat, MachineFamily, NewProject, Workbench};

pub const API_PREFIX: &str = "/api/v1";

type AppState = Arc<Workbench>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDesignBody {
    machine_family: MachineFamily,
    spec: Value,
    #[serde(default)]
    note: String,
}

#[derive(Serialize)]
struct MaterialListing<'a> {
    schema_version: u32,
    materials: Vec<MaterialEntry<'a>>,
}

#[derive(Serialize)]
struct MaterialEntry<'a> {
    name: &'a str,
    description: &'a str,
    knee_flux_density: f64,
    initial_relative_permeability: f64,
    bh_points: usize,
}

impl IntoResponse for WorkbenchError {
    fn into_response(self) -> Response {
        let status = match &self {
            WorkbenchError::Invalid(emcad_core::Error::Parse { .. }) => StatusCode::BAD_REQUEST,
            WorkbenchError::Invalid(_) | WorkbenchError::Infeasible(_) => StatusCode::UNPROCESSABLE_ENTITY,
            WorkbenchError::NotFound { .. } => StatusCode::NOT_FOUND,
            WorkbenchError::RecordFailed(_) => StatusCode::CONFLICT,
            WorkbenchError::Io { .. } | WorkbenchError::Corrupt { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        json(status, &self.body())
    }
}

fn json<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("response serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn parse_body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, WorkbenchError> {
    emcad_core::error::from_json_slice(bytes).map_err(WorkbenchError::Invalid)
}

/// Run blocking store and engine work off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, WorkbenchError> + Send + 'static,
) -> Result<T, WorkbenchError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(WorkbenchError::io("worker", std::io::Error::other(e.to_string()))))
}

pub fn router(wb: AppState) -> Router {
    let api = Router::new()
        .route("/materials", get(list_materials))
        .route("/materials/{name}/bh", get(material_bh))
        .route("/families/{family}/constants", get(family_constants))
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}", get(get_project).delete(delete_project))
        .route("/projects/{id}/designs", post(run_design))
        .route("/projects/{id}/designs/{rid}", get(get_record))
        .route("/projects/{id}/designs/{rid}/what-if", post(what_if))
        .route("/projects/{id}/designs/{rid}/curves/{curve}", get(get_curve))
        .route("/projects/{id}/designs/{rid}/export", get(export))
        .fallback(not_found);
    Router::new().nest(API_PREFIX, api).with_state(wb)
}

/// Serve the API on an already-bound listener until the process ends.
pub async fn serve(listener: tokio::net::TcpListener, wb: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(wb)).await
}

async fn not_found() -> Response {
    WorkbenchError::NotFound {
        what: "route",
        id: "unknown".into(),
    }
    .into_response()
}

async fn list_materials(State(wb): State<AppState>) -> Response {
    let lib = wb.library();
    let listing = MaterialListing {
        schema_version: lib.schema_version,
        materials: lib
            .materials
            .iter()
            .map(|m| MaterialEntry {
                name: &m.name,
                description: &m.description,
                knee_flux_density: m.knee_flux_density(),
                initial_relative_permeability: m.initial_relative_permeability(),
                bh_points: m.bh_points.len(),
            })
            .collect(),
    };
    json(StatusCode::OK, &listing)
}

async fn material_bh(State(wb): State<AppState>, Path(name): Path<String>) -> Response {
    match wb.bh_curve(&name) {
        Ok(c) => json(StatusCode::OK, &c),
        Err(e) => e.into_response(),
    }
}

async fn family_constants(Path(family): Path<String>) -> Response {
    match family.parse::<MachineFamily>() {
        Ok(f) => json(StatusCode::OK, &f.default_constants()),
        Err(_) => WorkbenchError::NotFound {
            what: "family",
            id: family,
        }
        .into_response(),
    }
}

async fn create_project(State(wb): State<AppState>, body: Bytes) -> Response {
    let req: NewProject = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    match blocking(move || wb.create_project(req)).await {
        Ok(p) => json(StatusCode::CREATED, &p),
        Err(e) => e.into_response(),
    }
}

async fn list_projects(State(wb): State<AppState>) -> Response {
    match blocking(move || wb.list_projects()).await {
        Ok(l) => json(StatusCode::OK, &l),
        Err(e) => e.into_response(),
    }
}

async fn get_project(State(wb): State<AppState>, Path(id): Path<String>) -> Response {
    match blocking(move || wb.project(&id)).await {
        Ok(p) => json(StatusCode::OK, &p),
        Err(e) => e.into_response(),
    }
}

async fn delete_project(State(wb): State<AppState>, Path(id): Path<String>) -> Response {
    match blocking(move || wb.delete_project(&id)).await {
        Ok(()) => StatusCode::NO_CONTENT.into_response(),
        Err(e) => e.into_response(),
    }
}

async fn run_design(State(wb): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let req: RunDesignBody = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    match blocking(move || wb.run_design(&id, req.machine_family, req.spec, req.note)).await {
        Ok(r) => json(StatusCode::CREATED, &r),
        Err(e) => e.into_response(),
    }
}

async fn get_record(State(wb): State<AppState>, Path((id, rid)): Path<(String, String)>) -> Response {
    match blocking(move || wb.record(&id, &rid)).await {
        Ok(r) => json(StatusCode::OK, &r),
        Err(e) => e.into_response(),
    }
}

async fn what_if(State(wb): State<AppState>, Path((id, rid)): Path<(String, String)>, body: Bytes) -> Response {
    let patch: Value = if body.iter().all(u8::is_ascii_whitespace) {
        Value::Null
    } else {
        match parse_body(&body) {
            Ok(p) => p,
            Err(e) => return e.into_response(),
        }
    };
    match blocking(move || wb.what_if(&id, &rid, &patch)).await {
        Ok(r) => json(StatusCode::CREATED, &r),
        Err(e) => e.into_response(),
    }
}

async fn get_curve(State(wb): State<AppState>, Path((id, rid, curve)): Path<(String, String, String)>) -> Response {
    match blocking(move || wb.curve(&id, &rid, &curve)).await {
        Ok(c) => json(StatusCode::OK, &c),
        Err(e) => e.into_response(),
    }
}

async fn export(
    State(wb): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    Query(query): Query<HashMap<String, String>>,
) -> Response {
    if let Some(k) = query.keys().find(|k| k.as_str() != "format") {
        return WorkbenchError::invalid(k.clone(), "unknown query parameter").into_response();
    }
    let format = match query.get("format").map(String::as_str) {
        None | Some("doc") => ExportFormat::Doc,
        Some("csv") => ExportFormat::Csv,
        Some(other) => {
            return WorkbenchError::invalid("format", format!("expected `doc` or `csv`, got `{other}`")).into_response()
        }
    };
    match blocking(move || wb.export(&id, &rid, format)).await {
        Ok(bytes) => {
            let ctype = match format {
                ExportFormat::Doc => "application/json",
                ExportFormat::Csv => "text/csv",
            };
            (StatusCode::OK, [(header::CONTENT_TYPE, ctype)], bytes).into_response()
        }
        Err(e) => e.into_response(),
    }
}
