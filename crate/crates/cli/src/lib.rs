//! The `emcad` command line: batch design from spec files, curve export,
//! validation and the HTTP server.
//!
//! Exit codes: 0 success, 1 validation error, 2 engine infeasibility,
//! 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use emcad_core::materials::{bundled_library, load_material_library};
use emcad_core::MaterialLibrary;
use emcad_workbench::export::{csv_bundle, csv_bundle_text, ExportDocument, EXPORT_KIND};
use emcad_workbench::project::{DesignRecord, RecordStatus};
use emcad_workbench::{write_atomic, MachineFamily, Workbench, WorkbenchError, BUNDLED_LIBRARY_REF, DATA_DIR_ENV};
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "emcad", version, about = "Electrical machine design engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a design and write the report document (or its CSV bundle).
    Design(DesignArgs),
    /// Validate a spec, or re-validate a report written by `design`.
    Validate(ValidateArgs),
    /// Export one curve as CSV: `bh` for a material, or a design curve.
    Curves(CurvesArgs),
    /// List the material library.
    Materials(MaterialsArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Doc,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Material library file; defaults to the bundled steels.
    #[arg(long)]
    pub materials: Option<PathBuf>,
    /// Output format. With `doc`, errors are also written to stderr as JSON.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub family: MachineFamily,
    #[arg(long)]
    pub spec: PathBuf,
    /// Constants overrides merged over the family defaults.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Output file (doc) or directory (csv); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Needed when validating a bare spec.
    #[arg(long)]
    pub family: Option<MachineFamily>,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub constants: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// `bh`, or a curve field of the family report such as `torque_slip`.
    pub curve: String,
    #[arg(long)]
    pub material: Option<String>,
    #[arg(long)]
    pub family: Option<MachineFamily>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub constants: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MaterialsArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = DATA_DIR_ENV, default_value = "emcad-data")]
    pub data_dir: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

/// Errors as seen by the command line, each mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Workbench(WorkbenchError),
    Usage(String),
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Workbench(e) => match e {
                WorkbenchError::Invalid(_) | WorkbenchError::NotFound { .. } => EXIT_VALIDATION,
                WorkbenchError::Infeasible(_) | WorkbenchError::RecordFailed(_) => EXIT_INFEASIBLE,
                WorkbenchError::Io { .. } | WorkbenchError::Corrupt { .. } => EXIT_IO,
            },
        }
    }

    fn body(&self) -> emcad_workbench::ErrorBody {
        match self {
            CliError::Workbench(e) => e.body(),
            CliError::Usage(m) => emcad_workbench::ErrorBody {
                code: "usage_error".into(),
                message: m.clone(),
                field_path: None,
            },
            CliError::Io { .. } => emcad_workbench::ErrorBody {
                code: "io_error".into(),
                message: self.to_string(),
                field_path: None,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Workbench(e) => write!(f, "{e}"),
            CliError::Usage(m) => f.write_str(m),
            CliError::Io { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl From<WorkbenchError> for CliError {
    fn from(e: WorkbenchError) -> Self {
        CliError::Workbench(e)
    }
}

impl From<emcad_core::Error> for CliError {
    fn from(e: emcad_core::Error) -> Self {
        CliError::Workbench(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parse arguments, run, report errors on `stderr` and return the exit code.
pub fn run(args: impl IntoIterator<Item = OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
            } else {
                let _ = write!(stdout, "{}", e.render());
            }
            return code;
        }
    };
    let doc_errors = match &cli.command {
        Command::Design(a) => a.common.format == Some(Format::Doc),
        Command::Validate(a) => a.common.format == Some(Format::Doc),
        Command::Curves(a) => a.common.format == Some(Format::Doc),
        Command::Materials(a) => a.common.format == Some(Format::Doc),
        Command::Serve(a) => a.common.format == Some(Format::Doc),
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if doc_errors {
                let _ = writeln!(
                    stderr,
                    "{}",
                    serde_json::to_string(&e.body()).expect("error serializes")
                );
            } else {
                let _ = writeln!(stderr, "error: {e}");
            }
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Design(a) => design(a, stdout),
        Command::Validate(a) => validate(a, stdout),
        Command::Curves(a) => curves(a, stdout),
        Command::Materials(a) => materials(a, stdout),
        Command::Serve(a) => serve(a, stderr),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io {
        context: format!("reading {}", path.display()),
        source,
    })
}

fn read_json(path: &Path) -> CliResult<Value> {
    Ok(emcad_core::error::from_json_slice(&read(path)?)?)
}

fn library(common: &Common) -> CliResult<(MaterialLibrary, String)> {
    match &common.materials {
        None => Ok((bundled_library(), BUNDLED_LIBRARY_REF.to_string())),
        Some(p) => Ok((load_material_library(&read(p)?)?, p.display().to_string())),
    }
}

fn constants(family: MachineFamily, path: Option<&Path>) -> CliResult<Value> {
    let overrides = match path {
        Some(p) => read_json(p)?,
        None => Value::Null,
    };
    Ok(family.constants_with(&overrides)?)
}

fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, bytes).map_err(|source| CliError::Io {
            context: format!("writing {}", p.display()),
            source,
        }),
        None => stdout.write_all(bytes).map_err(|source| CliError::Io {
            context: "writing stdout".into(),
            source,
        }),
    }
}

/// Run one design as a standalone record `r1`.
fn design_record(
    family: MachineFamily,
    spec_path: &Path,
    constants_path: Option<&Path>,
    lib: &MaterialLibrary,
) -> CliResult<DesignRecord> {
    let spec = read_json(spec_path)?;
    let constants = constants(family, constants_path)?;
    family.validate_spec(&spec, lib)?;
    let result = family.run(&spec, &constants, lib)?;
    Ok(DesignRecord {
        id: "r1".into(),
        machine_family: family,
        spec,
        constants,
        status: RecordStatus::Succeeded,
        result: Some(result),
        diagnostics: None,
        parent_id: None,
        delta: None,
        note: String::new(),
    })
}

fn design(a: DesignArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (lib, lib_ref) = library(&a.common)?;
    let record = design_record(a.family, &a.spec, a.constants.as_deref(), &lib)?;
    match a.common.format.unwrap_or(Format::Doc) {
        Format::Doc => {
            let doc = ExportDocument::new(None, &lib_ref, &record)?;
            emit(a.out.as_deref(), &doc.to_bytes(), stdout)
        }
        Format::Csv => {
            let files = csv_bundle(&record)?;
            match &a.out {
                None => emit(None, csv_bundle_text(&files).as_bytes(), stdout),
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                        context: format!("creating {}", dir.display()),
                        source,
                    })?;
                    for (name, body) in files {
                        emit(Some(&dir.join(name)), body.as_bytes(), stdout)?;
                    }
                    Ok(())
                }
            }
        }
    }
}

fn validate(a: ValidateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (lib, _) = library(&a.common)?;
    let bytes = read(&a.spec)?;
    let doc: Value = emcad_core::error::from_json_slice(&bytes)?;
    if doc.get("kind").and_then(Value::as_str) == Some(EXPORT_KIND) {
        let doc = ExportDocument::reimport(&bytes, &lib)?;
        if let Some(f) = a.family {
            if f != doc.record.machine_family {
                return Err(WorkbenchError::invalid(
                    "record.machine_family",
                    format!("report is for `{}`, not `{f}`", doc.record.machine_family),
                )
                .into());
            }
        }
        return emit(None, b"ok: report re-validates\n", stdout);
    }
    let family = a
        .family
        .ok_or_else(|| CliError::Usage("--family is required when validating a spec".into()))?;
    family.validate_spec(&doc, &lib)?;
    constants(family, a.constants.as_deref())?;
    emit(None, b"ok: spec is valid\n", stdout)
}

fn curves(a: CurvesArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (lib, _) = library(&a.common)?;
    let csv = if a.curve == "bh" {
        let name = a
            .material
            .as_deref()
            .ok_or_else(|| CliError::Usage("`curves bh` needs --material".into()))?;
        lib.resolve("material", name)?.bh_curve().to_csv()
    } else {
        let (Some(family), Some(spec)) = (a.family, a.spec.as_deref()) else {
            return Err(CliError::Usage(format!(
                "`curves {}` needs --family and --spec",
                a.curve
            )));
        };
        let record = design_record(family, spec, a.constants.as_deref(), &lib)?;
        let files = csv_bundle(&record)?;
        let key = format!("{}.csv", a.curve);
        match files.get(&key) {
            Some(body) => body.clone(),
            None => {
                let known: Vec<_> = files.keys().map(|k| k.trim_end_matches(".csv")).collect();
                return Err(WorkbenchError::invalid(
                    "curve",
                    format!("no curve `{}`; {family} has {known:?}", a.curve),
                )
                .into());
            }
        }
    };
    emit(a.out.as_deref(), csv.as_bytes(), stdout)
}

fn materials(a: MaterialsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (lib, _) = library(&a.common)?;
    let text = match a.common.format {
        Some(Format::Doc) => lib.to_json() + "\n",
        _ => {
            let mut s = String::from("name,knee_flux_density,initial_relative_permeability,bh_points\n");
            for m in &lib.materials {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    m.name,
                    m.knee_flux_density(),
                    m.initial_relative_permeability(),
                    m.bh_points.len()
                ));
            }
            s
        }
    };
    emit(None, text.as_bytes(), stdout)
}

fn serve(a: ServeArgs, stderr: &mut dyn Write) -> CliResult<()> {
    let (lib, lib_ref) = library(&a.common)?;
    let wb = Arc::new(Workbench::open(&a.data_dir, lib, lib_ref)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
        context: "starting runtime".into(),
        source,
    })?;
    runtime.block_on(async move {
        let addr = std::net::SocketAddr::from(([127, 0, 0, 1], a.port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|source| CliError::Io {
                context: format!("binding {addr}"),
                source,
            })?;
        let bound = listener.local_addr().map_err(|source| CliError::Io {
            context: "reading bound address".into(),
            source,
        })?;
        let _ = writeln!(
            stderr,
            "serving /api/v1 on http://{bound} (data dir {})",
            a.data_dir.display()
        );
        let _ = stderr.flush();
        emcad_workbench::api::serve(listener, wb)
            .await
            .map_err(|source| CliError::Io {
                context: "serving".into(),
                source,
            })
    })
}
