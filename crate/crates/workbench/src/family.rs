//! Dispatch from a machine family name to its engine pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use emcad_core::error::from_json_value;
use emcad_core::merge::with_overrides;
use emcad_core::{dcmachine, induction, srm, synchronous, transformer};
use emcad_core::{CurveSeries, Error, MaterialLibrary};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineFamily {
    Transformer,
    Induction,
    Synchronous,
    Dc,
    Srm,
}

impl MachineFamily {
    pub const ALL: [MachineFamily; 5] = [
        MachineFamily::Transformer,
        MachineFamily::Induction,
        MachineFamily::Synchronous,
        MachineFamily::Dc,
        MachineFamily::Srm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MachineFamily::Transformer => "transformer",
            MachineFamily::Induction => "induction",
            MachineFamily::Synchronous => "synchronous",
            MachineFamily::Dc => "dc",
            MachineFamily::Srm => "srm",
        }
    }

    /// Default constants document for the family.
    pub fn default_constants(self) -> Value {
        let v = match self {
            MachineFamily::Transformer => serde_json::to_value(transformer::TransformerConstants::default()),
            MachineFamily::Induction => serde_json::to_value(induction::IMConstants::default()),
            MachineFamily::Synchronous => serde_json::to_value(synchronous::SyncConstants::default()),
            MachineFamily::Dc => serde_json::to_value(dcmachine::DCConstants::default()),
            MachineFamily::Srm => serde_json::to_value(srm::SRMConstants::default()),
        };
        v.expect("constants serialize")
    }

    /// Family defaults with a sparse overrides document merged over them.
    /// The result is the full constants snapshot stored with a record.
    pub fn constants_with(self, overrides: &Value) -> Result<Value, Error> {
        fn go<C: Default + Serialize + DeserializeOwned>(overrides: &Value) -> Result<Value, Error> {
            let c: C = with_overrides(&C::default(), overrides).map_err(prefix_constants)?;
            Ok(serde_json::to_value(c).expect("constants serialize"))
        }
        if overrides.is_null() {
            return Ok(self.default_constants());
        }
        match self {
            MachineFamily::Transformer => go::<transformer::TransformerConstants>(overrides),
            MachineFamily::Induction => go::<induction::IMConstants>(overrides),
            MachineFamily::Synchronous => go::<synchronous::SyncConstants>(overrides),
            MachineFamily::Dc => go::<dcmachine::DCConstants>(overrides),
            MachineFamily::Srm => go::<srm::SRMConstants>(overrides),
        }
    }

    /// Parse and validate a spec without running the pipeline.
    pub fn validate_spec(self, spec: &Value, library: &MaterialLibrary) -> Result<(), Error> {
        match self {
            MachineFamily::Transformer => {
                let s: transformer::TransformerSpec = parse(spec)?;
                s.validate()?;
                library.resolve("material", &s.material).map(|_| ())
            }
            MachineFamily::Induction => {
                let s: induction::IMSpec = parse(spec)?;
                s.validate()?;
                library.resolve("material", &s.material).map(|_| ())
            }
            MachineFamily::Synchronous => {
                let s: synchronous::SyncSpec = parse(spec)?;
                s.validate()?;
                library.resolve("material", &s.material).map(|_| ())
            }
            MachineFamily::Dc => {
                let s: dcmachine::DCSpec = parse(spec)?;
                s.validate()?;
                library.resolve("material", &s.material).map(|_| ())
            }
            MachineFamily::Srm => {
                let s: srm::SRMSpec = parse(spec)?;
                s.validate()?;
                library.resolve("material", &s.material).map(|_| ())
            }
        }
    }

    /// Run the family pipeline. `constants` is a full constants document
    /// (see [`MachineFamily::constants_with`]).
    pub fn run(self, spec: &Value, constants: &Value, library: &MaterialLibrary) -> Result<Value, Error> {
        match self {
            MachineFamily::Transformer => {
                let (s, c): (transformer::TransformerSpec, transformer::TransformerConstants) =
                    parse_pair(spec, constants)?;
                c.validate().map_err(prefix_constants)?;
                let m = library.resolve("material", &s.material)?;
                to_value(transformer::design_transformer(&s, &c, m)?)
            }
            MachineFamily::Induction => {
                let (s, c): (induction::IMSpec, induction::IMConstants) = parse_pair(spec, constants)?;
                c.validate().map_err(prefix_constants)?;
                let m = library.resolve("material", &s.material)?;
                to_value(induction::design_induction(&s, &c, m)?)
            }
            MachineFamily::Synchronous => {
                let (s, c): (synchronous::SyncSpec, synchronous::SyncConstants) = parse_pair(spec, constants)?;
                c.validate().map_err(prefix_constants)?;
                let m = library.resolve("material", &s.material)?;
                to_value(synchronous::design_synchronous(&s, &c, m)?)
            }
            MachineFamily::Dc => {
                let (s, c): (dcmachine::DCSpec, dcmachine::DCConstants) = parse_pair(spec, constants)?;
                c.validate().map_err(prefix_constants)?;
                let m = library.resolve("material", &s.material)?;
                to_value(dcmachine::design_dc(&s, &c, m)?)
            }
            MachineFamily::Srm => {
                let (s, c): (srm::SRMSpec, srm::SRMConstants) = parse_pair(spec, constants)?;
                c.validate().map_err(prefix_constants)?;
                let m = library.resolve("material", &s.material)?;
                to_value(srm::design_srm(&s, &c, m)?)
            }
        }
    }
}

impl fmt::Display for MachineFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MachineFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        MachineFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Validation {
                field: "machine_family".into(),
                message: format!("unknown family `{s}`, expected one of transformer, induction, synchronous, dc, srm"),
            })
    }
}

fn parse<T: DeserializeOwned>(spec: &Value) -> Result<T, Error> {
    from_json_value(spec.clone())
}

fn parse_pair<S: DeserializeOwned, C: DeserializeOwned>(spec: &Value, constants: &Value) -> Result<(S, C), Error> {
    let s = parse(spec)?;
    let c = parse(constants).map_err(prefix_constants)?;
    Ok((s, c))
}

fn to_value<T: Serialize>(design: T) -> Result<Value, Error> {
    Ok(serde_json::to_value(design).expect("design reports serialize"))
}

/// Constants errors carry paths relative to the constants document; prefix
/// them so they cannot be confused with spec fields.
fn prefix_constants(e: Error) -> Error {
    let join = |p: String| {
        if p.is_empty() {
            "constants".to_string()
        } else {
            format!("constants.{p}")
        }
    };
    match e {
        Error::Validation { field, message } => Error::Validation {
            field: join(field),
            message,
        },
        Error::Parse {
            line,
            column,
            path,
            message,
        } => Error::Parse {
            line,
            column,
            path: join(path),
            message,
        },
        other => other,
    }
}

/// Every curve in a result document, keyed by the result field holding it.
pub fn curves_in(result: &Value) -> BTreeMap<String, CurveSeries> {
    let mut out = BTreeMap::new();
    if let Value::Object(map) = result {
        for (k, v) in map {
            let looks_like_curve = v.get("points").is_some() && v.get("x_label").is_some();
            if looks_like_curve {
                if let Ok(c) = serde_json::from_value::<CurveSeries>(v.clone()) {
                    out.insert(k.clone(), c);
                }
            }
        }
    }
    out
}

/// Extra tables exported next to the curves. Only SRM reports carry one:
/// the flux-path table.
pub fn tables_in(family: MachineFamily, result: &Value) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if family != MachineFamily::Srm {
        return out;
    }
    let mut rows = vec!["index,name,enclosure_fraction,reluctance,inductance_contribution,solved_b".to_string()];
    let paths = result
        .get("aligned_path")
        .into_iter()
        .chain(result.get("flux_paths").and_then(Value::as_array).into_iter().flatten());
    for p in paths {
        let field = |k: &str| {
            p.get(k)
                .map(|v| v.to_string().trim_matches('"').to_string())
                .unwrap_or_default()
        };
        rows.push(
            [
                "index",
                "name",
                "enclosure_fraction",
                "reluctance",
                "inductance_contribution",
                "solved_b",
            ]
            .iter()
            .map(|k| field(k))
            .collect::<Vec<_>>()
            .join(","),
        );
    }
    out.insert("flux_paths".to_string(), rows.join("\n") + "\n");
    out
}
