//! Recursive merge of sparse JSON patches, used for constants overrides and
//! what-if spec patches.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{from_json_value, Error, Result};

/// Merge `patch` into `base` by field name. Objects merge recursively; any
/// other patch value replaces the base value. Fields absent from `base` are
/// rejected so a typo never silently disappears.
pub fn merge_strict(base: &mut Value, patch: &Value) -> Result<()> {
    merge_at(base, patch, "")
}

fn merge_at(base: &mut Value, patch: &Value, path: &str) -> Result<()> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let sub = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_at(slot, v, &sub)?,
                    Some(slot) => *slot = v.clone(),
                    None => return Err(Error::invalid(sub, "unknown field")),
                }
            }
            Ok(())
        }
        (b, p) => {
            *b = p.clone();
            Ok(())
        }
    }
}

/// Serialize `defaults`, merge `overrides` over them and deserialize back.
pub fn with_overrides<T: Serialize + DeserializeOwned>(defaults: &T, overrides: &Value) -> Result<T> {
    let mut base = serde_json::to_value(defaults).expect("constants serialize");
    merge_strict(&mut base, overrides)?;
    from_json_value(base)
}

/// Paths (dotted) of every leaf where `a` and `b` differ.
pub fn changed_paths(a: &Value, b: &Value) -> Vec<String> {
    let mut out = Vec::new();
    diff_at(a, b, "", &mut out);
    out
}

fn diff_at(a: &Value, b: &Value, path: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let sub = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => diff_at(u, v, &sub, out),
                    _ => out.push(sub),
                }
            }
        }
        _ if a != b => out.push(path.to_string()),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merges_nested_and_rejects_unknown() {
        let mut base = json!({"a": 1, "b": {"c": 2, "d": 3}});
        merge_strict(&mut base, &json!({"b": {"d": 4}})).unwrap();
        assert_eq!(base, json!({"a": 1, "b": {"c": 2, "d": 4}}));
        let err = merge_strict(&mut base, &json!({"b": {"zz": 1}})).unwrap_err();
        assert_eq!(err.field_path(), Some("b.zz"));
    }

    #[test]
    fn diff_lists_changed_leaves() {
        let a = json!({"a": 1, "b": {"c": 2, "d": 3}});
        let b = json!({"a": 1, "b": {"c": 5, "d": 3}});
        assert_eq!(changed_paths(&a, &b), vec!["b.c".to_string()]);
        assert!(changed_paths(&a, &a).is_empty());
    }
}
