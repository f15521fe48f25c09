//! Layered run configuration: built-in defaults, then an optional config
//! file (JSON object or flat `key = value` lines), then explicit flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{usage, CliResult};

/// Parses a config file. JSON objects are taken as is; otherwise every
/// non-empty line that is not a `#` comment must read `key = value`, and
/// values that parse as JSON (numbers, booleans, quoted strings) keep their type.
pub fn parse_config(text: &str) -> CliResult<Map<String, Value>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(map)) => Ok(normalize(map)),
            Ok(_) => Err(usage("config JSON must be an object")),
            Err(e) => Err(usage(format!("invalid config JSON: {e}"))),
        };
    }
    let mut map = Map::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("config line {} is not `key = value`", lineno + 1)));
        };
        let value = value.trim();
        let parsed = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
        map.insert(key.trim().replace('-', "_"), parsed);
    }
    Ok(map)
}

fn normalize(map: Map<String, Value>) -> Map<String, Value> {
    map.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect()
}

/// Merges defaults, the config file at `path` and `flags` (later wins).
pub fn resolve<T, F>(path: Option<&Path>, flags: &F) -> CliResult<T>
where
    T: Default + Serialize + DeserializeOwned,
    F: Serialize,
{
    let Value::Object(mut merged) = serde_json::to_value(T::default())? else {
        unreachable!("config types serialize to objects")
    };
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        for (k, v) in parse_config(&text)? {
            if !merged.contains_key(&k) {
                return Err(usage(format!("unknown config key `{k}`")));
            }
            merged.insert(k, v);
        }
    }
    if let Value::Object(explicit) = serde_json::to_value(flags)? {
        for (k, v) in explicit {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("invalid configuration: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    struct Demo {
        alpha: f64,
        method: String,
        runs: usize,
    }

    #[derive(Serialize)]
    struct Flags {
        runs: Option<usize>,
    }

    #[test]
    fn key_value_lines() {
        let m = parse_config("# comment\nalpha = 0.05\nmethod = AB\np-true = 0.2\n").unwrap();
        assert_eq!(m["alpha"], Value::from(0.05));
        assert_eq!(m["method"], Value::from("AB"));
        assert!(m.contains_key("p_true"));
        assert!(parse_config("alpha 0.05").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"alpha": 0.1, "runs": 3}"#).unwrap();
        let d: Demo = resolve(Some(&path), &Flags { runs: Some(7) }).unwrap();
        assert_eq!(d, Demo { alpha: 0.1, method: String::new(), runs: 7 });
        let d: Demo = resolve(Some(&path), &Flags { runs: None }).unwrap();
        assert_eq!(d.runs, 3);
        std::fs::write(&path, "bogus = 1").unwrap();
        assert!(resolve::<Demo, _>(Some(&path), &Flags { runs: None }).is_err());
    }
}
