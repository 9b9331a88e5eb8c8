//! Config ingestion: TOML (or JSON) files, manifests as configs, and a
//! fail-closed key check that reports every unknown key at once.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Allowed keys of a config object.
pub enum Shape {
    Leaf,
    Obj(&'static [(&'static str, Shape)]),
    /// Internally tagged: the keys allowed depend on the tag value.
    Tagged(&'static str, &'static [(&'static str, &'static [(&'static str, Shape)])]),
}

use Shape::{Leaf, Obj, Tagged};

const MU: Shape = Obj(&[("c", Leaf), ("a", Leaf), ("exponents", Leaf)]);
const P: Shape = Obj(&[("c", Leaf), ("b", Leaf), ("exponents", Leaf)]);
pub const SCHEME: Shape = Tagged(
    "variant",
    &[
        ("full", &[]),
        ("singleton", &[]),
        ("top", &[]),
        ("last_n", &[("n", Leaf)]),
        ("ratio", &[("ratios", Leaf)]),
        ("custom", &[("sets", Leaf)]),
    ],
);
const MIXING: Shape = Tagged(
    "kind",
    &[
        ("point_mass_one", &[]),
        ("finite_discrete", &[("atoms", Leaf), ("weights", Leaf), ("mean", Leaf)]),
        ("scheme_derived", &[("scheme", SCHEME)]),
    ],
);
const MODEL: Shape = Tagged(
    "model",
    &[
        ("deterministic_x", &[("mu", MU), ("p", P)]),
        ("subset_uniform", &[("scheme", SCHEME)]),
        ("truncated_poisson", &[("theta0", Leaf)]),
    ],
);

pub const DENSITY: Shape = Obj(&[("theta", Leaf), ("x_max", Leaf), ("points_per_unit", Leaf), ("tol", Leaf)]);
pub const SAMPLE: Shape = Obj(&[("theta", Leaf), ("mixing", MIXING), ("count", Leaf), ("tol", Leaf)]);
pub const CLASSIFY: Shape = Obj(&[("mu", MU), ("p", P), ("scheme", SCHEME)]);
pub const SIMULATE: Shape = Obj(&[("model", MODEL), ("n_grid", Leaf), ("replicates", Leaf)]);
pub const INVERSIONS: Shape = Obj(&[("scheme", SCHEME), ("n", Leaf), ("replicates", Leaf)]);
pub const SMOOTH: Shape = Obj(&[("N", Leaf), ("s", Leaf)]);

fn join(path: &str, key: &str) -> String {
    if path.is_empty() { key.to_string() } else { format!("{path}.{key}") }
}

fn check_fields(obj: &Map<String, Value>, fields: &[(&str, Shape)], path: &str, skip: Option<&str>, out: &mut Vec<String>) {
    for (key, value) in obj {
        if Some(key.as_str()) == skip {
            continue;
        }
        match fields.iter().find(|(k, _)| k == key) {
            Some((_, shape)) => walk(value, shape, &join(path, key), out),
            None => out.push(join(path, key)),
        }
    }
}

fn walk(value: &Value, shape: &Shape, path: &str, out: &mut Vec<String>) {
    let Value::Object(obj) = value else { return };
    match shape {
        Leaf => {}
        Obj(fields) => check_fields(obj, fields, path, None, out),
        Tagged(tag, variants) => {
            // an unknown or missing tag is reported by the typed parse
            let Some(name) = obj.get(*tag).and_then(Value::as_str) else { return };
            if let Some((_, fields)) = variants.iter().find(|(v, _)| *v == name) {
                check_fields(obj, fields, path, Some(tag), out);
            }
        }
    }
}

/// Dotted paths of every key not allowed by `shape`.
pub fn unknown_keys(value: &Value, shape: &Shape) -> Vec<String> {
    let mut out = Vec::new();
    walk(value, shape, "", &mut out);
    out
}

/// A config after source resolution: the subcommand's object and its seed.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Value,
    pub seed: u64,
}

fn read_value(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    } else {
        let t: toml::Value =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| CliError::Validation(e.to_string()))
    }
}

fn seed_of(v: &Value) -> CliResult<u64> {
    v.as_u64().ok_or_else(|| CliError::Validation(format!("seed must be a nonnegative integer, got {v}")))
}

/// Reads a config file or a previous run's manifest. A `seed` key in a
/// config, the manifest's master seed and `seed_override` apply in
/// increasing precedence; the default is 0.
pub fn load(path: &Path, subcommand: &str, shape: &Shape, seed_override: Option<u64>) -> CliResult<Loaded> {
    let value = read_value(path)?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::Validation("config must be a key/value object".into()));
    };
    let (config, seed) = if obj.contains_key("subcommand") && obj.contains_key("config") {
        let recorded = obj.get("subcommand").and_then(Value::as_str).unwrap_or_default();
        if recorded != subcommand {
            return Err(CliError::Validation(format!("manifest belongs to `{recorded}`, not `{subcommand}`")));
        }
        let seed = obj.get("master_seed").map(seed_of).transpose()?;
        (obj.remove("config").unwrap_or(Value::Null), seed)
    } else {
        let seed = obj.remove("seed").as_ref().map(seed_of).transpose()?;
        (Value::Object(obj), seed)
    };
    let unknown = unknown_keys(&config, shape);
    if !unknown.is_empty() {
        return Err(CliError::Validation(format!("unknown config keys: {}", unknown.join(", "))));
    }
    Ok(Loaded { config, seed: seed_override.or(seed).unwrap_or(0) })
}

pub fn parse<T: DeserializeOwned>(config: &Value) -> CliResult<T> {
    serde_json::from_value(config.clone()).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn reports_every_unknown_key() {
        let v = json!({
            "model": {"model": "deterministic_x", "mu": {"c": 1, "a": [1], "d": 2}, "p": {"c": 1, "b": [1]}, "extra": 1},
            "n_grid": [10],
            "replicates": 100,
            "colour": "red"
        });
        let mut keys = unknown_keys(&v, &SIMULATE);
        keys.sort();
        assert_eq!(keys, vec!["colour", "model.extra", "model.mu.d"]);
    }

    #[test]
    fn tag_selects_allowed_keys() {
        let v = json!({"scheme": {"variant": "top", "n": 3}, "n": 10, "replicates": 100});
        assert_eq!(unknown_keys(&v, &INVERSIONS), vec!["scheme.n"]);
        let ok = json!({"scheme": {"variant": "last_n", "n": 3}, "n": 10, "replicates": 100});
        assert!(unknown_keys(&ok, &INVERSIONS).is_empty());
    }
}
