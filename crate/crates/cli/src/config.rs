//! Config file loading and `key=value` overrides.

use std::collections::BTreeSet;
use std::path::Path;

use pinching_noma::experiments::RunConfig;
use serde_json::{Map, Value};

use crate::CliError;

/// Every dotted key a config file may set, taken from the serialized defaults.
pub fn known_keys() -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    collect_keys(&RunConfig::default().to_json_value(), "", &mut keys);
    keys
}

fn collect_keys(value: &Value, prefix: &str, out: &mut BTreeSet<String>) {
    if let Value::Object(map) = value {
        for (k, v) in map {
            let key = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            if v.is_object() {
                collect_keys(v, &key, out);
            }
            out.insert(key);
        }
    }
}

/// Parses `key=value`. The value is read as JSON when it parses, otherwise as a string.
pub fn parse_override(raw: &str) -> Result<(String, Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override {raw:?} is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Usage(format!(
            "override {raw:?} has an empty key"
        )));
    }
    if !known_keys().contains(key) {
        return Err(CliError::Usage(format!("unknown override key {key:?}")));
    }
    let value =
        serde_json::from_str(value.trim()).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.to_string(), value))
}

fn apply_override(root: &mut Map<String, Value>, key: &str, value: Value) {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut node = root;
    for part in parts {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        if !entry.is_object() {
            *entry = Value::Object(Map::new());
        }
        node = entry.as_object_mut().expect("just ensured object");
    }
    node.insert(last.to_string(), value);
}

/// Reads the config file, applies overrides in order and validates the result.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let parsed = overrides
        .iter()
        .map(|raw| parse_override(raw))
        .collect::<Result<Vec<_>, _>>()?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("malformed JSON in {}: {e}", path.display())))?;
    let Value::Object(mut root) = value else {
        return Err(CliError::Config(format!(
            "{}: top level must be an object",
            path.display()
        )));
    };
    for (key, value) in parsed {
        apply_override(&mut root, &key, value);
    }
    RunConfig::from_json_value(Value::Object(root))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(json: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(json.as_bytes()).unwrap();
        f
    }

    #[test]
    fn keys_include_nested_swarm_settings() {
        let keys = known_keys();
        assert!(keys.contains("num_users"));
        assert!(keys.contains("pso"));
        assert!(keys.contains("pso.inertia"));
        assert!(keys.contains("eps_grid"));
        assert!(!keys.contains("inertia"));
    }

    #[test]
    fn override_values() {
        assert_eq!(
            parse_override("num_users=4").unwrap(),
            ("num_users".into(), Value::from(4))
        );
        assert_eq!(
            parse_override("scoring=sampled_true").unwrap().1,
            Value::String("sampled_true".into())
        );
        assert_eq!(
            parse_override("eps_grid=[0.1,0.2]").unwrap().1,
            serde_json::json!([0.1, 0.2])
        );
        assert!(matches!(
            parse_override("num_user=4"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_override("num_users"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(parse_override("=3"), Err(CliError::Usage(_))));
    }

    #[test]
    fn overrides_apply_on_top_of_file() {
        let f = file(r#"{"num_users": 2, "pso": {"max_iters": 9}}"#);
        let cfg = load(
            f.path(),
            &[
                "num_users=5".into(),
                "pso.inertia=0.5".into(),
                "k_grid=[1]".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.system.num_users, 5);
        assert_eq!(cfg.pso.max_iters, 9);
        assert_eq!(cfg.pso.inertia, 0.5);
        assert_eq!(cfg.k_grid, vec![1]);
    }

    #[test]
    fn load_errors_are_config_errors() {
        let missing = Path::new("/nonexistent/c.json");
        assert!(matches!(load(missing, &[]), Err(CliError::Config(_))));
        let bad = file("{not json");
        assert!(matches!(load(bad.path(), &[]), Err(CliError::Config(_))));
        let infeasible = file(r#"{"num_pas": 30, "min_spacing": 1.0}"#);
        match load(infeasible.path(), &[]) {
            Err(CliError::Config(msg)) => assert!(msg.contains("min_spacing"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let typo = file(r#"{"num_user": 3}"#);
        assert!(matches!(load(typo.path(), &[]), Err(CliError::Config(_))));
    }
}
