//! Config files and their merge with command-line flags.
//!
//! A config file is a flat TOML table whose keys are the long flag names of
//! one command with `-` replaced by `_`. Arrays stand in for comma lists and
//! a measure can be given inline:
//!
//! ```toml
//! measure = { denominator = 4, support = [
//!     { vector = [1, 0], weight = 1 }, { vector = [-1, 0], weight = 1 },
//!     { vector = [0, 1], weight = 1 }, { vector = [0, -1], weight = 1 },
//! ] }
//! mode = "full"
//! z0 = [0, 0]
//! trials = 100000
//! ```
//!
//! Flags given on the command line override file values.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Merges `flags` over the optional config file and returns the result.
pub fn resolve<T>(flags: &T, file: Option<&Path>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let Some(path) = file else {
        return flags_roundtrip(flags);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    let known = keys(&T::default())?;
    let mut unknown: Vec<&String> = table.keys().filter(|k| !known.contains(k)).collect();
    if !unknown.is_empty() {
        unknown.sort();
        return Err(CliError::Validation(format!(
            "config {}: unknown key(s) {} (allowed: {})",
            path.display(),
            unknown.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", "),
            known.join(", ")
        )));
    }
    let mut merged = serde_json::to_value(&table).map_err(internal)?;
    let Value::Object(over) = serde_json::to_value(flags).map_err(internal)? else {
        return Err(CliError::Runtime("flags did not serialize to a table".into()));
    };
    let target = merged.as_object_mut().expect("toml table is an object");
    for (k, v) in over {
        if !v.is_null() {
            target.insert(k, v);
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

fn flags_roundtrip<T: Serialize + DeserializeOwned>(flags: &T) -> Result<T, CliError> {
    serde_json::from_value(serde_json::to_value(flags).map_err(internal)?).map_err(|e| CliError::Validation(e.to_string()))
}

fn keys<T: Serialize>(value: &T) -> Result<Vec<String>, CliError> {
    match serde_json::to_value(value).map_err(internal)? {
        Value::Object(m) => Ok(m.keys().cloned().collect()),
        _ => Ok(Vec::new()),
    }
}

fn internal(e: serde_json::Error) -> CliError {
    CliError::Runtime(format!("config serialization: {e}"))
}

/// The merged config as a JSON object with unset keys dropped.
pub fn echo<T: Serialize>(config: &T) -> Value {
    match serde_json::to_value(config) {
        Ok(Value::Object(m)) => Value::Object(m.into_iter().filter(|(_, v)| !v.is_null()).collect::<Map<_, _>>()),
        Ok(other) => other,
        Err(_) => Value::Null,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use std::io::Write;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    struct Demo {
        steps: Option<u64>,
        seed: Option<u64>,
        name: Option<String>,
    }

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn flags_override_file() {
        let f = file("steps = 10\nseed = 3\n");
        let flags = Demo {
            seed: Some(9),
            ..Demo::default()
        };
        let got = resolve(&flags, Some(f.path())).unwrap();
        assert_eq!(
            got,
            Demo {
                steps: Some(10),
                seed: Some(9),
                name: None
            }
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = file("steps = 10\nstep = 3\n");
        let err = resolve(&Demo::default(), Some(f.path())).unwrap_err();
        assert!(matches!(err, CliError::Validation(m) if m.contains("`step`")));
    }

    #[test]
    fn type_errors_are_validation_errors() {
        let f = file("steps = \"ten\"\n");
        assert!(matches!(resolve(&Demo::default(), Some(f.path())), Err(CliError::Validation(_))));
    }
}
