//! Config-file loading, flag precedence and the usage/data error split.

use std::fmt;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// A bad command line: invalid value or combination. Exit status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

pub fn load(path: &Path) -> anyhow::Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    match serde_json::from_str(&text)
        .with_context(|| format!("config file {} is not valid JSON", path.display()))?
    {
        Value::Object(map) => Ok(map),
        _ => bail!("config file {} must hold a JSON object", path.display()),
    }
}

/// Fills every flag left unset on the command line from `config`.
///
/// Keys are the flag names in snake_case; unknown keys are rejected.
pub fn resolve<T: Serialize + DeserializeOwned>(
    flags: &T,
    config: Option<&Map<String, Value>>,
) -> anyhow::Result<T> {
    let Value::Object(mut merged) = serde_json::to_value(flags)? else {
        unreachable!("argument structs serialize to objects");
    };
    let Some(config) = config else {
        return Ok(serde_json::from_value(Value::Object(merged))?);
    };
    for (key, value) in config {
        match merged.get_mut(key) {
            None => {
                let mut known: Vec<&String> = merged.keys().collect();
                known.sort();
                bail!(
                    "config file: unknown key '{key}' for this subcommand (known: {})",
                    known
                        .iter()
                        .map(|k| k.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
            Some(slot) if slot.is_null() => *slot = value.clone(),
            Some(_) => {}
        }
    }
    serde_json::from_value(Value::Object(merged)).context("config file: invalid value")
}
