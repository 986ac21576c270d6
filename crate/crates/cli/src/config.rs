//! `--config` files merged under explicit flags.

use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub fn load(path: Option<&Path>) -> Result<Map<String, Value>, CliError> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("config: cannot read `{}`: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Input(format!("config: `{}` must hold a JSON object", path.display()))),
        Err(e) => Err(CliError::Input(format!("config: cannot parse `{}`: {e}", path.display()))),
    }
}

/// Overlays config values onto `parsed` for every argument of `cmd` that was
/// not given on the command line, consuming the keys it uses.
pub fn merge<T: Serialize + DeserializeOwned>(
    parsed: &T,
    cmd: &clap::Command,
    matches: &ArgMatches,
    config: &mut Map<String, Value>,
) -> Result<T, CliError> {
    let mut resolved = match serde_json::to_value(parsed) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    for arg in cmd.get_arguments() {
        let id = arg.get_id().as_str();
        if !resolved.contains_key(id) {
            continue;
        }
        let key = arg.get_long().unwrap_or(id);
        let Some(v) = config.remove(key).or_else(|| config.remove(id)) else {
            continue;
        };
        if matches.value_source(id) != Some(ValueSource::CommandLine) {
            resolved.insert(id.to_string(), v);
        }
    }
    serde_json::from_value(Value::Object(resolved)).map_err(|e| CliError::Input(format!("config: {e}")))
}

/// Rejects whatever `merge` did not consume.
pub fn finish(config: &mut Map<String, Value>, command: &str) -> Result<(), CliError> {
    if let Some(c) = config.remove("command") {
        if c.as_str() != Some(command) {
            return Err(CliError::Input(format!("config: key `command` is {c} but the command is `{command}`")));
        }
    }
    match config.keys().next() {
        Some(k) => Err(CliError::Input(format!("config: unknown key `{k}` for `{command}`"))),
        None => Ok(()),
    }
}
