//! Flat `key = value` config files mirroring the command-line flags.
//! Flags always override file values; unknown keys are usage errors.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(CliError::io(format!("reading config {}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "{}:{}: expected 'key = value', got {:?}",
                    path.display(),
                    lineno + 1,
                    raw
                ))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Rejects keys the current command does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown config key {key:?} (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("config key {key:?}: cannot parse value {raw:?}"))
            }),
        }
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}

/// Picks the first of flag value, config value, default.
pub fn resolve<T: FromStr + Clone>(
    flag: Option<T>,
    cfg: &ConfigFile,
    key: &str,
    default: Option<T>,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = cfg.get::<T>(key)? {
        return Ok(v);
    }
    default.ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
}
