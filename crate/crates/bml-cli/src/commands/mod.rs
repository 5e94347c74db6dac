pub mod render;
pub mod simulate;
pub mod spectrum;
pub mod sweep;
pub mod verify;

use std::path::Path;

use bml_core::dynamics::RedrawRule;
use bml_core::lattice::{Configuration, ConfigurationRecord, LatticeShape};

use crate::cli::RedrawArg;
use crate::error::CliError;

pub(crate) fn parse_shape(text: &str) -> Result<LatticeShape, CliError> {
    Ok(text.parse::<LatticeShape>()?)
}

/// Loads an initial configuration record, checking structural validity.
pub(crate) fn load_initial(path: &Path) -> Result<Configuration, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(CliError::io(format!("reading {}", path.display())))?;
    let record: ConfigurationRecord = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let config = record.to_configuration()?;
    if config.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: the dynamics need at least one particle",
            path.display()
        )));
    }
    Ok(config)
}

impl From<RedrawArg> for RedrawRule {
    fn from(arg: RedrawArg) -> Self {
        match arg {
            RedrawArg::Other => RedrawRule::OtherTypes,
            RedrawArg::All => RedrawRule::AllTypes,
        }
    }
}
