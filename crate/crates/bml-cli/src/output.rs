//! Output writers. Payload files are pure functions of flags and seed;
//! wall-clock metadata lives only in the `.meta.json` sidecar next to each
//! payload, which also names the pinned RNG.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use bml_core::dynamics::StepStats;
use bml_core::rng::RNG_ALGORITHM;

use crate::error::CliError;

pub const STEPS_SCHEMA: &str = "bml.steps.v1";
pub const SWEEP_SCHEMA: &str = "bml.sweep.v1";
pub const META_SCHEMA: &str = "bml.meta.v1";

pub fn write_steps_csv<W: Write>(w: &mut W, stats: &[StepStats]) -> std::io::Result<()> {
    writeln!(w, "schema,t,moved,velocity,type_changes")?;
    for s in stats {
        writeln!(
            w,
            "{STEPS_SCHEMA},{},{},{},{}",
            s.t, s.moved_count, s.velocity_instant, s.type_changes
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct StepRecord {
    schema: &'static str,
    t: u64,
    moved: u32,
    velocity: f64,
    type_changes: u32,
}

pub fn write_steps_jsonl<W: Write>(w: &mut W, stats: &[StepStats]) -> std::io::Result<()> {
    for s in stats {
        let record = StepRecord {
            schema: STEPS_SCHEMA,
            t: s.t,
            moved: s.moved_count,
            velocity: s.velocity_instant,
            type_changes: s.type_changes,
        };
        serde_json::to_writer(&mut *w, &record)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_json_report<T: Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Usage(format!("serializing report: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(format!("writing {}", path.display())))
}

/// Tracks wall-clock data for the sidecar without touching the payload.
pub struct RunClock {
    started: Instant,
    command: &'static str,
    invocation: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema: &'static str,
    command: &'static str,
    tool_version: &'static str,
    rng: &'static str,
    created_unix: u64,
    runtime_seconds: f64,
    invocation: &'a BTreeMap<String, String>,
}

impl RunClock {
    pub fn start(command: &'static str) -> Self {
        Self {
            started: Instant::now(),
            command,
            invocation: BTreeMap::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.invocation.insert(key.to_string(), value.to_string());
    }

    /// Writes `<payload>.meta.json` next to the payload file or directory.
    pub fn write_sidecar(&self, payload: &Path) -> Result<(), CliError> {
        let path = sidecar_path(payload);
        let sidecar = Sidecar {
            schema: META_SCHEMA,
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION"),
            rng: RNG_ALGORITHM,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            runtime_seconds: self.started.elapsed().as_secs_f64(),
            invocation: &self.invocation,
        };
        let mut text = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| CliError::Usage(format!("serializing sidecar: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(CliError::io(format!("writing {}", path.display())))
    }
}

pub fn sidecar_path(payload: &Path) -> PathBuf {
    let mut name = payload.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    payload.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let stats = vec![StepStats {
            t: 0,
            moved: vec![true, false],
            moved_count: 1,
            type_changes: 0,
            velocity_instant: 0.5,
        }];
        let mut buf = Vec::new();
        write_steps_csv(&mut buf, &stats).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "schema,t,moved,velocity,type_changes\nbml.steps.v1,0,1,0.5,0\n"
        );
    }

    #[test]
    fn jsonl_layout() {
        let stats = vec![StepStats {
            t: 3,
            moved: vec![true],
            moved_count: 1,
            type_changes: 1,
            velocity_instant: 1.0,
        }];
        let mut buf = Vec::new();
        write_steps_jsonl(&mut buf, &stats).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"schema\":\"bml.steps.v1\",\"t\":3,\"moved\":1,\"velocity\":1.0,\"type_changes\":1}\n"
        );
    }

    #[test]
    fn sidecar_paths() {
        assert_eq!(
            sidecar_path(Path::new("runs/x.csv")),
            Path::new("runs/x.csv.meta.json")
        );
    }
}
