//! Run manifest: everything needed to audit or re-run a command.

use std::time::Instant;

use serde::Serialize;

use crate::config::RawConfig;
use crate::outputs::{OutputRecord, OutputWriter};
use crate::CliError;

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub argv: Vec<String>,
    pub seed: u64,
    /// Input configuration normalized to internal units; re-resolving it
    /// reproduces the run's parameters bit-exactly.
    pub config_resolved: &'a RawConfig,
    pub timing_ms: Timing,
    pub outputs: &'a [OutputRecord],
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub extras: serde_json::Value,
}

#[derive(Serialize)]
pub struct Timing {
    pub total_ms: u128,
}

/// Write `manifest_<command>.json` beside the command outputs.
pub fn write_manifest(
    writer: &mut OutputWriter,
    command: &str,
    seed: u64,
    config_resolved: &RawConfig,
    started: Instant,
    extras: serde_json::Value,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        tool: "numsplit",
        version: env!("CARGO_PKG_VERSION"),
        command,
        argv: std::env::args().collect(),
        seed,
        config_resolved,
        timing_ms: Timing {
            total_ms: started.elapsed().as_millis(),
        },
        outputs: writer.records(),
        extras,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    let name = format!("manifest_{command}.json");
    let path = writer.out_dir().join(&name);
    std::fs::write(&path, json.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

