// SPDX-License-Identifier: Apache-2.0

//! Run manifests and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cprsim_core::{
    EnsembleConfig, GridSpec, IntegratorConfig, ModelParams, SystemState, UpdateRule,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::settings::Settings;

/// Everything needed to reproduce a run. Passing the manifest back through
/// `--config` replays it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub rule: UpdateRule,
    pub params: ModelParams,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub initial_state: Option<SystemState>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Data files, relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    /// Effective flat settings of the run.
    pub config: Settings,
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp: PathBuf = dir.join(tmp_name);
    let mut file = fs::File::create(&tmp).map_err(io_err)?;
    let written = file.write_all(bytes).and_then(|_| file.sync_all());
    drop(file);
    if let Err(e) = written.and_then(|_| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(e));
    }
    Ok(())
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Io(format!("cannot serialise manifest: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
