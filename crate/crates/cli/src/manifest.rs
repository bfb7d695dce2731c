use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, write_atomic, OutputFile};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub config_path: String,
    pub config: serde_json::Value,
    pub started_unix_seconds: f64,
    pub wall_time_seconds: f64,
    pub threads: usize,
    pub cache: String,
    pub outputs: Vec<OutputFile>,
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Numeric(e.to_string()))?;
        write_atomic(&dir.join(MANIFEST_NAME), text.as_bytes())
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Numeric(format!("bad manifest: {e}")))
    }

    /// Every listed output exists next to the manifest with its checksum.
    pub fn verify(&self, dir: &Path) -> CliResult<()> {
        for f in &self.outputs {
            let path = dir.join(&f.name);
            let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            if sha256_hex(&bytes) != f.sha256 || bytes.len() as u64 != f.bytes {
                return Err(CliError::Numeric(format!("{} does not match its checksum", f.name)));
            }
        }
        Ok(())
    }
}
