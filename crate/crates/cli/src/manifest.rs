use std::collections::BTreeMap;
use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::FORMATS;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// What produced an output: enough to rerun it and check the inputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub formats: BTreeMap<&'static str, &'static str>,
    pub command_line: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
    pub outputs: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut f = File::open(path).map_err(|e| CliError::io_at(path, e))?;
    let mut h = Sha256::new();
    io::copy(&mut f, &mut h).map_err(|e| CliError::io_at(path, e))?;
    Ok(hex::encode(h.finalize()))
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

impl RunManifest {
    pub fn new(inputs: &[&Path], seed: Option<u64>, jobs: Option<usize>) -> Result<Self, CliError> {
        Ok(Self {
            tool: "aldi",
            version: env!("CARGO_PKG_VERSION"),
            formats: FORMATS.iter().copied().collect(),
            command_line: std::env::args().collect(),
            inputs: inputs
                .iter()
                .map(|p| {
                    Ok(InputDigest {
                        path: p.display().to_string(),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect::<Result<_, CliError>>()?,
            seed,
            jobs,
            timestamp: timestamp(),
            outputs: Vec::new(),
        })
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// `<artifact>.manifest.json` next to a single-file output.
    pub fn path_for(artifact: &Path) -> PathBuf {
        let mut name = artifact.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        artifact.with_file_name(name)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io_at(path, e))
    }
}
