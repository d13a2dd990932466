use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use rae_core::Result;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Written next to every experiment's outputs. Contains nothing
/// time-dependent, so reruns reproduce it byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub experiment: &'a str,
    pub toolkit_version: &'a str,
    /// SHA-256 of the resolved configuration's JSON encoding.
    pub config_hash: String,
    pub seeds: &'a [u64],
    pub config: &'a C,
    pub outputs: Vec<String>,
}

impl<'a, C: Serialize> Manifest<'a, C> {
    pub fn new(experiment: &'a str, config: &'a C, seeds: &'a [u64], outputs: Vec<String>) -> Self {
        Manifest {
            experiment,
            toolkit_version: TOOLKIT_VERSION,
            config_hash: config_hash(config),
            seeds,
            config,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::from)?;
        text.push('\n');
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}

pub fn config_hash<C: Serialize>(config: &C) -> String {
    let json = serde_json::to_vec(config).expect("configs serialise");
    hex(&Sha256::digest(json))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
