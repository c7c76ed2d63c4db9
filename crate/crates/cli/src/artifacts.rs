use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nodal_core::config::RunConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliResult;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    arguments: &'a serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_sha256: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a RunConfig>,
    files: &'a BTreeMap<String, String>,
}

/// Files written into one output directory, plus `manifest.json`.
pub struct Artifacts {
    dir: PathBuf,
    command: &'static str,
    arguments: serde_json::Value,
    config: Option<(RunConfig, String)>,
    files: BTreeMap<String, String>,
}

impl Artifacts {
    /// `config` carries the resolved configuration and the bytes it was
    /// read from.
    pub fn new(
        dir: &Path,
        command: &'static str,
        arguments: serde_json::Value,
        config: Option<(&RunConfig, &[u8])>,
    ) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(nodal_core::Error::from)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            arguments,
            config: config.map(|(c, bytes)| (*c, sha256_hex(bytes))),
            files: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(self.dir.join(name), bytes).map_err(nodal_core::Error::from)?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| nodal_core::Error::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(self) -> CliResult<()> {
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            arguments: &self.arguments,
            config_sha256: self.config.as_ref().map(|c| c.1.as_str()),
            config: self.config.as_ref().map(|c| &c.0),
            files: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&m).map_err(|e| nodal_core::Error::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(self.dir.join("manifest.json"), text).map_err(nodal_core::Error::from)?;
        Ok(())
    }
}
