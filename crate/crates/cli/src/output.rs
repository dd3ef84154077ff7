//! Artifact directory and run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use superl_core::grid::GridDescriptor;
use superl_core::{ScalarField64, SpinorField64};

use crate::CliError;

pub struct Output {
    dir: Option<PathBuf>,
    files: Vec<String>,
    plots: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config: &'a BTreeMap<String, String>,
    config_sha256: String,
    grid: Option<&'a GridDescriptor<f64>>,
    outputs: &'a [String],
}

/// Canonical text of a resolved configuration: sorted `key=value` lines.
pub fn canonical_config(config: &BTreeMap<String, String>) -> String {
    config.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Compute(format!("cannot write {}: {e}", path.display()))
}

impl Output {
    pub fn new(dir: Option<PathBuf>, plots: bool) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Self { dir, files: Vec::new(), plots })
    }

    pub fn plots(&self) -> bool {
        self.plots && self.dir.is_some()
    }

    pub fn text(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let p = d.join(name);
            fs::write(&p, content).map_err(|e| io_err(&p, e))?;
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if self.dir.is_some() {
            let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(e.to_string()))? + "\n";
            self.text(name, &text)?;
        }
        Ok(())
    }

    pub fn plot(&mut self, name: &str, svg: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.plots() {
            self.text(name, &svg())?;
        }
        Ok(())
    }

    /// Writes `<stem>.json` and its `<stem>.bin` sidecar.
    pub fn state(&mut self, stem: &str, u: &ScalarField64, psi: &SpinorField64) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let p = d.join(format!("{stem}.json"));
            superl_core::io::save_state(&p, u, psi).map_err(|e| io_err(&p, e))?;
            self.files.push(format!("{stem}.json"));
            self.files.push(format!("{stem}.bin"));
        }
        Ok(())
    }

    pub fn manifest(
        &mut self,
        subcommand: &str,
        config: &BTreeMap<String, String>,
        grid: Option<&GridDescriptor<f64>>,
    ) -> Result<(), CliError> {
        if self.dir.is_none() {
            return Ok(());
        }
        let files = self.files.clone();
        let m = Manifest {
            tool: "superl",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            config,
            config_sha256: sha256_hex(canonical_config(config).as_bytes()),
            grid,
            outputs: &files,
        };
        self.json("manifest.json", &m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        let mut c = BTreeMap::new();
        c.insert("b".to_string(), "2".to_string());
        c.insert("a".to_string(), "1".to_string());
        assert_eq!(canonical_config(&c), "a=1\nb=2\n");
    }
}
