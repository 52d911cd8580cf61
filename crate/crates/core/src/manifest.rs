//! Run manifests: resolved configuration plus content hashes of every input
//! and output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Outputs whose content varies between runs (timings); not hashed.
    #[serde(default)]
    pub volatile_outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seeds: Vec<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            tool_version: crate::TOOL_VERSION.to_string(),
            config,
            seeds,
            inputs: Vec::new(),
            outputs: Vec::new(),
            volatile_outputs: Vec::new(),
        }
    }

    fn digest(path: &Path, base: Option<&Path>) -> Result<FileDigest> {
        let shown = base
            .and_then(|b| path.strip_prefix(b).ok())
            .unwrap_or(path);
        Ok(FileDigest {
            path: shown.to_string_lossy().replace('\\', "/"),
            sha256: sha256_file(path)?,
        })
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(Self::digest(path, None)?);
        Ok(())
    }

    /// Records an output file; its path is stored relative to `base` when given.
    pub fn add_output(&mut self, path: &Path, base: Option<&Path>) -> Result<()> {
        self.outputs.push(Self::digest(path, base)?);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// `<file>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn relative_output_paths() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("sub").join("x.txt");
        std::fs::create_dir_all(f.parent().unwrap()).unwrap();
        std::fs::write(&f, b"abc").unwrap();
        let mut m = RunManifest::new("test", serde_json::json!({"k": 1}), vec![3]);
        m.add_output(&f, Some(dir.path())).unwrap();
        assert_eq!(m.outputs[0].path, "sub/x.txt");
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
