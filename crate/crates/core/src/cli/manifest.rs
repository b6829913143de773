use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the merged (config file + flags) arguments.
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Input path → SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    /// Output file name → SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
    pub args: serde_json::Value,
    pub notes: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Collects inputs, writes outputs into one directory and finally the manifest.
pub struct RunContext {
    pub out_dir: PathBuf,
    command: String,
    seed: u64,
    args: serde_json::Value,
    started: u64,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    notes: Vec<String>,
}

impl RunContext {
    pub fn new(out_dir: &Path, command: &str, seed: u64, args: serde_json::Value) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        Ok(RunContext {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            seed,
            args,
            started: now_unix(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            notes: Vec::new(),
        })
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> Result<String> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).map_err(|_| Error::MalformedRecord {
            source_name: path.display().to_string(),
            line: 0,
            message: "file is not valid UTF-8".into(),
        })
    }

    /// Records a file that was read by other means.
    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        self.read(path).map(|_| ())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(self) -> Result<RunManifest> {
        let config_hash = sha256_hex(&serde_json::to_vec(&self.args)?);
        let manifest = RunManifest {
            command: self.command,
            config_hash,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started,
            finished_unix: now_unix(),
            inputs: self.inputs,
            outputs: self.outputs,
            args: self.args,
            notes: self.notes,
        };
        let path = self.out_dir.join(MANIFEST_FILE);
        let mut json = serde_json::to_vec_pretty(&manifest)?;
        json.push(b'\n');
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}
