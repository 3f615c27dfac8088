//! File input, content hashes and report output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Path and git-style content hash (`sha256("blob <len>\0" ‖ bytes)`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

pub fn read_json(path: &Path) -> CliResult<(Value, InputDigest)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let value = serde_json::from_slice(&bytes).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: content_hash(&bytes),
    };
    Ok((value, digest))
}

/// Pretty JSON with a trailing newline; identical values give identical bytes.
pub fn to_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("JSON values always serialize");
    out.push(b'\n');
    out
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes `name` under `--out` if given, otherwise prints it.
pub fn emit(out: Option<&Path>, name: &str, v: &Value) -> CliResult<Option<PathBuf>> {
    let bytes = to_bytes(v);
    match out {
        Some(dir) => {
            let path = dir.join(name);
            write_file(&path, &bytes)?;
            Ok(Some(path))
        }
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(None)
        }
    }
}
