//! Run bookkeeping: input and output digests, the run digest embedded in
//! outputs, and the manifest written next to every output file.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use rcs_core::SCHEMA_VERSION;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parameters that name output locations or bound parallelism. They are
/// recorded in the manifest but left out of the run digest, so the digest
/// depends only on what determines the output bytes.
const NON_SEMANTIC: &[&str] = &["out", "threads"];

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

pub struct Run {
    command: &'static str,
    params: Value,
    seeds: Vec<u64>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    started: Instant,
}

impl Run {
    pub fn new(command: &'static str, params: &impl Serialize, threads: Option<usize>) -> Self {
        let mut params = serde_json::to_value(params).expect("parameters serialize");
        if let Value::Object(map) = &mut params {
            map.insert("threads".into(), json!(threads));
        }
        Run {
            command,
            params,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seeds.push(seed);
    }

    /// Read a text input and record its digest.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.record_input(&path.display().to_string(), &text);
        Ok(text)
    }

    pub fn record_input(&mut self, label: &str, text: &str) {
        self.inputs.push(FileDigest {
            path: label.to_owned(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }

    /// Digest of the command, its semantic parameters, the input contents
    /// and the tool version.
    pub fn digest(&self) -> String {
        let mut params = self.params.clone();
        if let Value::Object(map) = &mut params {
            for key in NON_SEMANTIC {
                map.remove(*key);
            }
        }
        let inputs: Vec<&str> = self.inputs.iter().map(|d| d.sha256.as_str()).collect();
        let canonical = json!({
            "command": self.command,
            "params": params,
            "inputs": inputs,
            "version": TOOL_VERSION,
        });
        sha256_hex(canonical.to_string().as_bytes())
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    /// Write `<output>.manifest.json` for every output.
    pub fn finish(self) -> Result<Vec<PathBuf>> {
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "params": self.params,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "tool_version": TOOL_VERSION,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "run_digest": self.digest(),
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let mut written = Vec::new();
        for out in &self.outputs {
            let path = PathBuf::from(format!("{}.manifest.json", out.path));
            std::fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// JSON output with the schema version and run digest at the top level.
pub fn stamped_json(run_digest: &str, body: impl Serialize) -> String {
    let mut value = serde_json::to_value(body).expect("output serializes");
    let mut out = serde_json::Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("run_digest".into(), json!(run_digest));
    if let Value::Object(map) = &mut value {
        out.append(map);
    } else {
        out.insert("value".into(), value);
    }
    serde_json::to_string_pretty(&Value::Object(out)).expect("output serializes") + "\n"
}
