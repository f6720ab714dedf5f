//! Report and manifest assembly.
//!
//! The manifest identifies a computation: input content digest, software
//! version, and every analysis-affecting parameter. Two runs with equal
//! manifests write byte-identical data files, so the manifest deliberately
//! excludes paths, timestamps, and anything else tied to the invocation
//! environment rather than the computation.

use lagdep_core::signal::Recording;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub fn software_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// The identity block shared by reports and manifests.
pub fn input_summary(rec: &Recording, raw_digest: &str) -> Value {
    json!({
        "digest_sha256": raw_digest,
        "channel_names": rec.channel_names(),
        "num_channels": rec.num_channels(),
        "num_samples": rec.len(),
        "sample_rate_hz": rec.sample_rate_hz(),
    })
}

/// The config as JSON with invocation paths stripped.
pub fn config_parameters(cfg: &RunConfig) -> Result<Value> {
    let mut value = serde_json::to_value(cfg)
        .map_err(|e| CliError::Analysis(format!("config serialization: {e}")))?;
    let obj = value.as_object_mut().expect("config serializes to an object");
    obj.remove("input");
    obj.remove("output_dir");
    Ok(value)
}

pub fn manifest(command: &str, input: Value, parameters: Value, outputs: &[String]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "software_version": software_version(),
        "command": command,
        "input": input,
        "parameters": parameters,
        "outputs": outputs,
    })
}

/// Pretty JSON with a trailing newline, the on-disk form of every report.
pub fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("report values serialize");
    text.push('\n');
    text.into_bytes()
}
