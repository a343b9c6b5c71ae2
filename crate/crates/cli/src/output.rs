use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Format, MechanismName, SweepKind};

/// A failure that ends the run with the given exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

pub type CliResult<T> = Result<T, Failure>;

#[derive(Debug, Clone, Serialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run; embedded in every output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub tool_version: &'static str,
    pub schema_version: u32,
    pub inputs: Vec<InputRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditional: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub questions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<SweepKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &'static str) -> Self {
        RunConfig {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            schema_version: miplab::schema::SCHEMA_VERSION,
            ..RunConfig::default()
        }
    }
}

/// Reads an input file and records its content hash in `config`.
pub fn read_input(path: &Path, config: &mut RunConfig) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    config.inputs.push(InputRef { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
    String::from_utf8(bytes).map_err(|_| Failure::config(format!("{} is not valid UTF-8", path.display())))
}

pub fn load<T>(
    path: &Path,
    config: &mut RunConfig,
    parse: impl FnOnce(&str) -> Result<T, miplab::schema::SchemaError>,
) -> CliResult<T> {
    let text = read_input(path, config)?;
    parse(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn prepare(dir: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

pub fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    let path = prepare(dir, name)?;
    fs::write(&path, bytes).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::config(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_bytes(dir, name, text.as_bytes())
}

/// Sidecar holding the run configuration of a CSV file.
pub fn write_csv_with_meta(dir: &Path, name: &str, csv: &[u8], config: &RunConfig) -> CliResult<()> {
    write_bytes(dir, name, csv)?;
    write_json(dir, &format!("{name}.meta.json"), &serde_json::json!({ "run_config": config }))?;
    Ok(())
}

/// Snake-case name of an error variant, for structured records.
pub fn error_kind(e: &miplab::Error) -> String {
    let debug = format!("{e:?}");
    let head: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
    let mut kind = String::new();
    for (i, c) in head.chars().enumerate() {
        if c.is_uppercase() {
            if i > 0 {
                kind.push('_');
            }
            kind.extend(c.to_lowercase());
        } else {
            kind.push(c);
        }
    }
    kind
}

/// Writes a structured error record and returns exit code 1.
pub fn error_record(dir: &Path, name: &str, config: &RunConfig, e: &miplab::Error) -> CliResult<u8> {
    let mut detail = serde_json::Map::new();
    detail.insert("kind".into(), error_kind(e).into());
    detail.insert("message".into(), e.to_string().into());
    if let miplab::Error::ZeroFrequency { agent, signal } = e {
        detail.insert("agent".into(), (*agent).into());
        detail.insert("signal".into(), (*signal).into());
    }
    write_json(dir, name, &serde_json::json!({ "error": detail, "run_config": config }))?;
    eprintln!("error: {e}");
    Ok(1)
}
