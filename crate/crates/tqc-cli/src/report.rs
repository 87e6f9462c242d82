//! Report envelope: every command prints exactly one JSON document
//! carrying the tool version, the command line, the seed, the circle
//! metric in effect, and a content hash of every input file, so a run
//! is reproducible from its own report. No timestamps — rerunning a
//! command with the same inputs and seed must reproduce the bytes.

use crate::{usage, Failure};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub tool_version: &'static str,
    pub command: String,
    pub seed: u64,
    pub metric: &'static str,
    pub input_hashes: BTreeMap<String, String>,
    pub report: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(seed: u64, inputs: Inputs, report: T) -> Envelope<T> {
        Envelope {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command_line(),
            seed,
            metric: "chordal",
            input_hashes: inputs.hashes,
            report,
        }
    }
}

/// The invocation with argv[0] reduced to its basename, so reports
/// don't vary with the install location.
fn command_line() -> String {
    let mut parts: Vec<String> = std::env::args().collect();
    if let Some(first) = parts.first_mut() {
        if let Some(name) = Path::new(first.as_str()).file_name() {
            *first = name.to_string_lossy().into_owned();
        }
    }
    parts.join(" ")
}

/// Tracks every input file read, keyed by the path as given.
#[derive(Default)]
pub struct Inputs {
    hashes: BTreeMap<String, String>,
}

impl Inputs {
    pub fn new() -> Inputs {
        Inputs::default()
    }

    pub fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(text.as_bytes());
        self.hashes.insert(path.display().to_string(), format!("sha256:{digest:x}"));
        Ok(text)
    }
}

/// Prints the envelope to stdout and mirrors the same bytes to `out`
/// when given.
pub fn emit<T: Serialize>(envelope: &Envelope<T>, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(envelope)
        .map_err(|e| usage(format!("report serialization: {e}")))?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
