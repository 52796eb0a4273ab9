//! Run manifests: the full parameter record of an invocation, hashes of
//! its inputs, and the regime labels. Replaying a manifest reproduces
//! byte-identical outputs, so nothing time- or machine-dependent may
//! appear here.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const REGIME_COMPLETENESS: &str = "completeness-verified";
pub const REGIME_SOUNDNESS_OUT: &str = "soundness-out-of-regime";
pub const REGIME_ESTIMATE: &str = "estimate-only";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Full parameter record, key-sorted.
    pub params: BTreeMap<String, String>,
    /// Input file name -> sha256 hex digest.
    pub input_hashes: BTreeMap<String, String>,
    pub regime: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            params: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            regime: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&mut self, name: &str, content: &[u8]) -> &mut Self {
        self.input_hashes
            .insert(name.to_string(), sha256_hex(content));
        self
    }

    pub fn regime(&mut self, label: &str) -> &mut Self {
        if !self.regime.iter().any(|r| r == label) {
            self.regime.push(label.to_string());
        }
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(content);
    hex::encode(h.finalize())
}
