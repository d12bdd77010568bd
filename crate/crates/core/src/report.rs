//! Self-describing JSON envelopes for everything the toolkit emits.
//!
//! Output is a pure function of the inputs: no timestamps, maps are
//! ordered, rationals are "p/q" strings.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::VERSION;

pub const TOOL: &str = "rlt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: String,
    pub version: String,
    /// sha256 of the canonical JSON of the configuration that produced it.
    pub config_hash: String,
    pub task: String,
    pub passed: bool,
    pub payload: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(
        task: impl Into<String>,
        config_hash: impl Into<String>,
        passed: bool,
        payload: T,
    ) -> Self {
        Envelope {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_hash: config_hash.into(),
            task: task.into(),
            passed,
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Hash of `value` after a round trip through `serde_json::Value`, whose
/// objects are key-sorted, so field order in the input file is irrelevant.
pub fn config_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let bytes = serde_json::to_vec(&v).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_ignores_key_order() {
        let a = config_hash(&json!({"a": 1, "b": [1, 2]})).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"b":[1,2],"a":1}"#).unwrap();
        assert_eq!(a, config_hash(&b).unwrap());
        assert_ne!(a, config_hash(&json!({"a": 2, "b": [1, 2]})).unwrap());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn envelope_carries_version() {
        let e = Envelope::new("eval", "00", true, json!({"v": "1/2"}));
        let s = e.to_json().unwrap();
        assert!(s.contains(VERSION) && s.contains("\"tool\": \"rlt\"") && s.ends_with('\n'));
    }
}
