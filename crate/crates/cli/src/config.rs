//! Versioned experiment config. The resolved config (file, then flags, then
//! per-command defaults) is what gets hashed and embedded in every report.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::Path;
use vbqc_core::abe::LogicalCircuit;
use vbqc_core::Backend;

use crate::report::canonical_json;

pub const SCHEMA: &str = "vbqc-config/1";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<LogicalCircuit>,
    /// Subcommand-specific: a prover strategy for `localise`, an attack for `hybrid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Computation sizes for `scaling`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
}

fn schema() -> String {
    SCHEMA.into()
}

/// Bad input: reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

impl ExperimentConfig {
    pub fn empty() -> Self {
        ExperimentConfig { schema: schema(), ..Default::default() }
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        if cfg.schema != SCHEMA {
            return Err(UsageError(format!("unsupported schema {:?}, expected {SCHEMA:?}", cfg.schema)));
        }
        if let Some(c) = &cfg.circuit {
            // The derived deserializer skips wiring checks.
            LogicalCircuit::new(c.wires(), c.gates().to_vec())?;
        }
        Ok(cfg)
    }

    /// `sha256("blob <len>\0" ‖ canonical JSON)`, hex encoded.
    pub fn content_hash(&self) -> String {
        let body = canonical_json(&serde_json::to_value(self).expect("config serializes"));
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
