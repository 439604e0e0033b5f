//! Per-run manifest: what ran, with which (resolved) configuration, and what it wrote.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::OutputFile;

pub const FORMAT: &str = "wavescope-manifest/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestHead {
    pub format: String,
    pub subcommand: String,
    /// "ok" or "error".
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    pub threads: usize,
    pub wall_seconds: f64,
    pub versions: BTreeMap<String, String>,
    /// Dotted config keys that were filled from defaults.
    pub defaulted: Vec<String>,
    pub outputs: Vec<OutputFile>,
    /// Pipeline-specific scalars.
    pub summary: BTreeMap<String, toml::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest: ManifestHead,
    pub config: RunConfig,
}

pub fn versions() -> BTreeMap<String, String> {
    let mut v = BTreeMap::new();
    v.insert("wavescope-cli".into(), env!("CARGO_PKG_VERSION").into());
    v.insert("wavescope-core".into(), wavescope_core::VERSION.into());
    v
}

/// Accumulates pipeline scalars in insertion-independent (sorted) order.
#[derive(Clone, Debug, Default)]
pub struct Summary(pub BTreeMap<String, toml::Value>);

impl Summary {
    pub fn num(&mut self, key: &str, v: f64) {
        // TOML has inf/nan literals, so every float is representable
        self.0.insert(key.into(), toml::Value::Float(v));
    }

    pub fn int(&mut self, key: &str, v: usize) {
        self.0.insert(key.into(), toml::Value::Integer(v as i64));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.0.insert(key.into(), toml::Value::String(v.into()));
    }

    pub fn flag(&mut self, key: &str, v: bool) {
        self.0.insert(key.into(), toml::Value::Boolean(v));
    }

    pub fn opt(&mut self, key: &str, v: Option<f64>) {
        if let Some(v) = v {
            self.num(key, v);
        }
    }
}
