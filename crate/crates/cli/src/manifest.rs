use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::failure::{usage, Failure};

pub const CODE_VERSION: &str = env!("LTL_CODE_VERSION");

/// Everything needed to rerun a command: the subcommand path, every resolved
/// option, and the files it wrote (relative to the manifest's directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub timestamp: String,
    pub code_version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn file_name(stem: &str) -> String {
        format!("{stem}.manifest.json")
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("manifest serializes");
        v.push(b'\n');
        v
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: line {}: {e}", path.display(), e.line())))
    }
}
