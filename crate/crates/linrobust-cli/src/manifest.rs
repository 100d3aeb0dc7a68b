//! Run manifests: a small JSON record written alongside every output that
//! captures the command, its parameters, the seed, and the produced files,
//! so any artifact can be regenerated byte-for-byte.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;

use crate::emit::{atomic_write, json_escape};

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn to_json(&self) -> String {
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| format!("    \"{}\": \"{}\"", json_escape(k), json_escape(v)))
            .collect();
        let outputs: Vec<String> = self
            .outputs
            .iter()
            .map(|o| format!("    \"{}\"", json_escape(o)))
            .collect();
        format!(
            "{{\n  \"command\": \"{}\",\n  \"parameters\": {{\n{}\n  }},\n  \"seed\": {},\n  \"outputs\": [\n{}\n  ],\n  \"version\": \"{}\"\n}}\n",
            json_escape(&self.command),
            params.join(",\n"),
            self.seed,
            outputs.join(",\n"),
            json_escape(&self.version),
        )
    }

    /// Write the manifest next to the primary output as `<out>.manifest.json`.
    pub fn write_beside(&self, primary_out: &Path) -> Result<()> {
        let mut name = primary_out.as_os_str().to_owned();
        name.push(".manifest.json");
        atomic_write(Path::new(&name), self.to_json().as_bytes())
    }
}
