use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use pugraph::io::write_atomic;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub parameters: BTreeMap<String, Value>,
    pub outputs: Vec<String>,
    pub version: String,
    pub duration_s: f64,
}

/// Collects outputs and the manifest for one invocation.
pub struct Run {
    dir: Option<PathBuf>,
    manifest: RunManifest,
}

impl Run {
    pub fn new(dir: Option<PathBuf>, subcommand: &str) -> Self {
        Self {
            dir,
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                inputs: Vec::new(),
                parameters: BTreeMap::new(),
                outputs: Vec::new(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                duration_s: 0.0,
            },
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.display().to_string());
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("parameter serialises");
        self.manifest.parameters.insert(key.to_string(), value);
    }

    /// Written only when an output directory was given.
    pub fn file(&mut self, name: &str, contents: &str) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir).map_err(|e| CliError::bad_input(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        write_atomic(&path, contents)?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Goes to stdout and, with an output directory, to `name`.
    pub fn primary(&mut self, name: &str, contents: &str) -> Result<()> {
        print!("{contents}");
        self.file(name, contents)
    }

    pub fn finish(mut self, elapsed: Duration) -> Result<()> {
        self.manifest.duration_s = elapsed.as_secs_f64();
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serialises");
        match self.dir.clone() {
            Some(dir) => {
                std::fs::create_dir_all(&dir).map_err(|e| CliError::bad_input(format!("{}: {e}", dir.display())))?;
                write_atomic(&dir.join("manifest.json"), &(text + "\n"))?;
            }
            None => eprintln!("{}", serde_json::to_string(&serde_json::json!({ "manifest": self.manifest })).unwrap()),
        }
        Ok(())
    }
}

pub fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serialises");
    s.push('\n');
    s
}
