//! Output file emission with a provenance header.
//!
//! Every JSON document embeds the resolved configuration and seed under
//! `meta`; `meta.generated_at` is the only non-deterministic byte in any
//! output. CSV files carry pure data in their pinned column formats.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::CliError;

#[derive(Serialize)]
pub struct Meta<'a> {
    pub schema_version: &'static str,
    pub seed: u64,
    pub generated_at: String,
    pub config: &'a RunConfig,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    meta: &'a Meta<'a>,
    result: &'a T,
}

pub struct OutputWriter<'a> {
    dir: PathBuf,
    meta: Meta<'a>,
    written: Vec<PathBuf>,
}

impl<'a> OutputWriter<'a> {
    pub fn new(dir: &Path, config: &'a RunConfig, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| {
            CliError::Config(format!("cannot create output directory {}: {e}", dir.display()))
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            meta: Meta {
                schema_version: SCHEMA_VERSION,
                seed,
                generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                config,
            },
            written: Vec::new(),
        })
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<(), CliError> {
        let doc = Document {
            meta: &self.meta,
            result,
        };
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))?;
        text.push('\n');
        self.write_raw(name, &text)
    }

    pub fn write_raw(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| {
            CliError::Config(format!("cannot write {}: {e}", path.display()))
        })?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
