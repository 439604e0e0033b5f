use std::fs;
use std::io::Write;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// The only way pipelines write files: every name is checked to stay inside `root`,
/// and every file written is recorded with its checksum.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        if root.components().any(|c| matches!(c, Component::ParentDir)) {
            return Err(CliError::Output(format!("output directory {} must not contain `..`", root.display())));
        }
        fs::create_dir_all(root).map_err(|e| CliError::Output(format!("{}: {e}", root.display())))?;
        let root = root.canonicalize().map_err(|e| CliError::Output(format!("{}: {e}", root.display())))?;
        Ok(OutputDir { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Resolves a relative file name below the root, creating parent directories.
    pub fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        let rel = Path::new(name);
        let ok = !name.is_empty() && rel.components().all(|c| matches!(c, Component::Normal(_)));
        if !ok {
            return Err(CliError::Output(format!("refusing to write `{name}` outside the output directory")));
        }
        let full = self.root.join(rel);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Output(format!("{}: {e}", parent.display())))?;
        }
        Ok(full)
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.path(name)?;
        let mut f = fs::File::create(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        f.write_all(data).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        self.record(name)
    }

    /// Registers a file written by a library routine through [`OutputDir::path`].
    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        let path = self.path(name)?;
        let data = fs::read(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        self.files.retain(|f| f.path != name);
        self.files.push(OutputFile { path: name.to_string(), bytes: data.len() as u64, sha256: sha256_hex(&data) });
        Ok(())
    }

    pub fn record_path(&mut self, full: &Path) -> Result<(), CliError> {
        let rel = full
            .strip_prefix(&self.root)
            .map_err(|_| CliError::Output(format!("{} is outside the output directory", full.display())))?;
        let name = rel.to_str().ok_or_else(|| CliError::Output(format!("non-UTF-8 path {}", rel.display())))?.to_string();
        self.record(&name)
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }
}
