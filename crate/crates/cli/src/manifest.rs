use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use densemble::ensemble::checkpoint::sha256_hex;
use densemble::Result;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    /// Relative to the manifest.
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub threads: usize,
    /// Seconds since the Unix epoch.
    pub start_time: f64,
    pub end_time: f64,
    pub wall_seconds: f64,
    /// `completed`, `steady_state`, `interrupted` or `failed`.
    pub status: String,
    pub files: Vec<FileEntry>,
}

pub fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, threads: usize, start_time: f64) -> Self {
        Self {
            command: command.to_string(),
            config_hash,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            threads,
            start_time,
            end_time: start_time,
            wall_seconds: 0.0,
            status: String::new(),
            files: Vec::new(),
        }
    }

    /// Lists every file under `dir` except the manifest itself, sorted.
    pub fn finish(mut self, dir: &Path, status: &str) -> Result<PathBuf> {
        self.status = status.to_string();
        self.end_time = now();
        self.wall_seconds = self.end_time - self.start_time;
        let mut files = Vec::new();
        collect(dir, dir, &mut files)?;
        files.sort_by(|a, b| a.path.cmp(&b.path));
        self.files = files;
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&self)?)?;
        Ok(path)
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<FileEntry>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else if path != root.join("manifest.json") {
            let bytes = fs::read(&path)?;
            out.push(FileEntry {
                path: path.strip_prefix(root).unwrap_or(&path).to_path_buf(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
    }
    Ok(())
}
