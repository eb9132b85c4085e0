//! Checkpoints: one binary blob of little-endian values plus a JSON
//! manifest naming the config hash and the blob's SHA-256.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::emitter::{DensityMatrix4, Matrix4c};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

const MAGIC: &[u8; 8] = b"DNSCKPT1";
pub const FORMAT: &str = "densemble-checkpoint-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub config_hash: String,
    pub step: u64,
    pub time_s: f64,
    pub dims: [usize; 3],
    pub cells: usize,
    /// File name of the blob, relative to the manifest.
    pub blob: String,
    pub blob_bytes: u64,
    pub blob_sha256: String,
    /// Column names and metadata of each recorded series, in blob order.
    pub series: Vec<SeriesHeader>,
    /// Next pending time per snapshot request.
    pub snapshot_next: Vec<usize>,
    pub snapshot_files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesHeader {
    pub names: Vec<String>,
    pub metadata: std::collections::BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Default)]
pub(crate) struct BlobWriter {
    pub bytes: Vec<u8>,
}

impl BlobWriter {
    pub fn new() -> Self {
        Self { bytes: MAGIC.to_vec() }
    }

    pub fn u64(&mut self, v: u64) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }

    pub fn slice(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for x in v {
            self.f64(*x);
        }
    }

    pub fn states(&mut self, states: &[DensityMatrix4]) {
        self.u64(states.len() as u64);
        for s in states {
            for v in s.matrix().iter() {
                self.f64(v.re);
                self.f64(v.im);
            }
        }
    }

    pub fn series(&mut self, s: &TimeSeries) {
        self.slice(&s.time);
        self.u64(s.columns.len() as u64);
        for c in &s.columns {
            self.slice(c);
        }
    }
}

pub(crate) struct BlobReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: PathBuf,
}

impl<'a> BlobReader<'a> {
    pub fn new(bytes: &'a [u8], path: &Path) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..8] != MAGIC {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: "byte 0: not a checkpoint blob".into(),
            });
        }
        Ok(Self {
            bytes,
            pos: 8,
            path: path.to_path_buf(),
        })
    }

    fn take(&mut self) -> Result<[u8; 8]> {
        let end = self.pos + 8;
        let chunk = self.bytes.get(self.pos..end).ok_or_else(|| Error::Parse {
            path: self.path.clone(),
            message: format!("byte {}: unexpected end of blob", self.pos),
        })?;
        self.pos = end;
        Ok(chunk.try_into().expect("eight bytes"))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    pub fn slice(&mut self, expected: Option<usize>) -> Result<Vec<f64>> {
        let at = self.pos;
        let n = self.u64()? as usize;
        if expected.is_some_and(|e| e != n) || n > self.bytes.len() / 8 {
            return Err(Error::Parse {
                path: self.path.clone(),
                message: format!("byte {at}: array of {n} values does not fit the run"),
            });
        }
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn into_slice(&mut self, out: &mut [f64]) -> Result<()> {
        let v = self.slice(Some(out.len()))?;
        out.copy_from_slice(&v);
        Ok(())
    }

    pub fn states(&mut self, expected: usize) -> Result<Vec<DensityMatrix4>> {
        let at = self.pos;
        let n = self.u64()? as usize;
        if n != expected {
            return Err(Error::Parse {
                path: self.path.clone(),
                message: format!("byte {at}: {n} cell states, run has {expected}"),
            });
        }
        (0..n)
            .map(|_| {
                let mut m = Matrix4c::zeros();
                for v in m.iter_mut() {
                    v.re = self.f64()?;
                    v.im = self.f64()?;
                }
                Ok(DensityMatrix4::from_matrix_unchecked(m))
            })
            .collect()
    }

    pub fn series(&mut self, header: &SeriesHeader) -> Result<TimeSeries> {
        let mut s = TimeSeries::new(header.names.iter().cloned());
        s.metadata = header.metadata.clone();
        s.time = self.slice(None)?;
        let at = self.pos;
        let cols = self.u64()? as usize;
        if cols != header.names.len() {
            return Err(Error::Parse {
                path: self.path.clone(),
                message: format!("byte {at}: {cols} columns, manifest lists {}", header.names.len()),
            });
        }
        for c in s.columns.iter_mut() {
            *c = self.slice(Some(s.time.len()))?;
        }
        Ok(s)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Parse {
                path: self.path,
                message: format!("byte {}: trailing data", self.pos),
            });
        }
        Ok(())
    }
}

/// Writes `<dir>/<stem>.bin` and `<dir>/<stem>.json`; returns the manifest path.
pub(crate) fn write(dir: &Path, stem: &str, blob: &[u8], mut manifest: CheckpointManifest) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let bin = format!("{stem}.bin");
    manifest.blob = bin.clone();
    manifest.blob_bytes = blob.len() as u64;
    manifest.blob_sha256 = sha256_hex(blob);
    fs::write(dir.join(&bin), blob)?;
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Reads a manifest and its blob, checking the blob's size and hash.
pub fn read(manifest_path: &Path) -> Result<(CheckpointManifest, Vec<u8>)> {
    let text = fs::read_to_string(manifest_path)?;
    let manifest: CheckpointManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    if manifest.format != FORMAT {
        return Err(Error::Parse {
            path: manifest_path.to_path_buf(),
            message: format!("unknown checkpoint format `{}`", manifest.format),
        });
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let bin = dir.join(&manifest.blob);
    let blob = fs::read(&bin)?;
    if blob.len() as u64 != manifest.blob_bytes || sha256_hex(&blob) != manifest.blob_sha256 {
        return Err(Error::Parse {
            path: bin,
            message: "blob size or SHA-256 does not match the manifest".into(),
        });
    }
    Ok((manifest, blob))
}
