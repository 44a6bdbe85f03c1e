//! Output directory bookkeeping and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct EmittedFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub stages: Vec<StageTiming>,
    /// Sorted by path; the manifest itself is not listed.
    pub files: Vec<EmittedFile>,
}

/// Writes files below a root directory, recording checksums, and times stages.
pub struct OutDir {
    root: PathBuf,
    files: Vec<EmittedFile>,
    stages: Vec<StageTiming>,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new(), stages: Vec::new() })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<()> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&p, bytes)?;
        self.files.retain(|f| f.path != rel);
        self.files.push(EmittedFile { path: rel.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(rel, s.as_bytes())
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> CliResult<T>) -> CliResult<T> {
        let t = Instant::now();
        let out = f(self);
        self.stages.push(StageTiming { stage: stage.into(), seconds: t.elapsed().as_secs_f64() });
        out
    }

    pub fn finish<C: Serialize>(mut self, command: &str, config: &C, seed: u64) -> CliResult<RunManifest> {
        let canonical = serde_json::to_vec(config)?;
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let m = RunManifest {
            tool: "nsk".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: sha256_hex(&canonical),
            seed,
            threads: nsk_core::par::threads(),
            stages: std::mem::take(&mut self.stages),
            files: std::mem::take(&mut self.files),
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        std::fs::write(self.root.join("manifest.json"), s)?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        out.timed("write", |o| o.write("b/x.txt", b"abc")).unwrap();
        out.write("a.txt", b"").unwrap();
        let m = out.finish("test", &serde_json::json!({"k": 1}), 7).unwrap();
        assert_eq!(m.files[0].path, "a.txt");
        assert_eq!(m.files[1].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(m.stages.len(), 1);
        assert!(dir.path().join("manifest.json").exists());
    }
}
