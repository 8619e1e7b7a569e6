//! Content-hash stamps that let a stage skip work whose inputs are unchanged.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Incremental SHA-256 over labelled parts; each part is length-prefixed.
#[derive(Clone)]
pub struct Fingerprint(Sha256);

impl Fingerprint {
    pub fn new(stage: &str) -> Self {
        let mut f = Fingerprint(Sha256::new());
        f.text(stage);
        f
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.0.update((b.len() as u64).to_le_bytes());
        self.0.update(b);
        self
    }

    pub fn text(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    /// Contents only, so stamps do not depend on where the output tree lives.
    pub fn file(&mut self, path: &Path) -> Result<&mut Self> {
        let data = fs::read(path).map_err(|e| CliError::data(path, bsr_core::Error::Io { path: path.into(), source: e }))?;
        Ok(self.bytes(&data))
    }

    pub fn hex(&self) -> String {
        hex(&self.0.clone().finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Computed,
    Cached,
}

/// Stamp file recording the fingerprint a stage output was produced from.
pub struct Stamp {
    path: PathBuf,
    key: String,
}

impl Stamp {
    pub fn new(out_dir: &Path, name: &str, fp: &Fingerprint) -> Self {
        Self {
            path: out_dir.join(".stamps").join(format!("{}.sha256", name.replace('/', "__"))),
            key: fp.hex(),
        }
    }

    /// True when the stamp matches and every listed output still exists.
    pub fn is_fresh(&self, outputs: &[&Path]) -> bool {
        fs::read_to_string(&self.path).is_ok_and(|k| k.trim() == self.key) && outputs.iter().all(|p| p.exists())
    }

    pub fn commit(&self) -> Result<()> {
        write_file(&self.path, self.key.as_bytes())
    }

    pub fn invalidate(&self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    let io = |e| CliError::data(path, bsr_core::Error::Io { path: path.into(), source: e });
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, data).map_err(io)
}
