//! Dataset discovery: directory-per-label layouts, TSV manifests and train/dev/test splits.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::{Error, Result};

/// One clip in a dataset listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    /// Path relative to the dataset root, `/`-separated, without the `.wav` extension.
    pub source_id: String,
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

/// Fallback split percentages used when the root carries no list files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub validation_pct: f64,
    pub testing_pct: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            validation_pct: 10.0,
            testing_pct: 10.0,
        }
    }
}

pub const VALIDATION_LIST: &str = "validation_list.txt";
pub const TESTING_LIST: &str = "testing_list.txt";

/// Directories whose name starts with `_` (e.g. `_background_noise_`) hold noise, not commands.
fn is_excluded_dir(name: &str) -> bool {
    name.starts_with('_')
}

fn source_id_for(rel: &str) -> String {
    rel.strip_suffix(".wav")
        .or_else(|| rel.strip_suffix(".WAV"))
        .unwrap_or(rel)
        .to_string()
}

fn rel_string(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Parse a two-column `relative path<TAB>label` manifest.
///
/// Blank lines and `#` comments are skipped. Returns `(relative path, label)` pairs in file order.
pub fn parse_manifest(text: &str) -> Result<Vec<(String, String)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(path), Some(label)) = (cols.next(), cols.next()) else {
            return Err(Error::Manifest {
                line: i + 1,
                message: "expected two tab-separated columns".into(),
            });
        };
        if cols.next().is_some() {
            return Err(Error::Manifest {
                line: i + 1,
                message: "more than two columns".into(),
            });
        }
        if path.is_empty() || label.is_empty() {
            return Err(Error::Manifest {
                line: i + 1,
                message: "empty path or label".into(),
            });
        }
        rows.push((path.to_string(), label.to_string()));
    }
    Ok(rows)
}

/// List the command clips under `root`, sorted by relative path.
///
/// Without a manifest every `.wav` below a label directory is taken and labelled with its
/// parent directory name; `_`-prefixed directories are skipped.
pub fn scan_dataset(root: &Path, manifest: Option<&Path>) -> Result<Vec<DatasetEntry>> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset root is not a directory"),
        ));
    }
    let mut entries = match manifest {
        Some(m) => {
            let text = fs::read_to_string(m).map_err(|e| Error::io(m, e))?;
            let mut out = Vec::new();
            for (rel, label) in parse_manifest(&text)? {
                let path = root.join(&rel);
                if !path.is_file() {
                    return Err(Error::MissingFile(path));
                }
                out.push(DatasetEntry {
                    source_id: source_id_for(&rel),
                    label,
                    path,
                });
            }
            out
        }
        None => {
            let mut out = Vec::new();
            let walker = WalkDir::new(root).min_depth(1).into_iter().filter_entry(|e| {
                !(e.file_type().is_dir() && is_excluded_dir(&e.file_name().to_string_lossy()))
            });
            for entry in walker {
                let entry = entry.map_err(|e| {
                    let path = e.path().unwrap_or(root).to_path_buf();
                    Error::io(path, e.into())
                })?;
                if !entry.file_type().is_file() || entry.depth() < 2 {
                    continue;
                }
                let is_wav = entry
                    .path()
                    .extension()
                    .is_some_and(|x| x.eq_ignore_ascii_case("wav"));
                if !is_wav {
                    continue;
                }
                let rel = rel_string(entry.path().strip_prefix(root).expect("walk stays under root"));
                let label = entry
                    .path()
                    .parent()
                    .and_then(|p| p.file_name())
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                out.push(DatasetEntry {
                    source_id: source_id_for(&rel),
                    label,
                    path: entry.path().to_path_buf(),
                });
            }
            out
        }
    };
    if entries.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    entries.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    let mut seen = HashSet::new();
    for e in &entries {
        if !seen.insert(e.source_id.as_str()) {
            return Err(Error::Manifest {
                line: 0,
                message: format!("duplicate clip {}", e.source_id),
            });
        }
    }
    Ok(entries)
}

fn read_list(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .map(source_id_for)
        .collect())
}

/// Stable bucket in `[0, 100)` for a clip; recordings of the same speaker share a bucket
/// because everything after `_nohash_` in the file name is ignored.
fn hash_bucket(source_id: &str) -> f64 {
    let key = match source_id.find("_nohash_") {
        Some(i) => &source_id[..i],
        None => source_id,
    };
    // Only the file name matters so that all words of one speaker land together.
    let key = key.rsplit('/').next().unwrap_or(key);
    let digest = Sha256::digest(key.as_bytes());
    let v = u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"));
    (v % 10_000) as f64 / 100.0
}

/// Assign every entry to a split.
///
/// `validation_list.txt` / `testing_list.txt` at the root take precedence; otherwise a
/// deterministic hash of the file name is compared against `cfg`.
pub fn assign_splits(root: &Path, entries: &[DatasetEntry], cfg: SplitConfig) -> Result<Vec<Split>> {
    let val_path = root.join(VALIDATION_LIST);
    let test_path = root.join(TESTING_LIST);
    if val_path.is_file() || test_path.is_file() {
        let val = if val_path.is_file() { read_list(&val_path)? } else { HashSet::new() };
        let test = if test_path.is_file() { read_list(&test_path)? } else { HashSet::new() };
        return Ok(entries
            .iter()
            .map(|e| {
                if test.contains(&e.source_id) {
                    Split::Test
                } else if val.contains(&e.source_id) {
                    Split::Validation
                } else {
                    Split::Train
                }
            })
            .collect());
    }
    if !(0.0..=100.0).contains(&cfg.validation_pct)
        || !(0.0..=100.0).contains(&cfg.testing_pct)
        || cfg.validation_pct + cfg.testing_pct > 100.0
    {
        return Err(Error::Config(format!(
            "split percentages {}/{} out of range",
            cfg.validation_pct, cfg.testing_pct
        )));
    }
    Ok(entries
        .iter()
        .map(|e| {
            let b = hash_bucket(&e.source_id);
            if b < cfg.validation_pct {
                Split::Validation
            } else if b < cfg.validation_pct + cfg.testing_pct {
                Split::Test
            } else {
                Split::Train
            }
        })
        .collect())
}
