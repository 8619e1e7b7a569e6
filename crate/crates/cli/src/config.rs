//! Pipeline configuration, stored as one TOML file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bsr_core::audio::dataset::SplitConfig;
use bsr_core::classifier::TrainConfig;
use bsr_core::noise::{NoiseKind, NoiseSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Feature streams the pipeline can extract and classify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureName {
    #[serde(rename = "raw")]
    Raw,
    #[serde(rename = "bsr-int16")]
    BsrInt16,
    #[serde(rename = "bsr-float16")]
    BsrFloat16,
    #[serde(rename = "fbank")]
    Fbank,
    #[serde(rename = "mfcc")]
    Mfcc,
}

impl FeatureName {
    pub const ALL: [FeatureName; 5] = [
        FeatureName::Raw,
        FeatureName::BsrInt16,
        FeatureName::BsrFloat16,
        FeatureName::Fbank,
        FeatureName::Mfcc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureName::Raw => "raw",
            FeatureName::BsrInt16 => "bsr-int16",
            FeatureName::BsrFloat16 => "bsr-float16",
            FeatureName::Fbank => "fbank",
            FeatureName::Mfcc => "mfcc",
        }
    }

    /// File extension of the per-clip feature files.
    pub fn extension(self) -> &'static str {
        match self {
            FeatureName::BsrInt16 | FeatureName::BsrFloat16 => "bsr",
            _ => "fea",
        }
    }
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        FeatureName::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown feature kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKindName {
    Background,
    White,
    Pink,
}

impl From<NoiseKindName> for NoiseKind {
    fn from(k: NoiseKindName) -> Self {
        match k {
            NoiseKindName::Background => NoiseKind::Background,
            NoiseKindName::White => NoiseKind::White,
            NoiseKindName::Pink => NoiseKind::Pink,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseEntry {
    pub kind: NoiseKindName,
    pub snr_db: f64,
    #[serde(default)]
    pub seed: u64,
    /// Recording to cut background segments from; relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub momentum: f64,
    pub lr0: f64,
    pub restart_epochs: Vec<usize>,
    pub restart_decay: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            batch_size: t.batch_size,
            momentum: t.momentum,
            lr0: t.lr0,
            restart_epochs: t.restart_epochs,
            restart_decay: t.restart_decay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub validation_pct: f64,
    pub testing_pct: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        let s = SplitConfig::default();
        Self {
            validation_pct: s.validation_pct,
            testing_pct: s.testing_pct,
        }
    }
}

/// A fused combination; equal weights when `weights` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSubset {
    pub members: Vec<FeatureName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl FusionSubset {
    /// Row label, members joined by `&`.
    pub fn name(&self) -> String {
        self.members.iter().map(|m| m.as_str()).collect::<Vec<_>>().join("&")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory-per-label clip tree; relative to the config file.
    pub dataset_root: PathBuf,
    /// Optional `path<TAB>label` listing that replaces the directory scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; 0 means one per available core.
    #[serde(default)]
    pub jobs: usize,
    pub features: Vec<FeatureName>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub noise: Vec<NoiseEntry>,
    /// Empty means every single feature plus every pair and triple.
    #[serde(default)]
    pub fusion: Vec<FusionSubset>,
    /// Directory that relative paths resolve against; the config file's directory.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl PipelineConfig {
    /// Four feature streams and nine noise conditions over a Speech-Commands-style tree.
    pub fn standard(dataset_root: impl Into<PathBuf>) -> Self {
        let dataset_root = dataset_root.into();
        let background = dataset_root.join("_background_noise_").join("running_tap.wav");
        let mut noise = Vec::new();
        for kind in [NoiseKindName::Background, NoiseKindName::White, NoiseKindName::Pink] {
            for snr_db in [20.0, 10.0, 0.0] {
                noise.push(NoiseEntry {
                    kind,
                    snr_db,
                    seed: 0,
                    source: (kind == NoiseKindName::Background).then(|| background.clone()),
                });
            }
        }
        Self {
            dataset_root,
            manifest: None,
            output_dir: default_output_dir(),
            master_seed: 0,
            jobs: 0,
            features: vec![FeatureName::BsrFloat16, FeatureName::Fbank, FeatureName::Mfcc, FeatureName::Raw],
            train: TrainSection::default(),
            split: SplitSection::default(),
            noise,
            fusion: Vec::new(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Parse `path` and validate it; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.resolve(&self.dataset_root)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            momentum: self.train.momentum,
            lr0: self.train.lr0,
            restart_epochs: self.train.restart_epochs.clone(),
            restart_decay: self.train.restart_decay,
            seed: self.master_seed,
        }
    }

    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            validation_pct: self.split.validation_pct,
            testing_pct: self.split.testing_pct,
        }
    }

    /// Core noise specs with source paths resolved.
    pub fn noise_specs(&self) -> Vec<NoiseSpec> {
        self.noise
            .iter()
            .map(|n| NoiseSpec {
                kind: n.kind.into(),
                snr_db: n.snr_db,
                seed: n.seed,
                source: n.source.as_deref().map(|p| self.resolve(p)),
            })
            .collect()
    }

    /// Explicit subsets, or all singles, pairs and triples in feature order.
    pub fn fusion_subsets(&self) -> Vec<FusionSubset> {
        if !self.fusion.is_empty() {
            return self.fusion.clone();
        }
        bsr_core::fusion::subsets_up_to(self.features.len(), 3)
            .into_iter()
            .map(|idx| FusionSubset {
                members: idx.iter().map(|&i| self.features[i]).collect(),
                weights: None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let root = self.dataset_dir();
        if !root.is_dir() {
            return bad(format!("dataset_root {} is not a directory", root.display()));
        }
        if let Some(m) = &self.manifest {
            if !self.resolve(m).is_file() {
                return bad(format!("manifest {} not found", self.resolve(m).display()));
            }
        }
        if self.features.is_empty() {
            return bad("no features requested".into());
        }
        for (i, f) in self.features.iter().enumerate() {
            if self.features[..i].contains(f) {
                return bad(format!("feature {f} listed twice"));
            }
        }
        self.train_config().validate()?;
        self.split_config_checked()?;
        let mut names = Vec::new();
        for spec in self.noise_specs() {
            if !spec.snr_db.is_finite() {
                return bad(format!("non-finite SNR in {}", spec.condition_name()));
            }
            match (&spec.kind, &spec.source) {
                (NoiseKind::Background, None) => {
                    return bad(format!("{} needs a source recording", spec.condition_name()))
                }
                (NoiseKind::Background, Some(p)) if !p.is_file() => {
                    return bad(format!("noise source {} not found", p.display()))
                }
                (NoiseKind::White | NoiseKind::Pink, Some(_)) => {
                    return bad(format!("{} is generated and takes no source", spec.condition_name()))
                }
                _ => {}
            }
            let name = spec.condition_name();
            if name == CLEAN || names.contains(&name) {
                return bad(format!("condition {name} listed twice"));
            }
            names.push(name);
        }
        for s in &self.fusion {
            if s.members.is_empty() {
                return bad("empty fusion subset".into());
            }
            if let Some(m) = s.members.iter().find(|m| !self.features.contains(m)) {
                return bad(format!("fusion subset {} uses unextracted feature {m}", s.name()));
            }
            if let Some(w) = &s.weights {
                if w.len() != s.members.len() {
                    return bad(format!("fusion subset {} has {} weights", s.name(), w.len()));
                }
                let sum: f64 = w.iter().sum();
                if w.iter().any(|x| !x.is_finite() || *x < 0.0)
                    || (sum - 1.0).abs() > bsr_core::fusion::WEIGHT_SUM_TOLERANCE
                {
                    return bad(format!("fusion weights of {} must be nonnegative and sum to 1", s.name()));
                }
            }
        }
        Ok(())
    }

    fn split_config_checked(&self) -> Result<()> {
        let s = &self.split;
        if !(0.0..=100.0).contains(&s.validation_pct)
            || !(0.0..=100.0).contains(&s.testing_pct)
            || s.validation_pct + s.testing_pct >= 100.0
        {
            return Err(CliError::Config(format!(
                "split percentages {}/{} leave no training data",
                s.validation_pct, s.testing_pct
            )));
        }
        Ok(())
    }

    /// `clean` followed by every noise condition name.
    pub fn conditions(&self) -> Vec<String> {
        std::iter::once(CLEAN.to_string())
            .chain(self.noise_specs().iter().map(NoiseSpec::condition_name))
            .collect()
    }
}

/// Column name of the noise-free condition.
pub const CLEAN: &str = "clean";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_config_round_trips() {
        let cfg = PipelineConfig::standard("data");
        let text = cfg.to_toml().unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.conditions().len(), 10);
        assert_eq!(cfg.fusion_subsets().len(), 14);
    }

    #[test]
    fn feature_names_parse() {
        for k in FeatureName::ALL {
            assert_eq!(k.as_str().parse::<FeatureName>().unwrap(), k);
        }
        assert!("wav".parse::<FeatureName>().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = PipelineConfig::from_toml("dataset_root = \"d\"\nfeatures = [\"fbank\"]\ncolour = 1\n");
        assert!(matches!(err, Err(CliError::Config(_))));
    }

    #[test]
    fn explicit_subset_name() {
        let s = FusionSubset {
            members: vec![FeatureName::BsrFloat16, FeatureName::Fbank],
            weights: None,
        };
        assert_eq!(s.name(), "bsr-float16&fbank");
    }

    #[test]
    fn validation_catches_missing_paths() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::standard(dir.path());
        assert!(matches!(cfg.validate(), Err(CliError::Config(m)) if m.contains("running_tap")));
        cfg.noise.retain(|n| n.kind != NoiseKindName::Background);
        cfg.validate().unwrap();
        cfg.dataset_root = dir.path().join("nope");
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::standard(dir.path());
        cfg.noise.clear();
        cfg.fusion = vec![FusionSubset {
            members: vec![FeatureName::Fbank, FeatureName::Mfcc],
            weights: Some(vec![0.5, 0.6]),
        }];
        assert!(cfg.validate().is_err());
    }
}
