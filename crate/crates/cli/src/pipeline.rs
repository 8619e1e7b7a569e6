//! Stage drivers. Every stage reads its inputs from, and writes its outputs under, the
//! configured output directory:
//!
//! ```text
//! features/<condition>/<kind>/{<clip>.fea|.bsr, manifest.tsv, failures.tsv}
//! synth/<condition>/{<clip>.wav, manifest.tsv, failures.tsv}
//! models/<kind>.smx, models/<kind>.loss.tsv
//! scores/<condition>/<kind>.tsv
//! fused/<condition>/<a&b>.tsv
//! report/accuracy.tsv, report/confusion/<condition>/<row>.{csv,svg},
//! report/diff/<condition>/<a>_vs_<b>.tsv
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bsr_core::audio::dataset::assign_splits;
use bsr_core::audio::{load_wav, pad_or_trim, normalize_peak, scan_dataset, wav_bytes, DatasetEntry, PcmClip, Split, Waveform};
use bsr_core::bsr::{waveform_to_bsr, BitMatrix, BsrInput, BsrKind};
use bsr_core::classifier::{pool, score_dataset, train, Example, PoolInput, PooledVector, SoftmaxModel};
use bsr_core::fusion::{accuracy, confusion, confusion_diff, fuse, AccuracyTable, FusionSpec, SweepRow, Truth};
use bsr_core::noise::{clip_seed, corrupt, NoiseSource, NoiseSpec};
use bsr_core::scores::ScoreMatrix;
use bsr_core::spectral::{FeatureExtractor, FeatureMatrix, FrameConfig};
use bsr_core::{CLIP_LEN, SAMPLE_RATE};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::cache::{hex, write_file, Fingerprint, Stamp, Status};
use crate::config::{FeatureName, FusionSubset, PipelineConfig, CLEAN};
use crate::error::{CliError, Result};

/// Bumped whenever an on-disk artifact layout changes.
const FORMAT_VERSION: &str = "1";

/// Outcome of one stage: per-artifact cache status and the number of failed clips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: &'static str,
    pub items: Vec<(String, Status)>,
    pub failures: usize,
}

impl StageReport {
    fn new(stage: &'static str) -> Self {
        Self {
            stage,
            items: Vec::new(),
            failures: 0,
        }
    }

    pub fn count(&self, status: Status) -> usize {
        self.items.iter().filter(|(_, s)| *s == status).count()
    }

    /// One-line log summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} computed, {} cached",
            self.stage,
            self.count(Status::Computed),
            self.count(Status::Cached)
        );
        if self.failures > 0 {
            let _ = write!(s, ", {} failed", self.failures);
        }
        s
    }
}

/// A dataset clip with its split.
#[derive(Debug, Clone)]
struct Clip {
    entry: DatasetEntry,
    split: Split,
}

/// One row of a feature manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub clip_id: String,
    pub label: String,
    pub split: Split,
    pub path: PathBuf,
}

fn parse_split(s: &str) -> Option<Split> {
    [Split::Train, Split::Validation, Split::Test].into_iter().find(|x| x.as_str() == s)
}

/// `clip_id, label, split, path` rows; paths are relative to the manifest directory.
pub fn read_feature_manifest(path: &Path) -> Result<Vec<FeatureRow>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(path, bsr_core::Error::Io { path: path.into(), source: e }))?;
    parse_feature_manifest(&text, path.parent().unwrap_or(Path::new("")))
        .map_err(|e| CliError::data(path, e))
}

/// Parse manifest text, resolving feature paths against `dir`. Absolute paths and `..`
/// components are rejected.
pub fn parse_feature_manifest(text: &str, dir: &Path) -> bsr_core::Result<Vec<FeatureRow>> {
    let bad = |line: usize, message: String| bsr_core::Error::Manifest { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, MANIFEST_HEADER)) => {}
        _ => return Err(bad(1, "missing header".into())),
    }
    lines
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split('\t').collect();
            let [clip_id, label, split, rel] = cols[..] else {
                return Err(bad(i + 1, format!("expected 4 columns, found {}", cols.len())));
            };
            let split = parse_split(split).ok_or_else(|| bad(i + 1, format!("unknown split {split:?}")))?;
            if rel.is_empty() || Path::new(rel).is_absolute() || rel.split('/').any(|c| c == "..") {
                return Err(bad(i + 1, format!("bad feature path {rel:?}")));
            }
            Ok(FeatureRow {
                clip_id: clip_id.to_string(),
                label: label.to_string(),
                split,
                path: dir.join(rel),
            })
        })
        .collect()
}

const MANIFEST_HEADER: &str = "clip_id\tlabel\tsplit\tpath";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::data(path, bsr_core::Error::Io { path: path.into(), source: e }))
}

fn failures_tsv(failures: &[(String, String)]) -> String {
    let mut out = String::from("clip_id\terror\n");
    for (id, err) in failures {
        let _ = writeln!(out, "{id}\t{}", err.replace(['\t', '\n'], " "));
    }
    out
}

/// Pool a feature file into the classifier input vector.
pub fn pooled_from_file(kind: FeatureName, path: &Path) -> Result<PooledVector> {
    let bytes = read_bytes(path)?;
    let pooled = match kind.extension() {
        "bsr" => pool(PoolInput::Bits(&BitMatrix::from_bytes(&bytes).map_err(|e| CliError::data(path, e))?)),
        _ => pool(PoolInput::Features(&FeatureMatrix::from_bytes(&bytes).map_err(|e| CliError::data(path, e))?)),
    };
    pooled.map_err(|e| CliError::data(path, e))
}

/// Encoded feature file for one clip. `pcm` is the padded source clip, `w` the normalized
/// (and possibly corrupted) waveform.
pub fn feature_bytes(kind: FeatureName, pcm: &PcmClip, w: &Waveform, noisy: bool, fx: &FeatureExtractor) -> bsr_core::Result<Vec<u8>> {
    Ok(match kind {
        FeatureName::Raw => FeatureMatrix::raw(w).to_bytes(),
        FeatureName::BsrInt16 if noisy => waveform_to_bsr(BsrInput::Pcm(&w.to_pcm16()), BsrKind::Int16)?.to_bytes(),
        FeatureName::BsrInt16 => waveform_to_bsr(BsrInput::Pcm(pcm), BsrKind::Int16)?.to_bytes(),
        FeatureName::BsrFloat16 => waveform_to_bsr(BsrInput::Float(w), BsrKind::Float16)?.to_bytes(),
        FeatureName::Fbank => fx.fbank(w)?.to_bytes(),
        FeatureName::Mfcc => fx.mfcc(w)?.to_bytes(),
    })
}

/// Load, check, pad to one second and peak-normalize.
fn load_clip(entry: &DatasetEntry) -> bsr_core::Result<(PcmClip, Waveform)> {
    let raw = load_wav(&entry.path)?;
    if raw.sample_rate != SAMPLE_RATE {
        return Err(bsr_core::Error::SampleRate {
            expected: SAMPLE_RATE,
            found: raw.sample_rate,
        });
    }
    let pcm = pad_or_trim(&raw, CLIP_LEN);
    let w = normalize_peak(&pcm).with_provenance(entry.source_id.clone(), Some(entry.label.clone()));
    Ok((pcm, w))
}

pub struct Pipeline {
    cfg: PipelineConfig,
    out: PathBuf,
    pool: rayon::ThreadPool,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
        Ok(Self {
            out: cfg.out_dir(),
            cfg,
            pool,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn feature_dir(&self, condition: &str, kind: FeatureName) -> PathBuf {
        self.out.join("features").join(condition).join(kind.as_str())
    }

    pub fn model_path(&self, kind: FeatureName) -> PathBuf {
        self.out.join("models").join(format!("{kind}.smx"))
    }

    pub fn score_path(&self, condition: &str, kind: FeatureName) -> PathBuf {
        self.out.join("scores").join(condition).join(format!("{kind}.tsv"))
    }

    pub fn fused_path(&self, condition: &str, subset: &FusionSubset) -> PathBuf {
        self.out.join("fused").join(condition).join(format!("{}.tsv", subset.name()))
    }

    pub fn report_path(&self) -> PathBuf {
        self.out.join("report").join("accuracy.tsv")
    }

    fn clips(&self) -> Result<Vec<Clip>> {
        let root = self.cfg.dataset_dir();
        let manifest = self.cfg.manifest.as_deref().map(|m| self.cfg.resolve(m));
        let entries = scan_dataset(&root, manifest.as_deref()).map_err(|e| CliError::data(&root, e))?;
        let splits = assign_splits(&root, &entries, self.cfg.split_config()).map_err(|e| CliError::data(&root, e))?;
        Ok(entries.into_iter().zip(splits).map(|(entry, split)| Clip { entry, split }).collect())
    }

    /// SHA-256 of each clip file; unreadable files hash their error text so the failure is
    /// reproduced rather than cached away.
    fn clip_digests(&self, clips: &[Clip]) -> Vec<String> {
        self.pool.install(|| {
            clips
                .par_iter()
                .map(|c| match fs::read(&c.entry.path) {
                    Ok(bytes) => hex(&Sha256::digest(&bytes)),
                    Err(e) => format!("unreadable: {e}"),
                })
                .collect()
        })
    }

    fn file_digests(&self, paths: &[&Path]) -> Result<Vec<String>> {
        self.pool.install(|| paths.par_iter().map(|p| read_bytes(p).map(|b| hex(&Sha256::digest(&b)))).collect())
    }

    fn noise_fingerprint(&self, fp: &mut Fingerprint, spec: &NoiseSpec) -> Result<()> {
        fp.text(&spec.condition_name()).text(&spec.seed.to_string()).text(&self.cfg.master_seed.to_string());
        if let Some(src) = &spec.source {
            fp.file(src)?;
        }
        Ok(())
    }

    fn prepare_noise(spec: &NoiseSpec) -> Result<NoiseSource> {
        NoiseSource::prepare(spec).map_err(|e| match &spec.source {
            Some(p) => CliError::data(p, e),
            None => e.into(),
        })
    }

    /// Features for every configured condition; clean covers all splits, noisy conditions
    /// cover the test split.
    pub fn extract(&self, kinds: &[FeatureName]) -> Result<StageReport> {
        let mut report = StageReport::new("extract");
        let clips = self.clips()?;
        let digests = self.clip_digests(&clips);
        let frame_cfg = FrameConfig::default();
        let fx = FeatureExtractor::new(frame_cfg.clone())?;

        let mut conditions: Vec<(String, Option<NoiseSpec>)> = vec![(CLEAN.to_string(), None)];
        conditions.extend(self.cfg.noise_specs().into_iter().map(|s| (s.condition_name(), Some(s))));

        for (cond, spec) in conditions {
            let members: Vec<usize> = (0..clips.len())
                .filter(|&i| spec.is_none() || clips[i].split == Split::Test)
                .collect();
            let mut base = Fingerprint::new("extract");
            base.text(FORMAT_VERSION).text(&format!("{frame_cfg:?}"));
            if let Some(s) = &spec {
                self.noise_fingerprint(&mut base, s)?;
            }
            for &i in &members {
                let c = &clips[i];
                base.text(&c.entry.source_id).text(&c.entry.label).text(c.split.as_str()).text(&digests[i]);
            }

            let mut stale = Vec::new();
            for &kind in kinds {
                let mut fp = base.clone();
                fp.text(kind.as_str());
                let dir = self.feature_dir(&cond, kind);
                let stamp = Stamp::new(&self.out, &format!("extract/{cond}/{kind}"), &fp);
                let name = format!("{cond}/{kind}");
                if stamp.is_fresh(&[&dir.join("manifest.tsv")]) {
                    report.items.push((name, Status::Cached));
                } else {
                    stamp.invalidate();
                    stale.push((kind, dir, stamp, name));
                }
            }
            if stale.is_empty() {
                continue;
            }

            let source = spec.as_ref().map(Self::prepare_noise).transpose()?;
            let results: Vec<std::result::Result<Vec<Vec<u8>>, String>> = self.pool.install(|| {
                members
                    .par_iter()
                    .map(|&i| {
                        let (pcm, mut w) = load_clip(&clips[i].entry).map_err(|e| e.to_string())?;
                        if let (Some(spec), Some(source)) = (&spec, &source) {
                            w = corrupt(&w, spec, source, self.cfg.master_seed).map_err(|e| e.to_string())?.0;
                        }
                        stale
                            .iter()
                            .map(|(kind, ..)| feature_bytes(*kind, &pcm, &w, spec.is_some(), &fx).map_err(|e| e.to_string()))
                            .collect()
                    })
                    .collect()
            });

            for (k, (kind, dir, stamp, name)) in stale.into_iter().enumerate() {
                if dir.exists() {
                    fs::remove_dir_all(&dir).map_err(|e| CliError::data(&dir, bsr_core::Error::Io { path: dir.clone(), source: e }))?;
                }
                let mut manifest = format!("{MANIFEST_HEADER}\n");
                let mut failures = Vec::new();
                for (&i, res) in members.iter().zip(&results) {
                    let c = &clips[i];
                    match res {
                        Ok(files) => {
                            let rel = format!("{}.{}", c.entry.source_id, kind.extension());
                            write_file(&dir.join(&rel), &files[k])?;
                            let _ = writeln!(manifest, "{}\t{}\t{}\t{rel}", c.entry.source_id, c.entry.label, c.split.as_str());
                        }
                        Err(e) => failures.push((c.entry.source_id.clone(), e.clone())),
                    }
                }
                write_file(&dir.join("failures.tsv"), failures_tsv(&failures).as_bytes())?;
                write_file(&dir.join("manifest.tsv"), manifest.as_bytes())?;
                report.failures += failures.len();
                if failures.is_empty() {
                    stamp.commit()?;
                }
                report.items.push((name, Status::Computed));
            }
        }
        Ok(report)
    }

    /// PCM16 copies of every clip under every noise condition.
    pub fn synthesize(&self) -> Result<StageReport> {
        let mut report = StageReport::new("synthesize");
        let clips = self.clips()?;
        let digests = self.clip_digests(&clips);
        for spec in self.cfg.noise_specs() {
            let cond = spec.condition_name();
            let dir = self.out.join("synth").join(&cond);
            let mut fp = Fingerprint::new("synthesize");
            fp.text(FORMAT_VERSION);
            self.noise_fingerprint(&mut fp, &spec)?;
            for (c, d) in clips.iter().zip(&digests) {
                fp.text(&c.entry.source_id).text(&c.entry.label).text(d);
            }
            let stamp = Stamp::new(&self.out, &format!("synthesize/{cond}"), &fp);
            if stamp.is_fresh(&[&dir.join("manifest.tsv")]) {
                report.items.push((cond, Status::Cached));
                continue;
            }
            stamp.invalidate();
            let source = Self::prepare_noise(&spec)?;
            let results: Vec<std::result::Result<(Vec<u8>, u64), String>> = self.pool.install(|| {
                clips
                    .par_iter()
                    .map(|c| {
                        let (_, w) = load_clip(&c.entry).map_err(|e| e.to_string())?;
                        let (noisy, seed) = corrupt(&w, &spec, &source, self.cfg.master_seed).map_err(|e| e.to_string())?;
                        Ok((wav_bytes(&noisy.to_pcm16()), seed))
                    })
                    .collect()
            });
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(|e| CliError::data(&dir, bsr_core::Error::Io { path: dir.clone(), source: e }))?;
            }
            let mut manifest = String::from("path\tlabel\tcondition\tsnr_db\tseed\n");
            let mut failures = Vec::new();
            for (c, res) in clips.iter().zip(results) {
                match res {
                    Ok((bytes, seed)) => {
                        debug_assert_eq!(seed, clip_seed(self.cfg.master_seed, &spec, &c.entry.source_id));
                        let rel = format!("{}.wav", c.entry.source_id);
                        write_file(&dir.join(&rel), &bytes)?;
                        let _ = writeln!(manifest, "{rel}\t{}\t{cond}\t{}\t{seed}", c.entry.label, spec.snr_db);
                    }
                    Err(e) => failures.push((c.entry.source_id.clone(), e)),
                }
            }
            write_file(&dir.join("failures.tsv"), failures_tsv(&failures).as_bytes())?;
            write_file(&dir.join("manifest.tsv"), manifest.as_bytes())?;
            report.failures += failures.len();
            if failures.is_empty() {
                stamp.commit()?;
            }
            report.items.push((cond, Status::Computed));
        }
        Ok(report)
    }

    fn manifest_for(&self, condition: &str, kind: FeatureName) -> Result<(PathBuf, Vec<FeatureRow>)> {
        let path = self.feature_dir(condition, kind).join("manifest.tsv");
        if !path.is_file() {
            return Err(CliError::Missing { path, stage: "extract" });
        }
        let rows = read_feature_manifest(&path)?;
        Ok((path, rows))
    }

    /// Fingerprint over a manifest and the files it lists.
    fn rows_fingerprint(&self, fp: &mut Fingerprint, manifest: &Path, rows: &[&FeatureRow]) -> Result<()> {
        fp.file(manifest)?;
        let paths: Vec<&Path> = rows.iter().map(|r| r.path.as_path()).collect();
        for d in self.file_digests(&paths)? {
            fp.text(&d);
        }
        Ok(())
    }

    fn examples(&self, kind: FeatureName, rows: &[&FeatureRow]) -> Result<Vec<Example>> {
        self.pool.install(|| {
            rows.par_iter()
                .map(|r| {
                    Ok(Example {
                        id: r.clip_id.clone(),
                        input: pooled_from_file(kind, &r.path)?,
                        label: r.label.clone(),
                    })
                })
                .collect()
        })
    }

    /// One classifier per feature kind on the clean training split.
    pub fn train(&self) -> Result<StageReport> {
        let mut report = StageReport::new("train");
        let tcfg = self.cfg.train_config();
        for &kind in &self.cfg.features {
            let (manifest, rows) = self.manifest_for(CLEAN, kind)?;
            let train_rows: Vec<&FeatureRow> = rows.iter().filter(|r| r.split == Split::Train).collect();
            let val_rows: Vec<&FeatureRow> = rows.iter().filter(|r| r.split == Split::Validation).collect();
            let mut fp = Fingerprint::new("train");
            fp.text(FORMAT_VERSION).text(kind.as_str()).text(&format!("{tcfg:?}"));
            self.rows_fingerprint(&mut fp, &manifest, &rows.iter().collect::<Vec<_>>())?;
            let model_path = self.model_path(kind);
            let stamp = Stamp::new(&self.out, &format!("train/{kind}"), &fp);
            if stamp.is_fresh(&[&model_path]) {
                report.items.push((kind.to_string(), Status::Cached));
                continue;
            }
            stamp.invalidate();
            if train_rows.is_empty() {
                return Err(CliError::data(&manifest, bsr_core::Error::Empty("training split")));
            }
            let data = self.examples(kind, &train_rows)?;
            let val = self.examples(kind, &val_rows)?;
            let fitted = train(&data, (!val.is_empty()).then_some(val.as_slice()), &tcfg).map_err(|e| CliError::data(&manifest, e))?;
            let mut log = String::from("epoch\tloss\n");
            let _ = writeln!(log, "0\t{}", fitted.initial_loss);
            for (e, l) in fitted.epoch_losses.iter().enumerate() {
                let _ = writeln!(log, "{}\t{l}", e + 1);
            }
            write_file(&model_path, &fitted.model.to_bytes())?;
            write_file(&model_path.with_extension("loss.tsv"), log.as_bytes())?;
            stamp.commit()?;
            report.items.push((kind.to_string(), Status::Computed));
        }
        Ok(report)
    }

    /// Posterior score files for the test split of every condition.
    pub fn score(&self) -> Result<StageReport> {
        let mut report = StageReport::new("score");
        for cond in self.cfg.conditions() {
            for &kind in &self.cfg.features {
                let model_path = self.model_path(kind);
                if !model_path.is_file() {
                    return Err(CliError::Missing { path: model_path, stage: "train" });
                }
                let (manifest, rows) = self.manifest_for(&cond, kind)?;
                let test: Vec<&FeatureRow> = rows.iter().filter(|r| r.split == Split::Test).collect();
                let mut fp = Fingerprint::new("score");
                fp.text(FORMAT_VERSION).text(kind.as_str()).file(&model_path)?;
                self.rows_fingerprint(&mut fp, &manifest, &test)?;
                let out = self.score_path(&cond, kind);
                let name = format!("{cond}/{kind}");
                let stamp = Stamp::new(&self.out, &format!("score/{name}"), &fp);
                if stamp.is_fresh(&[&out]) {
                    report.items.push((name, Status::Cached));
                    continue;
                }
                stamp.invalidate();
                let model = SoftmaxModel::load(&model_path).map_err(|e| CliError::data(&model_path, e))?;
                let examples = self.examples(kind, &test)?;
                let scores = score_dataset(&model, &examples).map_err(|e| CliError::data(&manifest, e))?;
                write_file(&out, scores.to_tsv().as_bytes())?;
                stamp.commit()?;
                report.items.push((name, Status::Computed));
            }
        }
        Ok(report)
    }

    fn load_scores(path: &Path, stage: &'static str) -> Result<ScoreMatrix> {
        if !path.is_file() {
            return Err(CliError::Missing { path: path.into(), stage });
        }
        ScoreMatrix::load(path).map_err(|e| CliError::data(path, e))
    }

    /// Fused score files for every multi-member subset and condition.
    pub fn fuse(&self) -> Result<StageReport> {
        let mut report = StageReport::new("fuse");
        for cond in self.cfg.conditions() {
            for subset in self.cfg.fusion_subsets().iter().filter(|s| s.members.len() > 1) {
                let inputs: Vec<PathBuf> = subset.members.iter().map(|&k| self.score_path(&cond, k)).collect();
                let mut fp = Fingerprint::new("fuse");
                fp.text(FORMAT_VERSION).text(&format!("{:?}", subset.weights));
                for p in &inputs {
                    if !p.is_file() {
                        return Err(CliError::Missing { path: p.clone(), stage: "score" });
                    }
                    fp.file(p)?;
                }
                let out = self.fused_path(&cond, subset);
                let name = format!("{cond}/{}", subset.name());
                let stamp = Stamp::new(&self.out, &format!("fuse/{name}"), &fp);
                if stamp.is_fresh(&[&out]) {
                    report.items.push((name, Status::Cached));
                    continue;
                }
                stamp.invalidate();
                let mats = inputs.iter().map(|p| Self::load_scores(p, "score")).collect::<Result<Vec<_>>>()?;
                let refs: Vec<&ScoreMatrix> = mats.iter().collect();
                let spec = match &subset.weights {
                    Some(w) => FusionSpec::new(refs, w.clone()),
                    None => FusionSpec::equal(refs),
                }
                .map_err(|e| CliError::Config(format!("{}: {e}", subset.name())))?;
                let fused = fuse(&spec).map_err(|e| CliError::data(&inputs[0], e))?;
                write_file(&out, fused.to_tsv().as_bytes())?;
                stamp.commit()?;
                report.items.push((name, Status::Computed));
            }
        }
        Ok(report)
    }

    fn subset_scores_path(&self, cond: &str, subset: &FusionSubset) -> (PathBuf, &'static str) {
        match subset.members[..] {
            [single] => (self.score_path(cond, single), "score"),
            _ => (self.fused_path(cond, subset), "fuse"),
        }
    }

    /// Accuracy table, confusion matrices and pairwise confusion diffs.
    pub fn report(&self) -> Result<StageReport> {
        let mut report = StageReport::new("report");
        let subsets = self.cfg.fusion_subsets();
        let conditions = self.cfg.conditions();
        let mut fp = Fingerprint::new("report");
        fp.text(FORMAT_VERSION);
        let truth_kind = self.cfg.features[0];
        for cond in &conditions {
            fp.file(&self.manifest_for(cond, truth_kind)?.0)?;
            for s in &subsets {
                let (path, stage) = self.subset_scores_path(cond, s);
                if !path.is_file() {
                    return Err(CliError::Missing { path, stage });
                }
                fp.text(&s.name()).file(&path)?;
            }
        }
        let table_path = self.report_path();
        let stamp = Stamp::new(&self.out, "report", &fp);
        if stamp.is_fresh(&[&table_path]) {
            report.items.push(("report".into(), Status::Cached));
            return Ok(report);
        }
        stamp.invalidate();
        let report_dir = self.out.join("report");
        if report_dir.exists() {
            fs::remove_dir_all(&report_dir).map_err(|e| CliError::data(&report_dir, bsr_core::Error::Io { path: report_dir.clone(), source: e }))?;
        }

        let mut sweeps = Vec::new();
        for cond in &conditions {
            let (manifest, rows) = self.manifest_for(cond, truth_kind)?;
            let truth: Truth = rows
                .iter()
                .filter(|r| r.split == Split::Test)
                .map(|r| (r.clip_id.clone(), r.label.clone()))
                .collect();
            let mut sweep = Vec::new();
            let mut singles = HashMap::new();
            for s in &subsets {
                let (path, stage) = self.subset_scores_path(cond, s);
                let m = Self::load_scores(&path, stage)?;
                let acc = accuracy(&m, &truth).map_err(|e| CliError::data(&manifest, e))?;
                let cm = confusion(&m, &truth).map_err(|e| CliError::data(&path, e))?;
                let base = report_dir.join("confusion").join(cond).join(s.name());
                write_file(&base.with_extension("csv"), cm.to_csv().as_bytes())?;
                write_file(&base.with_extension("svg"), cm.to_svg(&format!("{} ({cond})", s.name())).as_bytes())?;
                if let [single] = s.members[..] {
                    singles.insert(single, cm);
                }
                sweep.push(SweepRow {
                    name: s.name(),
                    members: Vec::new(),
                    accuracy: acc,
                });
            }
            let kinds: Vec<FeatureName> = self.cfg.features.iter().copied().filter(|k| singles.contains_key(k)).collect();
            for (i, a) in kinds.iter().enumerate() {
                for b in &kinds[i + 1..] {
                    let diff = confusion_diff(&singles[a], &singles[b]).map_err(|e| CliError::data(self.score_path(cond, *b), e))?;
                    let path = report_dir.join("diff").join(cond).join(format!("{a}_vs_{b}.tsv"));
                    write_file(&path, diff.to_tsv().as_bytes())?;
                }
            }
            sweeps.push((cond.clone(), sweep));
        }
        let table = AccuracyTable::from_sweeps(&sweeps);
        write_file(&table_path, table.to_tsv().as_bytes())?;
        stamp.commit()?;
        report.items.push(("report".into(), Status::Computed));
        Ok(report)
    }

    /// Every stage in order; failures in one stage do not stop later stages from running on
    /// the clips that succeeded.
    pub fn run(&self) -> Result<Vec<StageReport>> {
        Ok(vec![
            self.extract(&self.cfg.features)?,
            self.synthesize()?,
            self.train()?,
            self.score()?,
            self.fuse()?,
            self.report()?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_rows_resolve_against_dir() {
        let text = format!("{MANIFEST_HEADER}\nyes/a\tyes\ttest\tyes/a.fea\n");
        let rows = parse_feature_manifest(&text, Path::new("/out/x")).unwrap();
        assert_eq!(rows[0].path, Path::new("/out/x/yes/a.fea"));
        assert_eq!(rows[0].split, Split::Test);
    }

    #[test]
    fn manifest_rejects_escapes_and_bad_rows() {
        let dir = Path::new("d");
        for body in ["a\tb\ttest\t../x.fea", "a\tb\ttest\t/abs.fea", "a\tb\tdev\tx.fea", "a\tb\ttest", "a\tb\ttest\t"] {
            let text = format!("{MANIFEST_HEADER}\n{body}\n");
            assert!(parse_feature_manifest(&text, dir).is_err(), "{body}");
        }
        assert!(parse_feature_manifest("clip\tlabel\n", dir).is_err());
        assert!(parse_feature_manifest(&format!("{MANIFEST_HEADER}\n"), dir).unwrap().is_empty());
    }

    #[test]
    fn summary_line() {
        let r = StageReport {
            stage: "score",
            items: vec![("a".into(), Status::Cached), ("b".into(), Status::Computed)],
            failures: 2,
        };
        assert_eq!(r.summary(), "score: 1 computed, 1 cached, 2 failed");
    }
}
