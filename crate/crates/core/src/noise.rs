//! Noise generation and SNR-controlled mixing for the noisy evaluation conditions.

use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::audio::{load_wav, mean_square, normalize_peak, renormalize_if_clipping, Waveform};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Recorded noise read from a WAV file.
    Background,
    White,
    Pink,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Background => "background",
            NoiseKind::White => "white",
            NoiseKind::Pink => "pink",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "background" => Ok(NoiseKind::Background),
            "white" => Ok(NoiseKind::White),
            "pink" => Ok(NoiseKind::Pink),
            other => Err(Error::Config(format!("unknown noise kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub snr_db: f64,
    pub seed: u64,
    /// Required for [`NoiseKind::Background`].
    pub source: Option<PathBuf>,
}

impl NoiseSpec {
    pub fn generated(kind: NoiseKind, snr_db: f64) -> Self {
        Self {
            kind,
            snr_db,
            seed: 0,
            source: None,
        }
    }

    /// Condition tag such as `white_10dB`.
    pub fn condition_name(&self) -> String {
        format!("{}_{}dB", self.kind, self.snr_db)
    }
}

/// The three noise kinds at 20, 10 and 0 dB, backgrounds drawn from `background`.
pub fn standard_conditions(background: PathBuf) -> Vec<NoiseSpec> {
    let mut out = Vec::new();
    for kind in [NoiseKind::Background, NoiseKind::White, NoiseKind::Pink] {
        for snr in [20.0, 10.0, 0.0] {
            out.push(NoiseSpec {
                kind,
                snr_db: snr,
                seed: 0,
                source: (kind == NoiseKind::Background).then(|| background.clone()),
            });
        }
    }
    out
}

/// i.i.d. standard Gaussian samples.
pub fn white_noise(n: usize, seed: u64, sample_rate: u32) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Waveform::from_samples(samples, sample_rate)
}

const PINK_ROWS: usize = 16;

/// Voss-McCartney pink noise: a sum of sample-and-hold Gaussian rows where row `k` is
/// redrawn every `2^(k+1)` samples, plus one fresh white term per sample.
pub fn pink_noise(n: usize, seed: u64, sample_rate: u32) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: [f64; PINK_ROWS] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let mut running: f64 = rows.iter().sum();
    let scale = 1.0 / ((PINK_ROWS + 1) as f64).sqrt();
    let mut samples = Vec::with_capacity(n);
    for i in 1..=n as u64 {
        let k = i.trailing_zeros() as usize;
        if k < PINK_ROWS {
            let fresh: f64 = rng.sample(StandardNormal);
            running += fresh - rows[k];
            rows[k] = fresh;
        }
        let white: f64 = rng.sample(StandardNormal);
        samples.push((running + white) * scale);
    }
    Waveform::from_samples(samples, sample_rate)
}

/// Contiguous `clip_len` excerpt starting at a uniformly drawn offset.
pub fn pick_segment(noise: &Waveform, clip_len: usize, seed: u64) -> Result<Waveform> {
    if noise.len() < clip_len {
        return Err(Error::TooShort {
            len: noise.len(),
            min: clip_len,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = rng.random_range(0..=noise.len() - clip_len);
    Ok(Waveform {
        samples: noise.samples[offset..offset + clip_len].to_vec(),
        ..noise.clone()
    })
}

/// Gain that puts `noise` at `snr_db` below `signal`, powers being full-clip mean squares.
pub fn noise_gain(signal: &Waveform, noise: &Waveform, snr_db: f64) -> Result<f64> {
    if signal.len() != noise.len() {
        return Err(Error::LengthMismatch(signal.len(), noise.len()));
    }
    let ps = mean_square(&signal.samples);
    let pn = mean_square(&noise.samples);
    if ps <= 0.0 {
        return Err(Error::ZeroPower("signal"));
    }
    if pn <= 0.0 {
        return Err(Error::ZeroPower("noise"));
    }
    Ok((ps / (pn * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// `signal + g * noise`, re-peak-normalized if the sum leaves `[-1, 1]`.
pub fn mix_at_snr(signal: &Waveform, noise: &Waveform, snr_db: f64) -> Result<Waveform> {
    let g = noise_gain(signal, noise, snr_db)?;
    let mut out = Waveform {
        samples: signal
            .samples
            .iter()
            .zip(&noise.samples)
            .map(|(s, n)| s + g * n)
            .collect(),
        ..signal.clone()
    };
    renormalize_if_clipping(&mut out);
    Ok(out)
}

/// Seed for one clip under one condition.
pub fn clip_seed(master_seed: u64, spec: &NoiseSpec, clip_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(spec.seed.to_le_bytes());
    h.update(spec.condition_name().as_bytes());
    h.update([0]);
    h.update(clip_id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Noise source prepared once per spec.
#[derive(Debug, Clone)]
pub enum NoiseSource {
    Recording(Waveform),
    Generated(NoiseKind),
}

impl NoiseSource {
    pub fn prepare(spec: &NoiseSpec) -> Result<Self> {
        match spec.kind {
            NoiseKind::Background => {
                let path = spec.source.as_ref().ok_or_else(|| {
                    Error::Config(format!("{} needs a noise source file", spec.condition_name()))
                })?;
                Ok(NoiseSource::Recording(normalize_peak(&load_wav(path)?)))
            }
            kind => Ok(NoiseSource::Generated(kind)),
        }
    }

    /// `len` samples of noise for the given seed.
    pub fn draw(&self, len: usize, seed: u64, sample_rate: u32) -> Result<Waveform> {
        match self {
            NoiseSource::Recording(w) => pick_segment(w, len, seed),
            NoiseSource::Generated(NoiseKind::White) => Ok(white_noise(len, seed, sample_rate)),
            NoiseSource::Generated(NoiseKind::Pink) => Ok(pink_noise(len, seed, sample_rate)),
            NoiseSource::Generated(NoiseKind::Background) => {
                unreachable!("background noise is always a recording")
            }
        }
    }
}

/// Mix one clip under one condition.
pub fn corrupt(clip: &Waveform, spec: &NoiseSpec, source: &NoiseSource, master_seed: u64) -> Result<(Waveform, u64)> {
    let seed = clip_seed(master_seed, spec, &clip.source_id);
    let noise = source.draw(clip.len(), seed, clip.sample_rate)?;
    Ok((mix_at_snr(clip, &noise, spec.snr_db)?, seed))
}

#[derive(Debug, Clone)]
pub struct NoisyClip {
    pub waveform: Waveform,
    pub seed: u64,
}

/// One noisy copy of the dataset.
#[derive(Debug, Clone)]
pub struct ConditionSet {
    pub name: String,
    pub spec: NoiseSpec,
    pub clips: Vec<NoisyClip>,
}

impl ConditionSet {
    /// `path, label, condition, snr_db, seed` rows; paths are `<source_id>.wav`.
    pub fn manifest_tsv(&self) -> String {
        let mut out = String::from("path\tlabel\tcondition\tsnr_db\tseed\n");
        for c in &self.clips {
            out.push_str(&format!(
                "{}.wav\t{}\t{}\t{}\t{}\n",
                c.waveform.source_id,
                c.waveform.label.as_deref().unwrap_or(""),
                self.name,
                self.spec.snr_db,
                c.seed
            ));
        }
        out
    }
}

/// Corrupt every clip under every spec. Deterministic in `(clips, specs, master_seed)`.
pub fn synthesize_conditions(clips: &[Waveform], specs: &[NoiseSpec], master_seed: u64) -> Result<Vec<ConditionSet>> {
    specs
        .iter()
        .map(|spec| {
            let source = NoiseSource::prepare(spec)?;
            let clips = clips
                .iter()
                .map(|c| {
                    corrupt(c, spec, &source, master_seed).map(|(waveform, seed)| NoisyClip { waveform, seed })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConditionSet {
                name: spec.condition_name(),
                spec: spec.clone(),
                clips,
            })
        })
        .collect()
}
