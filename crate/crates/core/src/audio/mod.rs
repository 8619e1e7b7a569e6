//! Canonical clip representation, padding and peak normalization.

pub mod dataset;
pub mod wav;

pub use dataset::{scan_dataset, DatasetEntry, Split, SplitConfig};
pub use wav::{load_wav, parse_wav, write_wav, wav_bytes};

/// Raw signed 16-bit PCM as stored in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcmClip {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl PcmClip {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Floating-point waveform with provenance.
///
/// When `normalized` is set every sample lies in `[-1.0, 1.0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub label: Option<String>,
    pub source_id: String,
    pub normalized: bool,
}

impl Waveform {
    /// Unlabelled, unnormalized waveform.
    pub fn from_samples(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
            label: None,
            source_id: String::new(),
            normalized: false,
        }
    }

    pub fn with_provenance(mut self, source_id: impl Into<String>, label: Option<String>) -> Self {
        self.source_id = source_id.into();
        self.label = label;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    /// Mean squared sample value; zero for an empty waveform.
    pub fn power(&self) -> f64 {
        mean_square(&self.samples)
    }

    /// Re-quantize to PCM16 by scaling with 32767 and rounding, saturating at the rails.
    pub fn to_pcm16(&self) -> PcmClip {
        let samples = self
            .samples
            .iter()
            .map(|&s| (s * 32767.0).round().clamp(-32768.0, 32767.0) as i16)
            .collect();
        PcmClip::new(samples, self.sample_rate)
    }
}

pub(crate) fn mean_square(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}

/// Zero-pad or truncate at the tail so the clip holds exactly `target_len` samples.
pub fn pad_or_trim(clip: &PcmClip, target_len: usize) -> PcmClip {
    let mut samples = clip.samples.clone();
    samples.resize(target_len, 0);
    PcmClip::new(samples, clip.sample_rate)
}

/// Divide by the largest absolute sample so the peak becomes 1.0.
///
/// Silence stays silence; the result is flagged as normalized either way.
pub fn normalize_peak(clip: &PcmClip) -> Waveform {
    let peak = clip
        .samples
        .iter()
        .map(|&s| (s as i32).unsigned_abs())
        .max()
        .unwrap_or(0);
    let samples = if peak == 0 {
        vec![0.0; clip.samples.len()]
    } else {
        let peak = peak as f64;
        clip.samples.iter().map(|&s| s as f64 / peak).collect()
    };
    Waveform {
        samples,
        sample_rate: clip.sample_rate,
        label: None,
        source_id: String::new(),
        normalized: true,
    }
}

/// Peak-normalize a floating-point waveform in place if any sample exceeds unit magnitude.
pub fn renormalize_if_clipping(w: &mut Waveform) {
    let peak = w.peak();
    if peak > 1.0 {
        for s in &mut w.samples {
            *s /= peak;
        }
    }
    w.normalized = true;
}
