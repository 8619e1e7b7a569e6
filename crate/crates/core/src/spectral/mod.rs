//! FBANK and MFCC extraction.
//!
//! Pipeline per clip: pre-emphasis, 25 ms Hamming frames every 10 ms (last frame
//! zero-padded), 512-point power spectrum, 39 triangular mel filters, natural log with a
//! 1e-10 floor. FBANK statics are the 39 log-mel energies plus log frame energy; MFCC
//! statics are DCT coefficients c1..c12 plus the same log energy. Both get delta and
//! double-delta blocks appended, so a one-second clip yields 99×120 and 99×39.

mod dct;
mod deltas;
mod fft;
mod frame;
mod mel;

pub use dct::{apply_dct, dct_matrix};
pub use deltas::deltas;
pub use fft::{power_spectrum, PowerSpectrum};
pub use frame::{frame_count, frame_with_window, hamming, preemphasize};
pub use mel::{hz_to_mel, mel_to_hz, MelFilterbank};

use crate::audio::Waveform;
use crate::{Error, Result};

/// Lower clamp applied to filter and frame energies before taking the log.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub sample_rate: u32,
    /// Seconds.
    pub window_len: f64,
    /// Seconds.
    pub hop: f64,
    pub fft_size: usize,
    pub preemphasis: f64,
    pub n_mels: usize,
    pub n_ceps: usize,
    pub mel_fmin: f64,
    pub mel_fmax: f64,
    pub delta_window: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            sample_rate: crate::SAMPLE_RATE,
            window_len: 0.025,
            hop: 0.01,
            fft_size: 512,
            preemphasis: 0.97,
            n_mels: 39,
            n_ceps: 12,
            mel_fmin: 0.0,
            mel_fmax: 8000.0,
            delta_window: 2,
        }
    }
}

impl FrameConfig {
    pub fn window_samples(&self) -> usize {
        (self.window_len * self.sample_rate as f64).round() as usize
    }

    pub fn hop_samples(&self) -> usize {
        (self.hop * self.sample_rate as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let win = self.window_samples();
        if win == 0 || self.hop_samples() == 0 {
            return Err(Error::Config("window and hop must span at least one sample".into()));
        }
        if win > self.fft_size {
            return Err(Error::Config(format!(
                "window of {win} samples exceeds FFT size {}",
                self.fft_size
            )));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return Err(Error::Config(format!("pre-emphasis {} not in [0, 1)", self.preemphasis)));
        }
        // c0 is dropped, so c1..c_n needs n + 1 filters
        if self.n_ceps == 0 || self.n_ceps >= self.n_mels {
            return Err(Error::Config(format!(
                "n_ceps {} must be in 1..n_mels ({})",
                self.n_ceps, self.n_mels
            )));
        }
        if self.delta_window == 0 {
            return Err(Error::Config("delta window must be at least 1".into()));
        }
        Ok(())
    }

    /// Windowed frames of the waveform (no pre-emphasis).
    pub fn frame_signal(&self, w: &Waveform) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let win = self.window_samples();
        frame_with_window(&w.samples, win, self.hop_samples(), &hamming(win))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Fbank,
    Mfcc,
    /// The waveform itself as a single-column matrix.
    Raw,
}

impl FeatureKind {
    fn code(self) -> u8 {
        match self {
            FeatureKind::Fbank => 0,
            FeatureKind::Mfcc => 1,
            FeatureKind::Raw => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(FeatureKind::Fbank),
            1 => Ok(FeatureKind::Mfcc),
            2 => Ok(FeatureKind::Raw),
            other => Err(Error::Format(format!("unknown feature kind byte {other}"))),
        }
    }
}

/// Frames×dims real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: FeatureKind,
    pub frames: usize,
    pub dims: usize,
    pub values: Vec<f64>,
    /// Seconds between consecutive frames.
    pub frame_step: f64,
}

const FEA_MAGIC: &[u8; 4] = b"FEA1";

impl FeatureMatrix {
    pub fn from_rows(kind: FeatureKind, rows: &[Vec<f64>], frame_step: f64) -> Self {
        let dims = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == dims), "ragged feature rows");
        Self {
            kind,
            frames: rows.len(),
            dims,
            values: rows.concat(),
            frame_step,
        }
    }

    pub fn raw(w: &Waveform) -> Self {
        Self {
            kind: FeatureKind::Raw,
            frames: w.len(),
            dims: 1,
            values: w.samples.clone(),
            frame_step: 1.0 / w.sample_rate as f64,
        }
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dims..(t + 1) * self.dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dims.max(1)).take(self.frames)
    }

    /// Start time of each frame in seconds.
    pub fn frame_times(&self) -> Vec<f64> {
        (0..self.frames).map(|t| t as f64 * self.frame_step).collect()
    }

    /// `FEA1` container: magic, kind byte, u32 frames, u32 dims, then little-endian f32
    /// values row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + 4 * self.values.len());
        out.extend_from_slice(FEA_MAGIC);
        out.push(self.kind.code());
        out.extend_from_slice(&(self.frames as u32).to_le_bytes());
        out.extend_from_slice(&(self.dims as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 13 || &bytes[..4] != FEA_MAGIC {
            return Err(Error::Format("missing FEA1 header".into()));
        }
        let kind = FeatureKind::from_code(bytes[4])?;
        let frames = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
        let dims = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
        let body = &bytes[13..];
        let expected = frames
            .checked_mul(dims)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("FEA1 size overflow".into()))?;
        if body.len() != expected {
            return Err(Error::Format(format!(
                "FEA1 body is {} bytes, header promises {frames}x{dims}",
                body.len()
            )));
        }
        let values: Vec<f64> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Format(format!("FEA1 holds non-finite value {bad}")));
        }
        let frame_step = match kind {
            FeatureKind::Raw => 1.0 / crate::SAMPLE_RATE as f64,
            _ => FrameConfig::default().hop,
        };
        Ok(Self {
            kind,
            frames,
            dims,
            values,
            frame_step,
        })
    }

    /// Comma-separated rows with a `frame,d0,d1,...` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame");
        for d in 0..self.dims {
            out.push_str(&format!(",d{d}"));
        }
        out.push('\n');
        for (t, row) in self.rows().enumerate() {
            out.push_str(&t.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Precomputed window, filterbank, DCT basis and FFT plan for one [`FrameConfig`].
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    cfg: FrameConfig,
    window: Vec<f64>,
    filterbank: MelFilterbank,
    dct: Vec<Vec<f64>>,
    spectrum: PowerSpectrum,
}

/// Per-frame log-mel energies and log frame energy.
#[derive(Debug, Clone)]
pub struct LogMelFrames {
    pub log_mel: Vec<Vec<f64>>,
    pub log_energy: Vec<f64>,
}

impl FeatureExtractor {
    pub fn new(cfg: FrameConfig) -> Result<Self> {
        cfg.validate()?;
        let filterbank =
            MelFilterbank::new(cfg.n_mels, cfg.fft_size, cfg.sample_rate, cfg.mel_fmin, cfg.mel_fmax)?;
        Ok(Self {
            window: hamming(cfg.window_samples()),
            dct: dct_matrix(cfg.n_mels),
            spectrum: PowerSpectrum::new(cfg.fft_size),
            filterbank,
            cfg,
        })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    pub fn dct(&self) -> &[Vec<f64>] {
        &self.dct
    }

    fn check_rate(&self, w: &Waveform) -> Result<()> {
        if w.sample_rate != self.cfg.sample_rate {
            return Err(Error::SampleRate {
                expected: self.cfg.sample_rate,
                found: w.sample_rate,
            });
        }
        Ok(())
    }

    pub fn log_mel(&self, w: &Waveform) -> Result<LogMelFrames> {
        self.check_rate(w)?;
        let emphasized = preemphasize(w, self.cfg.preemphasis)?;
        let frames = frame_with_window(
            &emphasized.samples,
            self.cfg.window_samples(),
            self.cfg.hop_samples(),
            &self.window,
        )?;
        let mut log_mel = Vec::with_capacity(frames.len());
        let mut log_energy = Vec::with_capacity(frames.len());
        for f in &frames {
            let energy: f64 = f.iter().map(|x| x * x).sum();
            log_energy.push(energy.max(LOG_FLOOR).ln());
            let spec = self.spectrum.compute(f);
            log_mel.push(
                self.filterbank
                    .apply(&spec)
                    .into_iter()
                    .map(|e| e.max(LOG_FLOOR).ln())
                    .collect(),
            );
        }
        Ok(LogMelFrames {
            log_mel,
            log_energy,
        })
    }

    /// Cepstra c1..c_n of one log-mel vector.
    pub fn cepstra(&self, log_mel: &[f64]) -> Vec<f64> {
        self.dct[1..=self.cfg.n_ceps]
            .iter()
            .map(|row| row.iter().zip(log_mel).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn with_deltas(&self, kind: FeatureKind, statics: Vec<Vec<f64>>) -> FeatureMatrix {
        let d1 = deltas(&statics, self.cfg.delta_window);
        let d2 = deltas(&d1, self.cfg.delta_window);
        let rows: Vec<Vec<f64>> = statics
            .into_iter()
            .zip(d1)
            .zip(d2)
            .map(|((s, a), b)| [s, a, b].concat())
            .collect();
        FeatureMatrix::from_rows(kind, &rows, self.cfg.hop)
    }

    /// `[log-mel (n_mels), log-energy]` statics with deltas and double-deltas.
    pub fn fbank(&self, w: &Waveform) -> Result<FeatureMatrix> {
        let lm = self.log_mel(w)?;
        let statics = lm
            .log_mel
            .into_iter()
            .zip(lm.log_energy)
            .map(|(mut m, e)| {
                m.push(e);
                m
            })
            .collect();
        Ok(self.with_deltas(FeatureKind::Fbank, statics))
    }

    /// `[c1..c_n, log-energy]` statics with deltas and double-deltas.
    pub fn mfcc(&self, w: &Waveform) -> Result<FeatureMatrix> {
        let lm = self.log_mel(w)?;
        let statics = lm
            .log_mel
            .iter()
            .zip(lm.log_energy)
            .map(|(m, e)| {
                let mut c = self.cepstra(m);
                c.push(e);
                c
            })
            .collect();
        Ok(self.with_deltas(FeatureKind::Mfcc, statics))
    }
}

pub fn fbank(w: &Waveform, cfg: &FrameConfig) -> Result<FeatureMatrix> {
    FeatureExtractor::new(cfg.clone())?.fbank(w)
}

pub fn mfcc(w: &Waveform, cfg: &FrameConfig) -> Result<FeatureMatrix> {
    FeatureExtractor::new(cfg.clone())?.mfcc(w)
}
