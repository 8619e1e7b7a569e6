//! Minimal RIFF/WAVE reader and writer for 16-bit mono PCM.

use std::fs;
use std::path::Path;

use super::PcmClip;
use crate::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

struct Format {
    code: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(Error::MalformedHeader(format!(
            "fmt chunk is {} bytes, need 16",
            body.len()
        )));
    }
    let mut code = u16_at(body, 0);
    if code == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the sub-format GUID.
        if body.len() < 26 {
            return Err(Error::MalformedHeader("short WAVE_FORMAT_EXTENSIBLE chunk".into()));
        }
        code = u16_at(body, 24);
    }
    Ok(Format {
        code,
        channels: u16_at(body, 2),
        sample_rate: u32_at(body, 4),
        bits_per_sample: u16_at(body, 14),
    })
}

/// Parse an in-memory WAV file.
///
/// Only PCM (format code 1), 16-bit, mono data is accepted. Samples and sample rate are
/// returned exactly as stored.
pub fn parse_wav(bytes: &[u8]) -> Result<PcmClip> {
    if bytes.len() < 12 {
        return Err(Error::MalformedHeader("file shorter than RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::MalformedHeader("missing RIFF magic".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedHeader("missing WAVE form type".into()));
    }

    let mut format: Option<Format> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        match id {
            b"fmt " => {
                let end = body_start
                    .checked_add(size)
                    .filter(|&e| e <= bytes.len())
                    .ok_or_else(|| Error::MalformedHeader("fmt chunk overruns file".into()))?;
                let f = parse_fmt(&bytes[body_start..end])?;
                if f.code != FORMAT_PCM {
                    return Err(Error::UnsupportedEncoding(format!("format code {}", f.code)));
                }
                if f.bits_per_sample != 16 {
                    return Err(Error::UnsupportedEncoding(format!(
                        "{} bits per sample",
                        f.bits_per_sample
                    )));
                }
                if f.channels != 1 {
                    return Err(Error::UnsupportedEncoding(format!("{} channels", f.channels)));
                }
                if f.sample_rate == 0 || f.sample_rate > u32::MAX / 2 {
                    return Err(Error::MalformedHeader(format!("sample rate {} out of range", f.sample_rate)));
                }
                format = Some(f);
            }
            b"data" => {
                let f = format
                    .as_ref()
                    .ok_or_else(|| Error::MalformedHeader("data chunk before fmt chunk".into()))?;
                if !size.is_multiple_of(2) {
                    return Err(Error::MalformedHeader(format!(
                        "data chunk of {size} bytes is not a whole number of samples"
                    )));
                }
                let available = bytes.len() - body_start;
                if available < size {
                    return Err(Error::TruncatedData {
                        expected: size,
                        found: available,
                    });
                }
                let samples = bytes[body_start..body_start + size]
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]))
                    .collect();
                return Ok(PcmClip::new(samples, f.sample_rate));
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }
    Err(Error::MalformedHeader(if format.is_none() {
        "no fmt chunk".into()
    } else {
        "no data chunk".into()
    }))
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<PcmClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_wav(&bytes)
}

/// Canonical 44-byte-header encoding of a mono PCM16 clip.
pub fn wav_bytes(clip: &PcmClip) -> Vec<u8> {
    let data_len = clip.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate.saturating_mul(2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for s in &clip.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn write_wav(path: impl AsRef<Path>, clip: &PcmClip) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, wav_bytes(clip)).map_err(|e| Error::io(path, e))
}
