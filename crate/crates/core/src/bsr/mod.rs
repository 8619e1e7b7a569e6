//! Bit-sequence representation: every sample expands into a 16-bit row, giving a T×16
//! binary matrix that can be consumed as 16 pulse channels or as a bit-pattern image.

mod float16;
pub mod pbm;

pub use float16::{decode_float16, decode_int16, encode_float16, encode_int16, Float16Bits};

use crate::audio::{PcmClip, Waveform};
use crate::{Error, Result};

pub const WIDTH: usize = 16;
const MAGIC: &[u8; 4] = b"BSR1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BsrKind {
    Int16,
    Float16,
}

impl BsrKind {
    fn code(self) -> u8 {
        match self {
            BsrKind::Int16 => 0,
            BsrKind::Float16 => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(BsrKind::Int16),
            1 => Ok(BsrKind::Float16),
            other => Err(Error::Format(format!("unknown BSR kind byte {other}"))),
        }
    }
}

/// Source samples for [`waveform_to_bsr`].
#[derive(Debug, Clone, Copy)]
pub enum BsrInput<'a> {
    Pcm(&'a PcmClip),
    Float(&'a Waveform),
}

/// T×16 binary matrix. Row `t` holds sample `t`; column 0 is the sign bit (or MSB).
///
/// Rows are stored packed, column 0 in bit 15.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<u16>,
    pub kind: BsrKind,
    pub source_id: String,
}

impl BitMatrix {
    pub fn from_rows(rows: Vec<u16>, kind: BsrKind) -> Self {
        Self {
            rows,
            kind,
            source_id: String::new(),
        }
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        WIDTH
    }

    pub fn rows(&self) -> &[u16] {
        &self.rows
    }

    pub fn get(&self, t: usize, k: usize) -> u8 {
        assert!(k < WIDTH, "column {k} out of range");
        ((self.rows[t] >> (15 - k)) & 1) as u8
    }

    pub fn row_bits(&self, t: usize) -> [u8; 16] {
        Float16Bits::from_bits(self.rows[t]).bit_vector()
    }

    /// Column `k` as a binary time series.
    pub fn pulse(&self, k: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| ((r >> (15 - k)) & 1) as f64)
            .collect()
    }

    /// The 16 bit-pulse channels, channel 0 being the sign bit.
    pub fn bit_pulses(&self) -> Vec<Vec<f64>> {
        (0..WIDTH).map(|k| self.pulse(k)).collect()
    }

    /// Rebuild a matrix from 16 pulse channels; any nonzero value counts as a set bit.
    pub fn from_pulses(pulses: &[Vec<f64>], kind: BsrKind) -> Result<Self> {
        if pulses.len() != WIDTH {
            return Err(Error::Dimension {
                expected: WIDTH,
                found: pulses.len(),
            });
        }
        let t = pulses[0].len();
        if let Some(bad) = pulses.iter().find(|p| p.len() != t) {
            return Err(Error::LengthMismatch(t, bad.len()));
        }
        let rows = (0..t)
            .map(|i| {
                pulses
                    .iter()
                    .fold(0u16, |acc, ch| (acc << 1) | (ch[i] != 0.0) as u16)
            })
            .collect();
        Ok(Self::from_rows(rows, kind))
    }

    /// Serialize as `BSR1`: magic, kind byte, little-endian u32 row count, then two bytes
    /// per row with column 0 in the most significant bit of the first byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + 2 * self.rows.len());
        out.extend_from_slice(MAGIC);
        out.push(self.kind.code());
        out.extend_from_slice(&(self.rows.len() as u32).to_le_bytes());
        for r in &self.rows {
            out.extend_from_slice(&r.to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing BSR1 header".into()));
        }
        let kind = BsrKind::from_code(bytes[4])?;
        let t = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
        let body = &bytes[9..];
        if body.len() != t.checked_mul(2).ok_or_else(|| Error::Format("row count overflow".into()))? {
            return Err(Error::Format(format!(
                "BSR1 body is {} bytes, header promises {} rows",
                body.len(),
                t
            )));
        }
        let rows = body
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        Ok(Self::from_rows(rows, kind))
    }
}

/// Expand each sample into its 16-bit pattern.
///
/// `Int16` takes raw PCM; `Float16` takes a peak-normalized waveform.
pub fn waveform_to_bsr(input: BsrInput<'_>, kind: BsrKind) -> Result<BitMatrix> {
    match (input, kind) {
        (BsrInput::Pcm(clip), BsrKind::Int16) => Ok(BitMatrix::from_rows(
            clip.samples.iter().map(|&s| s as u16).collect(),
            kind,
        )),
        (BsrInput::Float(w), BsrKind::Float16) => {
            if !w.normalized {
                return Err(Error::KindMismatch(
                    "float16 encoding needs a normalized waveform".into(),
                ));
            }
            let rows = w
                .samples
                .iter()
                .map(|&x| encode_float16(x).map(Float16Bits::to_bits))
                .collect::<Result<Vec<_>>>()?;
            Ok(BitMatrix {
                rows,
                kind,
                source_id: w.source_id.clone(),
            })
        }
        (BsrInput::Pcm(_), BsrKind::Float16) => Err(Error::KindMismatch(
            "float16 encoding needs floating-point input".into(),
        )),
        (BsrInput::Float(_), BsrKind::Int16) => Err(Error::KindMismatch(
            "int16 encoding needs integer PCM input".into(),
        )),
    }
}
