//! Portable bitmap export of a [`BitMatrix`]: one pixel per bit, set bits black.

use std::path::Path;

use super::{BitMatrix, BsrKind, WIDTH};
use crate::{Error, Result};

/// Binary (`P4`) PBM, 16 pixels wide and T rows high.
pub fn bit_image(m: &BitMatrix) -> Vec<u8> {
    let mut out = format!("P4\n{} {}\n", WIDTH, m.height()).into_bytes();
    for r in m.rows() {
        out.extend_from_slice(&r.to_be_bytes());
    }
    out
}

pub fn write_bit_image(m: &BitMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, bit_image(m)).map_err(|e| Error::io(path, e))
}

/// A decoded PBM raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    /// Row-major, one byte (0 or 1) per pixel.
    pub pixels: Vec<u8>,
}

impl Bitmap {
    /// Interpret a 16-pixel-wide bitmap as a bit matrix.
    pub fn to_bit_matrix(&self, kind: BsrKind) -> Result<BitMatrix> {
        if self.width != WIDTH {
            return Err(Error::Dimension {
                expected: WIDTH,
                found: self.width,
            });
        }
        let rows = self
            .pixels
            .chunks_exact(WIDTH)
            .map(|row| row.iter().fold(0u16, |acc, &p| (acc << 1) | p as u16))
            .collect();
        Ok(BitMatrix::from_rows(rows, kind))
    }
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b' ' | b'\t' | b'\n' | b'\r' => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("PBM: expected a dimension".into()))
    }
}

/// Read a plain (`P1`) or binary (`P4`) PBM.
pub fn read_pbm(data: &[u8]) -> Result<Bitmap> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(Error::Format("PBM: missing magic".into()));
    }
    let binary = match data[1] {
        b'1' => false,
        b'4' => true,
        _ => return Err(Error::Format("PBM: only P1 and P4 are supported".into())),
    };
    let mut h = Header { data, pos: 2 };
    let width = h.number()?;
    let height = h.number()?;
    let total = width
        .checked_mul(height)
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| Error::Format("PBM: image too large".into()))?;
    let mut pixels = Vec::with_capacity(total);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if h.pos >= data.len() || !data[h.pos].is_ascii_whitespace() {
            return Err(Error::Format("PBM: missing raster separator".into()));
        }
        let raster = &data[h.pos + 1..];
        let stride = width.div_ceil(8);
        if raster.len() < stride * height {
            return Err(Error::Format("PBM: truncated raster".into()));
        }
        for row in raster.chunks_exact(stride.max(1)).take(height) {
            for x in 0..width {
                pixels.push((row[x / 8] >> (7 - x % 8)) & 1);
            }
        }
        if width == 0 {
            pixels.clear();
        }
    } else {
        while pixels.len() < total {
            h.skip_space();
            match data.get(h.pos) {
                Some(b'0') => pixels.push(0),
                Some(b'1') => pixels.push(1),
                _ => return Err(Error::Format("PBM: bad or missing pixel".into())),
            }
            h.pos += 1;
        }
    }
    Ok(Bitmap {
        width,
        height,
        pixels,
    })
}
