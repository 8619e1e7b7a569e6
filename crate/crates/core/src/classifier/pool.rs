use crate::audio::Waveform;
use crate::bsr::{BitMatrix, WIDTH};
use crate::spectral::FeatureMatrix;
use crate::{Error, Result};

/// Per-dimension mean followed by per-dimension population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledVector(pub Vec<f64>);

impl PooledVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PoolInput<'a> {
    Features(&'a FeatureMatrix),
    /// The 16 bit-pulse channels of a BSR matrix.
    Bits(&'a BitMatrix),
    Waveform(&'a Waveform),
}

fn pool_columns(frames: usize, dims: usize, value: impl Fn(usize, usize) -> f64) -> Result<PooledVector> {
    if frames == 0 {
        return Err(Error::Empty("time axis"));
    }
    let n = frames as f64;
    let mut out = vec![0.0; 2 * dims];
    for d in 0..dims {
        let mean = (0..frames).map(|t| value(t, d)).sum::<f64>() / n;
        let var = (0..frames).map(|t| (value(t, d) - mean).powi(2)).sum::<f64>() / n;
        out[d] = mean;
        out[dims + d] = var.sqrt();
    }
    Ok(PooledVector(out))
}

pub fn pool(input: PoolInput<'_>) -> Result<PooledVector> {
    let pooled = match input {
        PoolInput::Features(m) => pool_columns(m.frames, m.dims, |t, d| m.values[t * m.dims + d])?,
        PoolInput::Bits(b) => pool_columns(b.height(), WIDTH, |t, d| b.get(t, d) as f64)?,
        PoolInput::Waveform(w) => pool_columns(w.len(), 1, |t, _| w.samples[t])?,
    };
    if pooled.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(f64::NAN));
    }
    Ok(pooled)
}
