use crate::audio::Waveform;
use crate::{Error, Result};

/// First-difference high-pass: `y[0] = x[0]`, `y[t] = x[t] - alpha * x[t-1]`.
pub fn preemphasize(w: &Waveform, alpha: f64) -> Result<Waveform> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Config(format!("pre-emphasis {alpha} not in [0, 1)")));
    }
    let x = &w.samples;
    let mut y = Vec::with_capacity(x.len());
    if let Some(&first) = x.first() {
        y.push(first);
    }
    y.extend(x.windows(2).map(|p| p[1] - alpha * p[0]));
    Ok(Waveform {
        samples: y,
        ..w.clone()
    })
}

pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
        .collect()
}

/// `1 + ceil((n - win) / hop)`; the last frame is zero-padded when it overruns the signal.
pub fn frame_count(n: usize, win: usize, hop: usize) -> Result<usize> {
    if n < win {
        return Err(Error::TooShort { len: n, min: win });
    }
    Ok(1 + (n - win).div_ceil(hop))
}

/// Slice into overlapping frames of `win` samples every `hop` samples, multiplying each by
/// `window` (which must have length `win`).
pub fn frame_with_window(x: &[f64], win: usize, hop: usize, window: &[f64]) -> Result<Vec<Vec<f64>>> {
    if win == 0 || hop == 0 {
        return Err(Error::Config("window and hop must be positive".into()));
    }
    debug_assert_eq!(window.len(), win);
    let count = frame_count(x.len(), win, hop)?;
    Ok((0..count)
        .map(|i| {
            let start = i * hop;
            (0..win)
                .map(|j| x.get(start + j).copied().unwrap_or(0.0) * window[j])
                .collect()
        })
        .collect())
}
