use crate::{Error, Result};

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with centers evenly spaced in mel, each scaled to a unit peak.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// `n_mels` rows of `fft_size/2 + 1` weights.
    pub weights: Vec<Vec<f64>>,
    pub centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, fft_size: usize, sample_rate: u32, fmin: f64, fmax: f64) -> Result<Self> {
        let nyquist = sample_rate as f64 / 2.0;
        if n_mels == 0 || fft_size < 2 {
            return Err(Error::Config("need at least one filter and two FFT points".into()));
        }
        if !(fmin >= 0.0 && fmin < fmax && fmax <= nyquist) {
            return Err(Error::Config(format!(
                "mel band {fmin}..{fmax} Hz invalid for Nyquist {nyquist} Hz"
            )));
        }
        let (mlo, mhi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let step = (mhi - mlo) / (n_mels + 1) as f64;
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mlo + step * i as f64))
            .collect();
        let n_bins = fft_size / 2 + 1;
        let bin_hz = sample_rate as f64 / fft_size as f64;

        let mut weights = Vec::with_capacity(n_mels);
        for k in 0..n_mels {
            let (lo, c, hi) = (edges[k], edges[k + 1], edges[k + 2]);
            if !(lo < c && c < hi) {
                return Err(Error::DegenerateFilterbank(format!(
                    "filter {k} has coincident edges {lo}/{c}/{hi} Hz"
                )));
            }
            let mut row: Vec<f64> = (0..n_bins)
                .map(|b| {
                    let f = b as f64 * bin_hz;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= c {
                        (f - lo) / (c - lo)
                    } else {
                        (hi - f) / (hi - c)
                    }
                })
                .collect();
            let peak = row.iter().cloned().fold(0.0, f64::max);
            if peak <= 0.0 {
                return Err(Error::DegenerateFilterbank(format!(
                    "filter {k} ({lo:.1}..{hi:.1} Hz) covers no FFT bin"
                )));
            }
            for w in &mut row {
                *w /= peak;
            }
            weights.push(row);
        }
        Ok(Self {
            weights,
            centers_hz: edges[1..=n_mels].to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Filter energies for one power spectrum.
    pub fn apply(&self, spectrum: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(spectrum).map(|(a, b)| a * b).sum())
            .collect()
    }
}
