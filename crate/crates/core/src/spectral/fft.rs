use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Reusable `|DFT|^2 / n` evaluator for real frames zero-padded to `n` points.
#[derive(Clone)]
pub struct PowerSpectrum {
    fft: Arc<dyn Fft<f64>>,
    size: usize,
}

impl std::fmt::Debug for PowerSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PowerSpectrum").field("size", &self.size).finish()
    }
}

impl PowerSpectrum {
    pub fn new(size: usize) -> Self {
        assert!(size > 0, "FFT size must be positive");
        let fft = FftPlanner::new().plan_fft_forward(size);
        Self { fft, size }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bins(&self) -> usize {
        self.size / 2 + 1
    }

    /// Returns `size/2 + 1` nonnegative bins; the upper half is the mirror image for real
    /// input and is dropped.
    pub fn compute(&self, frame: &[f64]) -> Vec<f64> {
        assert!(
            frame.len() <= self.size,
            "frame of {} samples exceeds FFT size {}",
            frame.len(),
            self.size
        );
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(self.size, Complex::new(0.0, 0.0));
        self.fft.process(&mut buf);
        let n = self.size as f64;
        buf[..self.bins()].iter().map(|c| c.norm_sqr() / n).collect()
    }
}

pub fn power_spectrum(frame: &[f64], fft_size: usize) -> Vec<f64> {
    PowerSpectrum::new(fft_size).compute(frame)
}
