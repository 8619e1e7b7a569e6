//! Mixing and noise-generator properties.

use bsr_core::audio::Waveform;
use bsr_core::noise::{mix_at_snr, noise_gain, pink_noise, white_noise};
use proptest::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

fn realized_snr(signal: &Waveform, noise: &Waveform, snr: f64) -> f64 {
    let g = noise_gain(signal, noise, snr).unwrap();
    let scaled: Vec<f64> = noise.samples.iter().map(|v| g * v).collect();
    10.0 * (power(&signal.samples) / power(&scaled)).log10()
}

/// Averaged Hann-windowed periodogram with 50 % overlap.
fn welch(x: &[f64], seg: usize) -> Vec<f64> {
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let win: Vec<f64> = (0..seg)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / seg as f64).cos())
        .collect();
    let mut acc = vec![0.0; seg / 2 + 1];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let mut buf: Vec<Complex<f64>> = x[start..start + seg]
            .iter()
            .zip(&win)
            .map(|(a, w)| Complex::new(a * w, 0.0))
            .collect();
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        count += 1;
        start += seg / 2;
    }
    acc.iter().map(|a| a / count as f64).collect()
}

/// Least-squares slope of power in dB against log2 frequency.
fn slope_db_per_octave(psd: &[f64], seg: usize, rate: f64, lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = psd
        .iter()
        .enumerate()
        .map(|(k, &p)| (k as f64 * rate / seg as f64, p))
        .filter(|&(f, _)| f >= lo && f <= hi)
        .map(|(f, p)| (f.log2(), 10.0 * p.log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn pink_slope_is_minus_three_db_per_octave() {
    let n = 1 << 17;
    let x = pink_noise(n, 2024, 16_000);
    let psd = welch(&x.samples, 4096);
    let slope = slope_db_per_octave(&psd, 4096, 16_000.0, 100.0, 4000.0);
    eprintln!("pink slope {slope:.3} dB/octave");
    assert!((slope + 3.0).abs() <= 0.5, "slope {slope}");
    let white = white_noise(n, 7, 16_000);
    let flat = slope_db_per_octave(&welch(&white.samples, 4096), 4096, 16_000.0, 100.0, 4000.0);
    assert!(flat.abs() < 0.5, "white slope {flat}");
}

#[test]
fn snr_exact_for_standard_levels() {
    for seed in 0..100u64 {
        let s = white_noise(16_000, seed, 16_000);
        let n = pink_noise(16_000, seed + 1000, 16_000);
        for snr in [0.0, 10.0, 20.0] {
            assert!((realized_snr(&s, &n, snr) - snr).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snr_exact_over_range(seed in any::<u64>(), snr in -10.0f64..40.0, len in 16usize..2048) {
        let s = white_noise(len, seed, 16_000);
        let n = pink_noise(len, seed ^ 0xABCD, 16_000);
        prop_assert!((realized_snr(&s, &n, snr) - snr).abs() < 1e-9);
    }

    #[test]
    fn mixing_is_linear_in_the_noise(seed in any::<u64>(), snr in -10.0f64..40.0) {
        // scaling the noise by c scales the gain by 1/c, so the mix is unchanged
        let s = white_noise(512, seed, 16_000);
        let n = white_noise(512, seed.wrapping_add(1), 16_000);
        let scaled = Waveform::from_samples(n.samples.iter().map(|v| 3.5 * v).collect(), 16_000);
        let g1 = noise_gain(&s, &n, snr).unwrap();
        let g2 = noise_gain(&s, &scaled, snr).unwrap();
        prop_assert!((g1 / g2 - 3.5).abs() < 1e-12);
        let a = mix_at_snr(&s, &n, snr).unwrap();
        let b = mix_at_snr(&s, &scaled, snr).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!(a.peak() <= 1.0);
    }
}
