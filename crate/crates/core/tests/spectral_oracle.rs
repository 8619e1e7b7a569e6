//! FFT power spectrum, filterbank, DCT and delta checks against naive reference formulas.

use std::f64::consts::PI;

use bsr_core::audio::Waveform;
use bsr_core::spectral::{
    deltas, dct_matrix, hamming, power_spectrum, preemphasize, FeatureExtractor, FrameConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn naive_power(frame: &[f64], n: usize) -> Vec<f64> {
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in frame.iter().enumerate() {
                let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                re += x * ang.cos();
                im += x * ang.sin();
            }
            (re * re + im * im) / n as f64
        })
        .collect()
}

fn naive_full_dft_energy(x: &[f64]) -> f64 {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let ang = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            re * re + im * im
        })
        .sum::<f64>()
        / n as f64
}

fn waveform(samples: Vec<f64>) -> Waveform {
    let mut w = Waveform::from_samples(samples, 16_000);
    w.normalized = true;
    w
}

#[test]
fn fft_matches_naive_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let len = rng.random_range(1..=512);
        let frame: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = power_spectrum(&frame, 512);
        let slow = naive_power(&frame, 512);
        let scale = slow.iter().cloned().fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-8 * scale.max(1e-300), "{a} vs {b}");
        }
    }
}

#[test]
fn parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [16usize, 100, 257, 512] {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq = naive_full_dft_energy(&x);
        assert!(((time - freq) / time).abs() < 1e-8);
        // the one-sided bins reconstruct the same energy
        let half = power_spectrum(&x, n);
        let mut total = half[0];
        for (k, v) in half.iter().enumerate().skip(1) {
            let mirrored = k != n - k;
            total += if mirrored && k < n.div_ceil(2) { 2.0 * v } else { *v };
        }
        assert!(((total - time) / time).abs() < 1e-8, "n={n}");
    }
}

#[test]
fn sine_peak_at_expected_bin() {
    let frame: Vec<f64> = (0..400)
        .map(|t| (2.0 * PI * 1000.0 * t as f64 / 16_000.0).sin())
        .zip(hamming(400))
        .map(|(s, w)| s * w)
        .collect();
    let p = power_spectrum(&frame, 512);
    let peak = p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(peak, 32);
    let slow = naive_power(&frame, 512);
    assert_eq!(slow.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0, 32);
}

#[test]
fn preemphasis_boosts_high_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..4096).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = preemphasize(&waveform(x.clone()), 0.97).unwrap().samples;
    let band_ratio = |sig: &[f64]| {
        let (mut lo, mut hi) = (0.0, 0.0);
        for chunk in sig.chunks_exact(256) {
            let p = naive_power(chunk, 256);
            lo += p[1..32].iter().sum::<f64>();
            hi += p[96..128].iter().sum::<f64>();
        }
        hi / lo
    };
    let before = band_ratio(&x);
    let after = band_ratio(&y);
    assert!(after > 10.0 * before, "{before} -> {after}");
}

#[test]
fn tone_at_filter_center_wins() {
    let ex = FeatureExtractor::new(FrameConfig::default()).unwrap();
    let fb = ex.filterbank();
    let window = hamming(400);
    for k in [8usize, 15, 20, 27, 33, 37] {
        let f = fb.centers_hz[k];
        let samples: Vec<f64> = (0..16_000).map(|t| 0.5 * (2.0 * PI * f * t as f64 / 16_000.0).sin()).collect();
        let w = waveform(samples);
        // oracle path: naive DFT of one pre-emphasized, windowed frame times the weights
        let emph = preemphasize(&w, 0.97).unwrap().samples;
        let frame: Vec<f64> = emph[1600..2000].iter().zip(&window).map(|(a, b)| a * b).collect();
        let spec = naive_power(&frame, 512);
        let energies: Vec<f64> = fb.weights.iter().map(|row| row.iter().zip(&spec).map(|(a, b)| a * b).sum()).collect();
        let oracle_best = energies.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(oracle_best, k);

        let lm = ex.log_mel(&w).unwrap();
        for row in &lm.log_mel[1..98] {
            let best = row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert_eq!(best, k, "filter {k} at {f} Hz");
        }
        for (a, b) in lm.log_mel[10].iter().zip(&energies) {
            assert!((a - b.max(1e-10).ln()).abs() < 1e-8);
        }
    }
}

#[test]
fn dct_is_orthonormal() {
    let d = dct_matrix(39);
    let mut worst: f64 = 0.0;
    for i in 0..39 {
        for j in 0..39 {
            let dot: f64 = (0..39).map(|n| d[i][n] * d[j][n]).sum();
            worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    assert!(worst < 1e-10);
}

#[test]
fn deltas_match_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let got = deltas(&m, 2);
    let clampi = |t: i64| t.clamp(0, 4) as usize;
    for t in 0..5i64 {
        for d in 0..3 {
            let num = (m[clampi(t + 1)][d] - m[clampi(t - 1)][d]) + 2.0 * (m[clampi(t + 2)][d] - m[clampi(t - 2)][d]);
            let expect = num / 10.0;
            assert!((got[t as usize][d] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn outputs_finite_for_hostile_inputs() {
    let ex = FeatureExtractor::new(FrameConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let impulse = {
        let mut v = vec![0.0; 16_000];
        v[8000] = 1.0;
        v
    };
    let square: Vec<f64> = (0..16_000).map(|t| if (t / 40) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let noise: Vec<f64> = (0..16_000).map(|_| rng.random_range(-1.0..1.0)).collect();
    for x in [vec![0.0; 16_000], impulse, square, noise] {
        let w = waveform(x);
        let f = ex.fbank(&w).unwrap();
        let m = ex.mfcc(&w).unwrap();
        assert_eq!((f.frames, f.dims, m.frames, m.dims), (99, 120, 99, 39));
        assert!(f.values.iter().chain(&m.values).all(|v| v.is_finite()));
    }
}
