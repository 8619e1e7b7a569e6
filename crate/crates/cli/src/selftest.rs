//! Built-in invariant checks runnable from the command line without a dataset.

use std::f64::consts::PI;

use bsr_core::audio::Waveform;
use bsr_core::bsr::{decode_float16, encode_float16, waveform_to_bsr, BsrInput, BsrKind, Float16Bits};
use bsr_core::classifier::{sgdr_lr, softmax, SoftmaxModel, TrainConfig};
use bsr_core::fusion::{fuse, predict, FusionSpec};
use bsr_core::noise::{noise_gain, pink_noise, white_noise};
use bsr_core::scores::ScoreMatrix;
use bsr_core::spectral::{dct_matrix, fbank, mfcc, power_spectrum, FrameConfig, PowerSpectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        binary16(),
        shapes(),
        spectral(),
        snr(),
        pink_slope(),
        gradient(),
        schedule(),
        fusion(),
    ]
}

// Literals group bits as sign_exponent_fraction.
#[allow(clippy::unusual_byte_groupings)]
fn binary16() -> Check {
    let mut checked = 0u32;
    let mut bad = None;
    for bits in 0..=u16::MAX {
        let h = Float16Bits::from_bits(bits);
        if h.exponent() == 31 {
            continue;
        }
        checked += 1;
        let round_trip = decode_float16(h).ok().and_then(|v| encode_float16(v).ok());
        if round_trip.map(|r| r.to_bits()) != Some(bits) {
            bad.get_or_insert(bits);
        }
    }
    let x = encode_float16(-0.49).map(|h| (h.to_bits(), decode_float16(h).ok()));
    let worked = x.ok() == Some((0b1_01101_1111010111, Some(-0.489990234375)));
    match bad {
        None if worked && checked == 63488 => Check::new("binary16", true, format!("{checked} patterns round-trip")),
        Some(b) => Check::new("binary16", false, format!("pattern {b:#06x} does not round-trip")),
        None => Check::new("binary16", false, "encode(-0.49) mismatch"),
    }
}

fn shapes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = FrameConfig::default();
    for i in 0..5 {
        let mut w = Waveform::from_samples((0..16_000).map(|_| rng.random_range(-1.0..1.0)).collect(), 16_000);
        w.normalized = true;
        let dims = (
            waveform_to_bsr(BsrInput::Float(&w), BsrKind::Float16).map(|b| (b.height(), b.width())),
            fbank(&w, &cfg).map(|m| (m.frames, m.dims)),
            mfcc(&w, &cfg).map(|m| (m.frames, m.dims)),
        );
        match dims {
            (Ok((16_000, 16)), Ok((99, 120)), Ok((99, 39))) => {}
            other => return Check::new("shapes", false, format!("clip {i}: {other:?}")),
        }
    }
    Check::new("shapes", true, "BSR 16000x16, FBANK 99x120, MFCC 99x39")
}

fn spectral() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 512;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = power_spectrum(&x, n);
        for (k, p) in fast.iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let a = -2.0 * PI * (k * t) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            let slow = (re * re + im * im) / n as f64;
            worst = worst.max((p - slow).abs() / slow.max(1e-12));
        }
    }
    let d = dct_matrix(40);
    let mut ortho: f64 = 0.0;
    for i in 0..40 {
        for j in 0..40 {
            let dot: f64 = (0..40).map(|k| d[i][k] * d[j][k]).sum();
            ortho = ortho.max((dot - f64::from(u8::from(i == j))).abs());
        }
    }
    Check::new(
        "spectral",
        worst < 1e-8 && ortho < 1e-10,
        format!("fft rel err {worst:.1e}, dct orthonormality err {ortho:.1e}"),
    )
}

fn snr() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let s = white_noise(16_000, seed, 16_000);
        let n = pink_noise(16_000, seed + 100, 16_000);
        for target in [0.0, 10.0, 20.0] {
            let Ok(g) = noise_gain(&s, &n, target) else {
                return Check::new("snr", false, "zero-power fixture");
            };
            let pn = n.power() * g * g;
            worst = worst.max((10.0 * (s.power() / pn).log10() - target).abs());
        }
    }
    Check::new("snr", worst < 1e-9, format!("max SNR error {worst:.1e} dB"))
}

fn pink_slope() -> Check {
    let seg = 4096;
    let x = pink_noise(1 << 17, 2024, 16_000).samples;
    let spec = PowerSpectrum::new(seg);
    let hann: Vec<f64> = (0..seg).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos()).collect();
    let mut acc = vec![0.0; spec.bins()];
    let mut start = 0;
    while start + seg <= x.len() {
        let frame: Vec<f64> = x[start..start + seg].iter().zip(&hann).map(|(a, w)| a * w).collect();
        for (a, p) in acc.iter_mut().zip(spec.compute(&frame)) {
            *a += p;
        }
        start += seg / 2;
    }
    let pts: Vec<(f64, f64)> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| (k as f64 * 16_000.0 / seg as f64, p))
        .filter(|&(f, _)| (100.0..=4000.0).contains(&f))
        .map(|(f, p)| (f.log2(), 10.0 * p.log10()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Check::new("pink-slope", (slope + 3.0).abs() <= 0.5, format!("{slope:.3} dB/octave"))
}

fn gradient() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (k, d) = (3, 4);
        let mut m = SoftmaxModel::zeros((0..k).map(|i| i.to_string()).collect(), d);
        m.weights.iter_mut().for_each(|w| *w = rng.random_range(-1.0..1.0));
        let xs: Vec<Vec<f64>> = (0..6).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let batch: Vec<(&[f64], usize)> = xs.iter().enumerate().map(|(i, x)| (x.as_slice(), i % k)).collect();
        let Ok((_, g)) = m.loss_and_gradient(&batch) else {
            return Check::new("gradient", false, "loss evaluation failed");
        };
        for i in 0..m.weights.len() {
            let (mut p, mut q) = (m.clone(), m.clone());
            p.weights[i] += h;
            q.weights[i] -= h;
            let (Ok(lp), Ok(lq)) = (p.loss(&batch), q.loss(&batch)) else {
                return Check::new("gradient", false, "loss evaluation failed");
            };
            let fd = (lp - lq) / (2.0 * h);
            worst = worst.max((fd - g.weights[i]).abs() / fd.abs().max(g.weights[i].abs()).max(1e-8));
        }
    }
    let shift = softmax(&[1.0, 2.0, 3.0])
        .iter()
        .zip(softmax(&[101.0, 102.0, 103.0]))
        .all(|(a, b)| (a - b).abs() < 1e-12);
    Check::new("gradient", worst < 1e-4 && shift, format!("max relative error {worst:.1e}"))
}

fn schedule() -> Check {
    let cfg = TrainConfig::default();
    let mut ok = sgdr_lr(0, &cfg) == 0.05;
    for (k, &r) in cfg.restart_epochs.iter().enumerate() {
        ok &= (sgdr_lr(r, &cfg) - 0.05 * 0.76f64.powi(k as i32 + 1)).abs() < 1e-15;
    }
    Check::new("sgdr", ok, format!("peaks at epochs 0, {:?}", cfg.restart_epochs))
}

fn fusion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ids: Vec<String> = (0..4).map(|i| format!("u{i}")).collect();
    let labels: Vec<String> = (0..3).map(|i| format!("c{i}")).collect();
    let random = |rng: &mut ChaCha8Rng| {
        let mut probs = Vec::new();
        for _ in &ids {
            let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            probs.extend(raw.iter().map(|v| v / s));
        }
        ScoreMatrix::new(ids.clone(), labels.clone(), probs)
    };
    for _ in 0..100 {
        let (Ok(a), Ok(b)) = (random(&mut rng), random(&mut rng)) else {
            return Check::new("fusion", false, "fixture rejected");
        };
        let w = rng.random_range(0.0..1.0);
        let ab = FusionSpec::new(vec![&a, &b], vec![w, 1.0 - w]).and_then(|s| fuse(&s));
        let ba = FusionSpec::new(vec![&b, &a], vec![1.0 - w, w]).and_then(|s| fuse(&s));
        let aa = FusionSpec::new(vec![&a, &a], vec![w, 1.0 - w]).and_then(|s| fuse(&s));
        let (Ok(ab), Ok(ba), Ok(aa)) = (ab, ba, aa) else {
            return Check::new("fusion", false, "fuse failed");
        };
        let convex = ab.rows().all(|r| r.iter().all(|&p| p >= 0.0) && (r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let perm = ab.probs.iter().zip(&ba.probs).all(|(x, y)| (x - y).abs() < 1e-12) && predict(&ab) == predict(&ba);
        if !(convex && perm && aa.probs == a.probs) {
            return Check::new("fusion", false, "convexity, order or idempotence violated");
        }
    }
    Check::new("fusion", true, "convex, order-free and idempotent on 100 fixtures")
}
