//! Synthetic three-class clip tree (tone, chirp, noise burst) for smoke runs and tests.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use bsr_core::audio::dataset::{TESTING_LIST, VALIDATION_LIST};
use bsr_core::audio::{wav_bytes, PcmClip};
use bsr_core::{CLIP_LEN, SAMPLE_RATE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cache::write_file;
use crate::error::Result;

pub const CLASSES: [&str; 3] = ["chirp", "noise_burst", "tone"];

fn render(class: &str, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sr = SAMPLE_RATE as f64;
    let amp = rng.random_range(0.3..0.9);
    match class {
        "tone" => {
            let f = rng.random_range(300.0..3000.0);
            let phase = rng.random_range(0.0..2.0 * PI);
            (0..CLIP_LEN).map(|n| amp * (2.0 * PI * f * n as f64 / sr + phase).sin()).collect()
        }
        "chirp" => {
            let f0 = rng.random_range(200.0..1000.0);
            let f1 = rng.random_range(2000.0..6000.0);
            let dur = CLIP_LEN as f64 / sr;
            (0..CLIP_LEN)
                .map(|n| {
                    let t = n as f64 / sr;
                    amp * (2.0 * PI * (f0 * t + 0.5 * (f1 - f0) / dur * t * t)).sin()
                })
                .collect()
        }
        _ => {
            let start = rng.random_range(0..CLIP_LEN / 2);
            let len = rng.random_range(CLIP_LEN / 8..CLIP_LEN / 3);
            (0..CLIP_LEN)
                .map(|n| {
                    let floor = rng.random_range(-0.01..0.01);
                    if (start..start + len).contains(&n) {
                        floor + amp * rng.random_range(-1.0..1.0)
                    } else {
                        floor
                    }
                })
                .collect()
        }
    }
}

/// Write `per_class` clips of each class under `root/<class>/`, plus list files that put
/// the last fifth of each class in the test split and the fifth before it in validation.
pub fn write_synthetic_dataset(root: &Path, per_class: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fifth = per_class / 5;
    let (mut val, mut test) = (String::new(), String::new());
    for class in CLASSES {
        for i in 0..per_class {
            let samples = render(class, &mut rng)
                .iter()
                .map(|v| (v * 32767.0).round().clamp(-32768.0, 32767.0) as i16)
                .collect();
            let id = format!("{class}/{class}_{i:03}");
            write_file(&root.join(format!("{id}.wav")), &wav_bytes(&PcmClip::new(samples, SAMPLE_RATE)))?;
            if i >= per_class - fifth {
                let _ = writeln!(test, "{id}.wav");
            } else if i >= per_class - 2 * fifth {
                let _ = writeln!(val, "{id}.wav");
            }
        }
    }
    write_file(&root.join(VALIDATION_LIST), val.as_bytes())?;
    write_file(&root.join(TESTING_LIST), test.as_bytes())
}

/// Write a 3 s hiss to `root/_background_noise_/running_tap.wav`, the default background source.
pub fn write_background_recording(root: &Path, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f697365);
    let samples = (0..3 * SAMPLE_RATE).map(|_| rng.random_range(-6000..6000)).collect();
    let path = root.join("_background_noise_").join("running_tap.wav");
    write_file(&path, &wav_bytes(&PcmClip::new(samples, SAMPLE_RATE)))
}
