//! Binary16 encoder checked against a brute-force nearest-value search, plus the golden
//! WAV fixture and bit-image round trips.

// Literals group bits as sign_exponent_fraction.
#![allow(clippy::unusual_byte_groupings)]

use bsr_core::audio::{load_wav, normalize_peak, wav_bytes, PcmClip};
use bsr_core::bsr::pbm::{bit_image, read_pbm};
use bsr_core::bsr::{decode_float16, encode_float16, waveform_to_bsr, BsrInput, BsrKind, Float16Bits};
use proptest::prelude::*;

/// Value of a pattern evaluated straight from the sign/exponent/fraction definition.
fn oracle_value(bits: u16) -> Option<f64> {
    let sign = if bits >> 15 == 1 { -1.0 } else { 1.0 };
    let e = ((bits >> 10) & 0x1F) as i32;
    let frac_bits = bits & 0x3FF;
    if e == 31 {
        return None;
    }
    let mut frac = 0.0;
    for i in 1..=10 {
        let b = (frac_bits >> (10 - i)) & 1;
        frac += b as f64 * 2f64.powi(-i);
    }
    Some(if e == 0 {
        sign * 2f64.powi(-14) * frac
    } else {
        sign * 2f64.powi(e - 15) * (1.0 + frac)
    })
}

/// Nearest finite binary16 by exhaustive search; ties go to the even fraction.
fn oracle_nearest(x: f64) -> u16 {
    let mut best: Option<(f64, u16)> = None;
    for bits in 0..=u16::MAX {
        let Some(v) = oracle_value(bits) else { continue };
        // keep the sign of zero consistent with the input
        if v == 0.0 && (bits >> 15 == 1) != x.is_sign_negative() {
            continue;
        }
        let d = (v - x).abs();
        best = match best {
            None => Some((d, bits)),
            Some((bd, bb)) if d < bd || (d == bd && bits & 1 == 0 && bb & 1 == 1) => Some((d, bits)),
            keep => keep,
        };
    }
    best.unwrap().1
}

#[test]
fn exhaustive_decode_encode_identity() {
    let mut checked = 0;
    for bits in 0..=u16::MAX {
        let p = Float16Bits::from_bits(bits);
        if p.exponent() == 31 {
            assert!(decode_float16(p).is_err());
            continue;
        }
        let v = decode_float16(p).unwrap();
        assert_eq!(Some(v), oracle_value(bits));
        assert_eq!(encode_float16(v).unwrap().to_bits(), bits, "pattern {bits:#06x}");
        checked += 1;
    }
    assert_eq!(checked, 63_488);
}

#[test]
fn minus_049_against_oracle() {
    assert_eq!(oracle_nearest(-0.49), 0b1_01101_1111010111);
    assert_eq!(encode_float16(-0.49).unwrap().to_bits(), 0b1_01101_1111010111);
    assert_eq!(oracle_value(0b1_01101_1111010111), Some(-0.489990234375));
}

#[test]
fn selected_values_match_oracle() {
    let probes = [
        0.1, -0.3333, 0.999, 1e-5, -6.1e-5, 3.0e-8, 2.98e-8, 1.0 - 1e-4, 0.5 + 2f64.powi(-12),
        -0.0009765625, 6.0e-8, 70000.0, -65519.0, 65520.0,
    ];
    for x in probes {
        let expect = if x.abs() > 65504.0 {
            if x > 0.0 { 0x7BFF } else { 0xFBFF }
        } else {
            oracle_nearest(x)
        };
        assert_eq!(encode_float16(x).unwrap().to_bits(), expect, "x = {x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_values_match_oracle(x in -1.0f64..1.0) {
        prop_assert_eq!(encode_float16(x).unwrap().to_bits(), oracle_nearest(x));
    }
}

#[test]
fn golden_fixture_loads_and_round_trips() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_16k.wav");
    let clip = load_wav(path).unwrap();
    assert_eq!(clip.len(), 16_000);
    assert_eq!(clip.sample_rate, 16_000);
    for (i, &s) in clip.samples.iter().enumerate() {
        assert_eq!(s as i64, ((i as i64 * 7919) % 65536) - 32768);
    }
    // this fixture was written by an independent writer with the same 44-byte layout
    assert_eq!(wav_bytes(&clip), std::fs::read(path).unwrap());
}

#[test]
fn bit_image_round_trip_of_real_clip() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_16k.wav");
    let w = normalize_peak(&load_wav(path).unwrap());
    let m = waveform_to_bsr(BsrInput::Float(&w), BsrKind::Float16).unwrap();
    let bmp = read_pbm(&bit_image(&m)).unwrap();
    assert_eq!((bmp.width, bmp.height), (16, 16_000));
    for t in (0..16_000).step_by(97) {
        for k in 0..16 {
            assert_eq!(bmp.pixels[t * 16 + k], m.get(t, k));
        }
    }
    assert_eq!(bmp.to_bit_matrix(BsrKind::Float16).unwrap().rows(), m.rows());
}

#[test]
fn int16_bsr_is_twos_complement() {
    let clip = PcmClip::new(vec![0, -32768, 1, -1], 16_000);
    let m = waveform_to_bsr(BsrInput::Pcm(&clip), BsrKind::Int16).unwrap();
    assert_eq!(m.rows(), &[0x0000, 0x8000, 0x0001, 0xFFFF]);
}
