//! Audio feature extraction and late score fusion.
//!
//! The crate covers the whole feature pipeline for short keyword clips:
//!
//! - [`audio`]: RIFF/WAVE PCM16 loading, padding, peak normalization and dataset scanning.
//! - [`bsr`]: bit-sequence representations (two's-complement int16 and IEEE 754 binary16)
//!   with bit-pulse and bit-image views.
//! - [`spectral`]: FBANK and MFCC with delta and double-delta appendages.
//! - [`noise`]: white/pink generators and SNR-exact mixing.
//! - [`classifier`]: pooled-statistics softmax model trained with momentum SGD and
//!   warm restarts.
//! - [`scores`] and [`fusion`]: posterior score files, linear fusion, accuracy and
//!   confusion analytics.

pub mod audio;
pub mod bsr;
pub mod classifier;
mod error;
pub mod fusion;
pub mod noise;
pub mod scores;
pub mod spectral;

pub use error::{Error, Result};

/// Sample rate of every dataset clip, in Hz.
pub const SAMPLE_RATE: u32 = 16_000;

/// Canonical clip length after padding: one second at [`SAMPLE_RATE`].
pub const CLIP_LEN: usize = 16_000;
