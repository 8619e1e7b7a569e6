#![no_main]

use bsr_core::audio::{parse_wav, wav_bytes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(clip) = parse_wav(data) {
        let again = parse_wav(&wav_bytes(&clip)).expect("canonical WAV must parse");
        assert_eq!(again, clip);
    }
});
