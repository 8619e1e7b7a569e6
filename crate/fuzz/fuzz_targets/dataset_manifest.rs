#![no_main]

use bsr_core::audio::dataset::parse_manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_manifest(text) {
        for (path, label) in rows {
            assert!(!path.is_empty() && !label.is_empty());
        }
    }
});
