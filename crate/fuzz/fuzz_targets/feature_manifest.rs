#![no_main]

use std::path::Path;

use bsr_cli::pipeline::parse_feature_manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let root = Path::new("/out/features");
    if let Ok(rows) = parse_feature_manifest(text, root) {
        for r in rows {
            assert!(r.path.starts_with(root));
        }
    }
});
