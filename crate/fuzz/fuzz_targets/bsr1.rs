#![no_main]

use bsr_core::bsr::BitMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = BitMatrix::from_bytes(data) {
        let bytes = m.to_bytes();
        assert_eq!(BitMatrix::from_bytes(&bytes).expect("re-encoded BSR1 must parse"), m);
    }
});
