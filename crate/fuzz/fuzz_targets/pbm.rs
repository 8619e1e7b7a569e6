#![no_main]

use bsr_core::bsr::pbm::{bit_image, read_pbm};
use bsr_core::bsr::BsrKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = read_pbm(data) {
        assert_eq!(img.pixels.len(), img.width * img.height);
        if let Ok(m) = img.to_bit_matrix(BsrKind::Int16) {
            let back = read_pbm(&bit_image(&m)).expect("written PBM must parse");
            assert_eq!(back.to_bit_matrix(BsrKind::Int16).expect("16 columns"), m);
        }
    }
});
