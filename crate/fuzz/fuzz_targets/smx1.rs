#![no_main]

use bsr_core::classifier::SoftmaxModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = SoftmaxModel::from_bytes(data) {
        assert_eq!(SoftmaxModel::from_bytes(&m.to_bytes()).expect("re-encoded SMX1 must parse"), m);
        // a decoded model must be usable
        let x = vec![0.5; m.input_shift.len()];
        let _ = m.forward(&x);
    }
});
