#![no_main]

use bsr_core::spectral::FeatureMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = FeatureMatrix::from_bytes(data) {
        assert!(m.values.iter().all(|v| v.is_finite()));
        assert_eq!(m.values.len(), m.frames * m.dims);
        assert_eq!(FeatureMatrix::from_bytes(&m.to_bytes()).expect("re-encoded FEA1 must parse"), m);
    }
});
