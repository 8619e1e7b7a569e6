#![no_main]

use bsr_core::scores::ScoreMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = ScoreMatrix::parse_tsv(text) {
        let again = ScoreMatrix::parse_tsv(&m.to_tsv()).expect("written score file must parse");
        assert_eq!(again.utt_ids, m.utt_ids);
        assert_eq!(again.class_labels, m.class_labels);
        for (a, b) in again.probs.iter().zip(&m.probs) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300) + 1e-300);
        }
    }
});
