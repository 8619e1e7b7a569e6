#![no_main]

use bsr_cli::PipelineConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = PipelineConfig::from_toml(text) {
        if let Ok(out) = cfg.to_toml() {
            let again = PipelineConfig::from_toml(&out).expect("serialized config must parse");
            assert_eq!(again.to_toml().expect("re-serialize"), out);
        }
    }
});
