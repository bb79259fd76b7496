#![no_main]

use bl_skorokhod::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::from_json(text) {
            // A validated config must survive its own serialization.
            let back = ExperimentConfig::from_json(&cfg.to_json()).expect("round trip");
            assert_eq!(back, cfg);
        }
    }
});
