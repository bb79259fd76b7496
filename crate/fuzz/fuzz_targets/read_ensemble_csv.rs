#![no_main]

use bl_skorokhod::embedding::read_ensemble_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(samples) = read_ensemble_csv(text) {
            assert!(samples.iter().all(|s| s.t >= 0.0 && s.bt.is_finite()));
        }
    }
});
