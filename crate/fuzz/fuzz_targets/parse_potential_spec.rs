#![no_main]

use bl_skorokhod::config::parse_potential_spec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(r) = parse_potential_spec(text, 1.0) {
            assert!(r.a > 0.0 && r.a.is_finite());
            let _ = r.potential.value(0.5);
        }
    }
});
