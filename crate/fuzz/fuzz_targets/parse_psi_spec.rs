#![no_main]

use bl_skorokhod::convex::parse_psi_spec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(psi) = parse_psi_spec(text) {
            for x in [-2.0, 0.0, 0.5, 3.0] {
                let _ = psi.eval_psi(x);
            }
            let _ = psi.total_mass();
        }
    }
});
