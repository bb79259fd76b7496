#![no_main]

use bl_skorokhod::report::parse_report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = parse_report(text) {
            parse_report(&report.to_json()).expect("re-parse");
        }
    }
});
