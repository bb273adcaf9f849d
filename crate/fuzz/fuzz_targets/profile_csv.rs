#![no_main]

use beurling_core::io::{profile_from_csv, profile_to_csv};
use beurling_core::Measure;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(profile) = profile_from_csv(text, Measure::Radial) {
        let again = profile_from_csv(&profile_to_csv(&profile), Measure::Radial).expect("re-encoded profile parses");
        assert_eq!(again.samples(), profile.samples());
        assert_eq!(again.grid().nodes(), profile.grid().nodes());
    }
});
