#![no_main]

use beurling_core::io::{field_from_csv, field_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(field) = field_from_csv(text) {
        assert_eq!(field_from_csv(&field_to_csv(&field)).as_ref(), Ok(&field));
    }
});
