#![no_main]

use beurling_core::io::{field_from_bytes, field_to_bytes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = field_from_bytes(data) {
        assert_eq!(field_to_bytes(&field), data);
    }
});
