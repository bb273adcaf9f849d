#![no_main]

use beurling_cli::CommandConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = CommandConfig::parse(text) {
        assert_eq!(CommandConfig::parse(&config.to_text()).as_ref(), Ok(&config));
    }
});
