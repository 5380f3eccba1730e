#![no_main]

use libfuzzer_sys::fuzz_target;
use tracefem::io::parse_levels;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let (Some(levels), Some((a, b))) = (parse_levels(text), text.split_once("..")) {
        assert!(!levels.is_empty());
        assert!(levels.windows(2).all(|w| w[1] == w[0] + 1), "ranges are contiguous: {a}..{b}");
    }
});
