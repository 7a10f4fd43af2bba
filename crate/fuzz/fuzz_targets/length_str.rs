#![no_main]

use libfuzzer_sys::fuzz_target;
use pathwidth_embed::length::Length;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(l) = s.parse::<Length>() {
        assert_eq!(l.to_string().parse::<Length>().ok(), Some(l));
    }
});
