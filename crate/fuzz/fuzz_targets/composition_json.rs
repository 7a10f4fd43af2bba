#![no_main]

use libfuzzer_sys::fuzz_target;
use pathwidth_embed::pathwidth::{composition_to_decomposition, LinearCompositionSequence};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(seq) = LinearCompositionSequence::from_json_str(s) {
        let again = LinearCompositionSequence::from_json_str(&seq.to_json_string()).expect("serialized sequence parses");
        assert_eq!(again, seq);
        // Parsing validates, so every window must have exactly k vertices.
        for i in 0..=seq.steps.len() {
            assert_eq!(seq.window(i).len(), seq.k);
        }
        if !seq.steps.is_empty() {
            assert_eq!(composition_to_decomposition(&seq).width(), Some(seq.k));
        }
    }
});
