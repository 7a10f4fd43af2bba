#![no_main]

use libfuzzer_sys::fuzz_target;
use pathwidth_embed::pathwidth::PathDecomposition;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(pd) = PathDecomposition::from_json_str(s) {
        let again = PathDecomposition::from_json_str(&pd.to_json_string()).expect("serialized decomposition parses");
        assert_eq!(again, pd);
        let _ = pd.width();
        let _ = pd.intervals();
    }
});
