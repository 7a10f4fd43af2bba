#![no_main]

use libfuzzer_sys::fuzz_target;
use pathwidth_embed::graph::MetricGraph;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = MetricGraph::from_json_str(s) {
        let again = MetricGraph::from_json_str(&g.to_json_string()).expect("serialized graph parses");
        assert_eq!(again, g);
        if g.num_vertices() <= 64 {
            let _ = g.connected_components();
            let _ = g.is_tree();
        }
    }
});
