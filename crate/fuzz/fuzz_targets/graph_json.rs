#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::graph::{parse_graph_json, ColoredGraph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(graph) = parse_graph_json(text) {
        // The shift is an involution on the flat basis.
        for x in 0..graph.dim() {
            assert_eq!(graph.partner(graph.partner(x)), x);
        }
        // Serialization round-trips.
        let again = ColoredGraph::from_json(graph.to_json()).expect("serialized graph parses");
        assert_eq!(again.dim(), graph.dim());
        assert_eq!(again.shift_map(), graph.shift_map());
    }
});
