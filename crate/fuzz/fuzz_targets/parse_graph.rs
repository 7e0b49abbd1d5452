#![no_main]

use congest::graph::WeightedGraph;
use libfuzzer_sys::fuzz_target;

// Accepted input must serialize to a stable normal form: the second parse
// has to succeed and reproduce the first serialization byte for byte.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(graph) = WeightedGraph::parse(text) else {
        return;
    };
    let normal = graph.to_text();
    let reparsed = WeightedGraph::parse(&normal).expect("normal form parses");
    assert_eq!(reparsed.to_text(), normal);
    assert_eq!(reparsed.edge_count(), graph.edge_count());
});
