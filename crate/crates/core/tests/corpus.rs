//! Structural invariants over every recipe of the fixture corpus.

mod support;

use recipegraph::annotator::annotate;
use recipegraph::graph::validate;
use recipegraph::VertexKind;
use support::*;

#[test]
fn corpus_invariants() {
    let (count, failures) = corpus_failures(&ontology());
    assert!(count >= 20);
    assert!(failures.is_empty(), "{failures:#?}");
}

/// Where a corpus graph falls apart, the strays are foods the text never
/// uses (or names without listing), never actions.
#[test]
fn disconnections_are_unused_foods() {
    let o = ontology();
    let mut connected = 0;
    for r in corpus() {
        let g = annotate(&r, &o).unwrap();
        let report = validate(&g, &o);
        if report.component_count == 1 {
            connected += 1;
        }
        for v in report.violations.iter().filter(|v| v.rule == "V5") {
            for id in &v.ids {
                let vertex = g.vertex(id).unwrap();
                assert_eq!(vertex.kind, VertexKind::Food, "{}: {id}", r.id);
                assert!(g.producers(id).is_empty() && g.consumers(id).is_empty(), "{}: {id}", r.id);
            }
        }
    }
    assert!(connected >= 20, "only {connected} connected graphs");
}
