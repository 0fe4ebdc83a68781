use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::DiGraph;

use super::{ArcLabel, FoodOrigin, RecipeGraph, VertexKind};

/// What, besides kind and concept, must match for two vertices to correspond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsoOptions {
    pub compare_origin: bool,
    pub compare_text_spans: bool,
}

impl Default for IsoOptions {
    fn default() -> Self {
        IsoOptions {
            compare_origin: true,
            compare_text_spans: false,
        }
    }
}

type NodeWeight = (VertexKind, Option<String>, Option<FoodOrigin>, Option<(usize, usize)>);

fn to_petgraph(g: &RecipeGraph, opts: IsoOptions) -> DiGraph<NodeWeight, BTreeSet<ArcLabel>> {
    let mut pg = DiGraph::new();
    let mut idx = BTreeMap::new();
    for v in g.vertices() {
        let w = (
            v.kind,
            v.concept.clone(),
            if opts.compare_origin { v.origin } else { None },
            if opts.compare_text_spans { v.text_span } else { None },
        );
        idx.insert(v.id.as_str(), pg.add_node(w));
    }
    // Parallel arcs with different labels collapse into one labeled edge.
    let mut edges: BTreeMap<(&str, &str), BTreeSet<ArcLabel>> = BTreeMap::new();
    for a in g.arcs() {
        edges.entry((&a.from, &a.to)).or_default().insert(a.label);
    }
    for ((f, t), labels) in edges {
        pg.add_edge(idx[f], idx[t], labels);
    }
    pg
}

/// Structural equality up to vertex renaming.
pub fn isomorphic(a: &RecipeGraph, b: &RecipeGraph, opts: IsoOptions) -> bool {
    if a.vertex_count() != b.vertex_count() || a.arc_count() != b.arc_count() {
        return false;
    }
    is_isomorphic_matching(
        &to_petgraph(a, opts),
        &to_petgraph(b, opts),
        |x, y| x == y,
        |x, y| x == y,
    )
}
