use std::fmt::Write as _;

use super::{RecipeGraph, VertexKind};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: one node per vertex (shape by kind), one edge per arc
/// labeled with its relation. Output order follows vertex and arc order, so
/// it is stable across runs.
pub fn export_dot(g: &RecipeGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&g.recipe_id));
    out.push_str("  rankdir=LR;\n");
    for v in g.vertices() {
        let shape = match v.kind {
            VertexKind::Action => "box",
            VertexKind::Food => "ellipse",
            VertexKind::Clause => "note",
        };
        let label = match &v.concept {
            Some(c) => format!("{}\\n{}", v.id, c),
            None => v.id.clone(),
        };
        let _ = writeln!(
            out,
            "  {} [shape={shape}, label=\"{}\"];",
            quote(&v.id),
            label.replace('"', "\\\"")
        );
    }
    for a in g.arcs() {
        let _ = writeln!(out, "  {} -> {} [label={}];", quote(&a.from), quote(&a.to), quote(a.label.as_str()));
    }
    out.push_str("}\n");
    out
}
