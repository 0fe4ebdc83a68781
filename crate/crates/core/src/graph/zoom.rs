use std::collections::BTreeSet;

use super::frontier::{availability_frontier, At};
use super::{ArcLabel, GraphError, RecipeGraph};

/// Sub-graph around one action: the action, its clause, its inputs and
/// outputs, and every food available when it runs. Only arcs between kept
/// vertices are copied.
pub fn zoom(g: &RecipeGraph, focus: &str) -> Result<RecipeGraph, GraphError> {
    let mut keep: BTreeSet<String> = availability_frontier(g, At::Action(focus))?;
    keep.insert(focus.to_string());
    for arc in g.outgoing(focus) {
        match arc.label {
            ArcLabel::HasDOInput | ArcLabel::HasPCInput | ArcLabel::HasOutput | ArcLabel::IsRelatedToClause => {
                keep.insert(arc.to.clone());
            }
            ArcLabel::IsBefore | ArcLabel::IsDuring => {}
        }
    }
    Ok(induced(g, &keep))
}

/// Copy of `g` restricted to `keep` (ids absent from `g` are ignored).
pub(crate) fn induced(g: &RecipeGraph, keep: &BTreeSet<String>) -> RecipeGraph {
    let mut sub = RecipeGraph::new(g.recipe_id.clone());
    sub.version = g.version;
    for id in keep {
        if let Some(v) = g.vertex(id) {
            sub.add_vertex(v.clone()).expect("vertex from a valid graph");
        }
    }
    for arc in g.arcs() {
        if keep.contains(&arc.from) && keep.contains(&arc.to) {
            let user = g.is_user_arc(arc);
            sub.add_arc(arc.clone()).expect("arc from a valid graph");
            if user {
                sub.mark_user_arc(arc);
            }
        }
    }
    sub.set_next_serial(g.next_serial());
    sub
}
