use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::toposort;
use petgraph::graphmap::DiGraphMap;

use super::{ArcLabel, FoodOrigin, GraphError, RecipeGraph, VertexKind};

/// Point of the preparation at which availability is asked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum At<'a> {
    /// Just before the action runs.
    Action(&'a str),
    /// After every action has run.
    End,
}

/// Strict predecessor/successor sets of the transitive closure of
/// `isBefore`. `isDuring` contributes no order, only the cycle check.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemporalOrder {
    preds: BTreeMap<String, BTreeSet<String>>,
    succs: BTreeMap<String, BTreeSet<String>>,
}

impl TemporalOrder {
    pub fn is_before(&self, a: &str, b: &str) -> bool {
        self.preds.get(b).is_some_and(|p| p.contains(a))
    }

    pub fn predecessors(&self, a: &str) -> impl Iterator<Item = &str> {
        self.preds.get(a).into_iter().flatten().map(String::as_str)
    }

    pub fn successors(&self, a: &str) -> impl Iterator<Item = &str> {
        self.succs.get(a).into_iter().flatten().map(String::as_str)
    }
}

/// Closure of `isBefore` over actions; fails if `isBefore ∪ isDuring` has a cycle.
pub fn temporal_order(g: &RecipeGraph) -> Result<TemporalOrder, GraphError> {
    let mut all: DiGraphMap<&str, ()> = DiGraphMap::new();
    let mut before: DiGraphMap<&str, ()> = DiGraphMap::new();
    for a in g.actions() {
        all.add_node(&a.id);
        before.add_node(&a.id);
    }
    for arc in g.arcs().filter(|a| a.label.is_temporal()) {
        all.add_edge(&arc.from, &arc.to, ());
        if arc.label == ArcLabel::IsBefore {
            before.add_edge(&arc.from, &arc.to, ());
        }
    }
    let topo = toposort(&all, None).map_err(|_| GraphError::CyclicTemporalOrder)?;

    let mut order = TemporalOrder::default();
    for &n in &topo {
        let mut p = BTreeSet::new();
        for m in before.neighbors_directed(n, petgraph::Direction::Incoming) {
            p.insert(m.to_string());
            p.extend(order.preds[m].iter().cloned());
        }
        order.preds.insert(n.to_string(), p);
    }
    for (n, ps) in &order.preds {
        order.succs.entry(n.clone()).or_default();
        for p in ps {
            order.succs.entry(p.clone()).or_default().insert(n.clone());
        }
    }
    Ok(order)
}

/// Foods certainly available at `at`, whatever order unordered actions run in.
///
/// A food qualifies when it exists before `at` (listed ingredient or user
/// food without producer, or produced by a strict predecessor of `at`) and
/// no action that might already have run has consumed it, i.e. each of its
/// consumers is `at` itself or a strict successor of `at`.
pub fn availability_frontier(g: &RecipeGraph, at: At<'_>) -> Result<BTreeSet<String>, GraphError> {
    if let At::Action(id) = at {
        let v = g.vertex(id).ok_or_else(|| GraphError::UnknownVertex(id.to_string()))?;
        if v.kind != VertexKind::Action {
            return Err(GraphError::NotAnAction(id.to_string()));
        }
    }
    let order = temporal_order(g)?;
    Ok(frontier_with(g, &order, at))
}

pub(crate) fn frontier_with(g: &RecipeGraph, order: &TemporalOrder, at: At<'_>) -> BTreeSet<String> {
    let ran_before = |a: &str| match at {
        At::Action(x) => order.is_before(a, x),
        At::End => true,
    };
    let surely_after = |a: &str| match at {
        At::Action(x) => a == x || order.is_before(x, a),
        At::End => false,
    };
    g.foods()
        .filter(|f| {
            let producers = g.producers(&f.id);
            let exists = if producers.is_empty() {
                matches!(f.origin, Some(FoodOrigin::IngredientList | FoodOrigin::UserAdded))
            } else {
                producers.iter().any(|p| ran_before(p))
            };
            exists && g.consumers(&f.id).iter().all(|c| surely_after(c))
        })
        .map(|f| f.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Arc, Vertex};

    /// ingredients a, b; x1 consumes a → o1; x2 consumes o1 and b → o2.
    fn chain() -> RecipeGraph {
        let mut g = RecipeGraph::new("r");
        for (id, origin) in [
            ("Food:a_1", FoodOrigin::IngredientList),
            ("Food:b_2", FoodOrigin::IngredientList),
            ("Food:o_4", FoodOrigin::ActionOutput),
            ("Food:o_6", FoodOrigin::ActionOutput),
        ] {
            g.add_vertex(Vertex::food(id.into(), None, origin)).unwrap();
        }
        g.add_vertex(Vertex::action("Action:x_3".into(), "Peel".into())).unwrap();
        g.add_vertex(Vertex::action("Action:y_5".into(), "Mix".into())).unwrap();
        for (f, t, l) in [
            ("Action:x_3", "Food:a_1", ArcLabel::HasDOInput),
            ("Action:x_3", "Food:o_4", ArcLabel::HasOutput),
            ("Action:y_5", "Food:o_4", ArcLabel::HasDOInput),
            ("Action:y_5", "Food:b_2", ArcLabel::HasPCInput),
            ("Action:y_5", "Food:o_6", ArcLabel::HasOutput),
            ("Action:x_3", "Action:y_5", ArcLabel::IsBefore),
        ] {
            g.add_arc(Arc::new(f, t, l)).unwrap();
        }
        g
    }

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn before_first_action_is_ingredients() {
        let g = chain();
        assert_eq!(
            availability_frontier(&g, At::Action("Action:x_3")).unwrap(),
            set(&["Food:a_1", "Food:b_2"])
        );
    }

    #[test]
    fn mid_chain_and_end() {
        let g = chain();
        assert_eq!(
            availability_frontier(&g, At::Action("Action:y_5")).unwrap(),
            set(&["Food:b_2", "Food:o_4"])
        );
        assert_eq!(availability_frontier(&g, At::End).unwrap(), set(&["Food:o_6"]));
    }

    #[test]
    fn unordered_consumer_hides_food() {
        let mut g = chain();
        g.remove_arc(&Arc::new("Action:x_3", "Action:y_5", ArcLabel::IsBefore));
        g.add_arc(Arc::new("Action:x_3", "Action:y_5", ArcLabel::IsDuring)).unwrap();
        // y may run first and eat b; o_4 is not surely produced yet.
        assert_eq!(
            availability_frontier(&g, At::Action("Action:x_3")).unwrap(),
            set(&["Food:a_1"])
        );
    }

    #[test]
    fn errors() {
        let mut g = chain();
        assert_eq!(
            availability_frontier(&g, At::Action("Action:zz_9")),
            Err(GraphError::UnknownVertex("Action:zz_9".into()))
        );
        assert_eq!(
            availability_frontier(&g, At::Action("Food:a_1")),
            Err(GraphError::NotAnAction("Food:a_1".into()))
        );
        g.add_arc(Arc::new("Action:y_5", "Action:x_3", ArcLabel::IsDuring)).unwrap();
        assert_eq!(availability_frontier(&g, At::End), Err(GraphError::CyclicTemporalOrder));
    }
}
