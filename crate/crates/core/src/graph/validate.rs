use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::{ArcLabel, FoodOrigin, RecipeGraph, VertexKind};
use crate::ontology::{Hierarchy, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// `V0`..`V6`.
    pub rule: &'static str,
    pub severity: Severity,
    pub message: String,
    /// Offending vertex ids, or `from -label-> to` for arcs.
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Connected components of the undirected graph without clause vertices.
    pub component_count: usize,
    pub action_count: usize,
    pub ingredient_count: usize,
    pub vertex_count: usize,
    /// Clause vertices no action points at.
    pub unlinked_clauses: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Structural checks:
///
/// * V0 – action/food concepts exist in the right hierarchy;
/// * V1 – an action whose schema needs an argument has an input;
/// * V2 – output count matches the schema;
/// * V3 – exactly one clause link per action;
/// * V4 – `isBefore ∪ isDuring` is acyclic;
/// * V5 – the graph minus clauses is connected;
/// * V6 (warning) – vertex_count ≥ 3a+i when every action has its own
///   clause and its own outputs.
pub fn validate(g: &RecipeGraph, ontology: &Ontology) -> ValidationReport {
    let mut report = ValidationReport {
        action_count: g.actions().count(),
        ingredient_count: g
            .foods()
            .filter(|f| f.origin == Some(FoodOrigin::IngredientList))
            .count(),
        vertex_count: g.vertex_count(),
        ..ValidationReport::default()
    };
    let mut push = |rule, severity, message: String, ids: Vec<String>| {
        report.violations.push(Violation {
            rule,
            severity,
            message,
            ids,
        })
    };

    // V0
    for v in g.vertices() {
        let bad = match (v.kind, &v.concept) {
            (VertexKind::Action, Some(c)) => !ontology.in_hierarchy(c, Hierarchy::Action),
            (VertexKind::Action, None) => true,
            (VertexKind::Food, Some(c)) => !ontology.in_hierarchy(c, Hierarchy::Food),
            _ => false,
        };
        if bad {
            push(
                "V0",
                Severity::Error,
                format!("{} has concept {:?} outside its hierarchy", v.id, v.concept),
                vec![v.id.clone()],
            );
        }
    }

    let mut clause_of: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut outputs_of: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for a in g.actions() {
        let clauses: Vec<&str> = g
            .outgoing(&a.id)
            .filter(|x| x.label == ArcLabel::IsRelatedToClause)
            .map(|x| x.to.as_str())
            .collect();
        let outputs = g.outputs(&a.id);
        let schema = a.concept.as_deref().and_then(|c| ontology.schema(c));
        if let Some(s) = schema {
            // V1
            if s.requires_input() && g.inputs(&a.id).next().is_none() {
                push(
                    "V1",
                    Severity::Error,
                    format!("{} has no input but its schema requires one", a.id),
                    vec![a.id.clone()],
                );
            }
            // V2
            if outputs.len() != s.output_count {
                push(
                    "V2",
                    Severity::Error,
                    format!("{} has {} outputs, expected {}", a.id, outputs.len(), s.output_count),
                    vec![a.id.clone()],
                );
            }
        }
        // V3
        if clauses.len() != 1 {
            push(
                "V3",
                Severity::Error,
                format!("{} is linked to {} clauses, expected 1", a.id, clauses.len()),
                vec![a.id.clone()],
            );
        }
        clause_of.insert(&a.id, clauses);
        outputs_of.insert(&a.id, outputs);
    }

    // V4
    let mut temporal: DiGraphMap<&str, ()> = DiGraphMap::new();
    for a in g.actions() {
        temporal.add_node(&a.id);
    }
    for arc in g.arcs().filter(|a| a.label.is_temporal()) {
        temporal.add_edge(&arc.from, &arc.to, ());
    }
    for scc in tarjan_scc(&temporal) {
        if scc.len() > 1 {
            let mut ids: Vec<String> = scc.iter().map(|s| s.to_string()).collect();
            ids.sort();
            push(
                "V4",
                Severity::Error,
                format!("temporal cycle through {}", ids.join(", ")),
                ids,
            );
        }
    }

    // V5
    let ids: Vec<&str> = g.vertices().filter(|v| !v.is_clause()).map(|v| v.id.as_str()).collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut uf = UnionFind::<usize>::new(ids.len());
    for arc in g.arcs() {
        if let (Some(&a), Some(&b)) = (index.get(arc.from.as_str()), index.get(arc.to.as_str())) {
            uf.union(a, b);
        }
    }
    let mut components: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        components.entry(uf.find(i)).or_default().push(id);
    }
    report.component_count = components.len();
    let linked: BTreeSet<&str> = g
        .arcs()
        .filter(|a| a.label == ArcLabel::IsRelatedToClause)
        .map(|a| a.to.as_str())
        .collect();
    report.unlinked_clauses = g
        .clauses()
        .filter(|c| !linked.contains(c.id.as_str()))
        .map(|c| c.id.clone())
        .collect();
    if components.len() > 1 {
        // The largest component is the main one; ties go to the smallest id.
        let main = components
            .values()
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b[0].cmp(a[0])))
            .map(|c| c[0])
            .unwrap_or_default();
        let mut stray: Vec<String> = components
            .values()
            .filter(|c| c[0] != main)
            .flatten()
            .map(|s| s.to_string())
            .collect();
        stray.sort();
        stray.extend(report.unlinked_clauses.iter().cloned());
        push(
            "V5",
            Severity::Error,
            format!(
                "graph has {} components; disconnected: {}",
                components.len(),
                stray.join(", ")
            ),
            stray,
        );
    }

    // V6
    let clause_vals: Vec<&str> = clause_of.values().flatten().copied().collect();
    let distinct_clauses: BTreeSet<&str> = clause_vals.iter().copied().collect();
    let own_clause = clause_of.values().all(|c| c.len() == 1) && distinct_clauses.len() == clause_vals.len();
    let own_outputs = outputs_of.values().all(|o| !o.is_empty())
        && outputs_of
            .values()
            .flatten()
            .all(|f| g.producers(f).len() == 1);
    let (a, i) = (report.action_count, report.ingredient_count);
    if own_clause && own_outputs && report.vertex_count < 3 * a + i {
        push(
            "V6",
            Severity::Warning,
            format!("{} vertices, expected at least 3a+i = {}", report.vertex_count, 3 * a + i),
            Vec::new(),
        );
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Arc, Vertex};
    use crate::testutil::sample_ontology;

    #[test]
    fn empty_graph_clean() {
        let r = validate(&RecipeGraph::new("e"), &sample_ontology());
        assert!(r.is_clean());
        assert_eq!(
            (r.component_count, r.action_count, r.ingredient_count, r.vertex_count),
            (0, 0, 0, 0)
        );
    }

    fn one_action() -> RecipeGraph {
        let mut g = RecipeGraph::new("r");
        g.add_vertex(Vertex::food("Food:mango_1".into(), Some("Mango".into()), FoodOrigin::IngredientList))
            .unwrap();
        g.add_vertex(Vertex::clause(1, (0, 5))).unwrap();
        g.add_vertex(Vertex::action("Action:peel_2".into(), "Peel".into())).unwrap();
        g.add_vertex(Vertex::food("Food:peel_out_3".into(), Some("Mango".into()), FoodOrigin::ActionOutput))
            .unwrap();
        g.add_arc(Arc::new("Action:peel_2", "Food:mango_1", ArcLabel::HasDOInput)).unwrap();
        g.add_arc(Arc::new("Action:peel_2", "Food:peel_out_3", ArcLabel::HasOutput)).unwrap();
        g.add_arc(Arc::new("Action:peel_2", "Clause:c_1", ArcLabel::IsRelatedToClause)).unwrap();
        g
    }

    #[test]
    fn clean_single_action() {
        let r = validate(&one_action(), &sample_ontology());
        assert!(r.is_clean(), "{:?}", r.violations);
        assert_eq!(r.component_count, 1);
        assert_eq!(r.vertex_count, 4);
    }

    #[test]
    fn each_rule_fires() {
        let o = sample_ontology();
        let mut g = one_action();
        g.remove_arc(&Arc::new("Action:peel_2", "Food:mango_1", ArcLabel::HasDOInput));
        g.remove_arc(&Arc::new("Action:peel_2", "Clause:c_1", ArcLabel::IsRelatedToClause));
        g.add_vertex(Vertex::action("Action:mix_4".into(), "Mango".into())).unwrap();
        g.add_arc(Arc::new("Action:peel_2", "Action:mix_4", ArcLabel::IsBefore)).unwrap();
        g.add_arc(Arc::new("Action:mix_4", "Action:peel_2", ArcLabel::IsDuring)).unwrap();
        let r = validate(&g, &o);
        for rule in ["V0", "V1", "V3", "V4", "V5"] {
            assert!(r.has_rule(rule), "{rule} missing in {:?}", r.violations);
        }
        assert_eq!(r.unlinked_clauses, ["Clause:c_1"]);
        let v5 = r.violations.iter().find(|v| v.rule == "V5").unwrap();
        assert!(v5.ids.contains(&"Food:mango_1".to_string()));
        assert!(v5.ids.contains(&"Clause:c_1".to_string()));
    }

    #[test]
    fn output_count_checked() {
        let mut g = one_action();
        g.remove_arc(&Arc::new("Action:peel_2", "Food:peel_out_3", ArcLabel::HasOutput));
        assert!(validate(&g, &sample_ontology()).has_rule("V2"));
    }
}
