//! Ingredient substitution by pruning the branch that prepares one
//! ingredient and grafting in the branch that prepares its replacement in
//! another recipe. The preparation text is spliced to match.

mod text;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotator::output_concept;
use crate::graph::{
    clause_vertex_index, serialize, Arc, ArcLabel, FoodOrigin, GraphDoc, GraphError, RecipeGraph, Vertex,
};
use crate::ontology::{ConceptId, Ontology};
use crate::recipe::Recipe;
use crate::textproc::tokenize;

pub use text::{apply_text_patches, TextPatch};

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("no ingredient of `{recipe}` is a kind of {concept}")]
    ConceptAbsent { recipe: String, concept: ConceptId },
    #[error("{concept} never merges with another ingredient in `{recipe}`: nothing to cut")]
    NothingToCut { recipe: String, concept: ConceptId },
    #[error("unknown food concept {0}")]
    UnknownConcept(ConceptId),
    #[error("graph of `{graph}` does not belong to recipe `{recipe}`")]
    RecipeMismatch { recipe: String, graph: String },
    #[error("patches {first:?} and {second:?} overlap")]
    OverlappingPatches { first: (usize, usize), second: (usize, usize) },
    #[error("patch {start}..{end} lies outside the text")]
    PatchOutOfRange { start: usize, end: usize },
    #[error("clause {0} has no text span")]
    MissingSpan(String),
    #[error("clause text of {0} not found in the adapted text")]
    LostClause(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationRequest {
    pub alpha: ConceptId,
    pub beta: ConceptId,
    pub donor_recipe_id: String,
}

/// The part of a graph that only prepares one ingredient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub concept: ConceptId,
    /// Ingredient-list foods of the concept.
    pub roots: Vec<String>,
    pub actions: BTreeSet<String>,
    /// Roots plus every output of a branch action.
    pub foods: BTreeSet<String>,
    pub clauses: BTreeSet<String>,
    /// Input arcs from a branch food into an action outside the branch,
    /// first in text order.
    pub exits: Vec<Arc>,
    pub cut_arc: Arc,
}

impl Branch {
    pub fn vertices(&self) -> BTreeSet<String> {
        self.actions
            .iter()
            .chain(&self.foods)
            .chain(&self.clauses)
            .cloned()
            .collect()
    }

    /// The food that leaves the branch at the cut.
    pub fn final_food(&self) -> &str {
        &self.cut_arc.to
    }
}

/// Largest sub-graph grown from the concept's ingredient foods in which
/// every action has all of its inputs inside the sub-graph.
pub fn extract_branch(g: &RecipeGraph, concept: &str, ontology: &Ontology) -> Result<Branch, AdaptError> {
    if ontology.concept(concept).is_none() {
        return Err(AdaptError::UnknownConcept(concept.to_string()));
    }
    let roots: Vec<String> = g
        .foods()
        .filter(|f| f.origin == Some(FoodOrigin::IngredientList))
        .filter(|f| f.concept.as_deref().is_some_and(|c| ontology.subsumes(concept, c)))
        .map(|f| f.id.clone())
        .collect();
    if roots.is_empty() {
        return Err(AdaptError::ConceptAbsent {
            recipe: g.recipe_id.clone(),
            concept: concept.to_string(),
        });
    }

    let mut foods: BTreeSet<String> = roots.iter().cloned().collect();
    let mut actions = BTreeSet::new();
    loop {
        let grown: Vec<String> = g
            .actions()
            .filter(|a| !actions.contains(&a.id))
            .filter(|a| {
                let mut inputs = g.inputs(&a.id).peekable();
                inputs.peek().is_some() && inputs.all(|arc| foods.contains(&arc.to))
            })
            .map(|a| a.id.clone())
            .collect();
        if grown.is_empty() {
            break;
        }
        for a in grown {
            foods.extend(g.outputs(&a).into_iter().map(str::to_string));
            actions.insert(a);
        }
    }

    let clauses = actions
        .iter()
        .filter_map(|a| g.clause_of(a).map(str::to_string))
        .collect();
    let mut exits: Vec<Arc> = g
        .arcs()
        .filter(|a| a.label.is_input() && foods.contains(&a.to) && !actions.contains(&a.from))
        .cloned()
        .collect();
    exits.sort_by_key(|a| (g.position(&a.from), g.vertex(&a.from).map(Vertex::serial), a.clone()));
    let Some(cut_arc) = exits.first().cloned() else {
        return Err(AdaptError::NothingToCut {
            recipe: g.recipe_id.clone(),
            concept: concept.to_string(),
        });
    };
    Ok(Branch {
        concept: concept.to_string(),
        roots,
        actions,
        foods,
        clauses,
        exits,
        cut_arc,
    })
}

#[derive(Debug, Clone)]
pub struct Adaptation {
    pub graph: RecipeGraph,
    /// The adapted recipe: new preparation text and ingredient list.
    pub recipe: Recipe,
    pub patches: Vec<TextPatch>,
    /// Things the adaptation could not carry over faithfully.
    pub flags: Vec<String>,
    pub removed: Branch,
    pub inserted: Branch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptationDoc {
    pub graph: GraphDoc,
    pub text: String,
    pub patches: Vec<TextPatch>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<Recipe>,
}

impl Adaptation {
    pub fn to_doc(&self) -> AdaptationDoc {
        AdaptationDoc {
            graph: serialize(&self.graph),
            text: self.recipe.preparation.clone(),
            patches: self.patches.clone(),
            flags: self.flags.clone(),
            recipe: Some(self.recipe.clone()),
        }
    }
}

/// Replace `request.alpha` by `request.beta` in `recipe`, taking the
/// preparation of β from `donor`.
pub fn adapt(
    recipe: &Recipe,
    g: &RecipeGraph,
    request: &AdaptationRequest,
    donor: &Recipe,
    donor_graph: &RecipeGraph,
    ontology: &Ontology,
) -> Result<Adaptation, AdaptError> {
    if donor.id != request.donor_recipe_id {
        return Err(AdaptError::RecipeMismatch {
            recipe: request.donor_recipe_id.clone(),
            graph: donor.id.clone(),
        });
    }
    let removed = extract_branch(g, &request.alpha, ontology)?;
    let inserted = extract_branch(donor_graph, &request.beta, ontology)?;
    graft(recipe, g, &removed, donor, donor_graph, &inserted, ontology)
}

/// Prune `removed` from `g` and graft `inserted` (a branch of
/// `donor_graph`) in its place.
pub fn graft(
    recipe: &Recipe,
    g: &RecipeGraph,
    removed: &Branch,
    donor: &Recipe,
    donor_graph: &RecipeGraph,
    inserted: &Branch,
    ontology: &Ontology,
) -> Result<Adaptation, AdaptError> {
    for (r, gr) in [(recipe, g), (donor, donor_graph)] {
        if r.id != gr.recipe_id {
            return Err(AdaptError::RecipeMismatch {
                recipe: r.id.clone(),
                graph: gr.recipe_id.clone(),
            });
        }
    }
    let mut flags = Vec::new();
    let mut h = g.clone();

    // Temporal neighbourhood of the pruned block.
    let (mut before, mut after) = (BTreeSet::new(), BTreeSet::new());
    if removed.actions.is_empty() {
        let cut = &removed.cut_arc.from;
        before.extend(
            g.incoming(cut)
                .filter(|a| a.label == ArcLabel::IsBefore)
                .map(|a| a.from.clone()),
        );
        after.insert(cut.clone());
    }
    for arc in g.arcs().filter(|a| a.label.is_temporal()) {
        let (inside_from, inside_to) = (removed.actions.contains(&arc.from), removed.actions.contains(&arc.to));
        if inside_from == inside_to {
            continue;
        }
        if arc.label == ArcLabel::IsDuring {
            flags.push(format!("dropped {} {} {}", arc.from, arc.label, arc.to));
        } else if inside_to {
            before.insert(arc.from.clone());
        } else {
            after.insert(arc.to.clone());
        }
    }

    for id in removed.vertices() {
        h.remove_vertex(&id);
    }

    // Import the donor branch under fresh ids.
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut next_clause = g.clauses().filter_map(|c| clause_vertex_index(&c.id)).max().unwrap_or(0) + 1;
    let mut donor_ids: Vec<&String> = inserted.foods.iter().chain(&inserted.actions).collect();
    donor_ids.sort_by_key(|id| donor_graph.vertex(id).map(Vertex::serial));
    for id in donor_ids {
        let v = donor_graph.vertex(id).ok_or_else(|| GraphError::UnknownVertex(id.clone()))?;
        let new_id = h.fresh_id(v.kind, v.lexeme());
        map.insert(id.clone(), new_id);
    }
    let mut donor_clauses: Vec<&Vertex> = inserted
        .clauses
        .iter()
        .filter_map(|c| donor_graph.vertex(c))
        .collect();
    donor_clauses.sort_by_key(|c| c.text_span);
    for c in &donor_clauses {
        map.insert(c.id.clone(), format!("Clause:c_{next_clause}"));
        next_clause += 1;
    }
    for (old, new) in &map {
        let mut v = donor_graph.vertex(old).cloned().expect("mapped vertex exists");
        v.id = new.clone();
        v.anchor = v.anchor.as_ref().and_then(|a| map.get(a).cloned());
        h.add_vertex(v)?;
    }
    for arc in donor_graph.arcs() {
        let (Some(from), Some(to)) = (map.get(&arc.from), map.get(&arc.to)) else {
            if arc.label == ArcLabel::IsDuring
                && (inserted.actions.contains(&arc.from) || inserted.actions.contains(&arc.to))
            {
                flags.push(format!("not carried over: {} {} {}", arc.from, arc.label, arc.to));
            }
            continue;
        };
        let new = Arc::new(from.clone(), to.clone(), arc.label);
        if donor_graph.is_user_arc(arc) {
            h.add_user_arc(new)?;
        } else {
            h.add_arc(new)?;
        }
    }

    // Wire the donor's final food into every slot the pruned branch fed.
    let final_food = map[inserted.final_food()].clone();
    for exit in &removed.exits {
        h.add_arc(Arc::new(exit.from.clone(), final_food.clone(), exit.label))?;
    }

    // Re-stitch the temporal order around the grafted block.
    let new_actions: BTreeSet<&String> = inserted.actions.iter().map(|a| &map[a]).collect();
    if new_actions.is_empty() {
        if !removed.actions.is_empty() {
            for p in &before {
                for s in &after {
                    h.add_arc(Arc::new(p.clone(), s.clone(), ArcLabel::IsBefore))?;
                }
            }
        }
    } else {
        let internal_before = |a: &String, incoming: bool| {
            h.arcs().any(|arc| {
                arc.label == ArcLabel::IsBefore
                    && new_actions.contains(if incoming { &arc.from } else { &arc.to })
                    && &(if incoming { &arc.to } else { &arc.from }) == &a
            })
        };
        let firsts: Vec<String> = new_actions.iter().filter(|a| !internal_before(a, true)).map(|a| (*a).clone()).collect();
        let lasts: Vec<String> = new_actions.iter().filter(|a| !internal_before(a, false)).map(|a| (*a).clone()).collect();
        if removed.actions.is_empty() {
            for p in &before {
                h.remove_arc(&Arc::new(p.clone(), removed.cut_arc.from.clone(), ArcLabel::IsBefore));
            }
        }
        for p in &before {
            for f in &firsts {
                h.add_arc(Arc::new(p.clone(), f.clone(), ArcLabel::IsBefore))?;
            }
        }
        for l in &lasts {
            for s in &after {
                h.add_arc(Arc::new(l.clone(), s.clone(), ArcLabel::IsBefore))?;
            }
        }
    }

    relabel_downstream(&mut h, &removed.concept, ontology);

    // Text.
    let donor_texts: Vec<String> = donor_clauses
        .iter()
        .map(|c| span_text(&donor.preparation, c))
        .collect::<Result<_, _>>()?;
    let patches = text_patches(recipe, g, removed, &donor_texts)?;
    let new_text = apply_text_patches(&recipe.preparation, &patches)?;
    if removed.clauses.is_empty() {
        flags.push(format!(
            "text of {} still names the removed ingredient",
            g.clause_of(&removed.cut_arc.from).unwrap_or(&removed.cut_arc.from)
        ));
    }

    // Renumber clauses in their new text order and relocate their spans.
    let insert_at = patches.first().map(|p| p.start).unwrap_or(recipe.preparation.len());
    let mut kept: Vec<(usize, String, String)> = Vec::new();
    for c in g.clauses().filter(|c| !removed.clauses.contains(&c.id)) {
        kept.push((c.text_span.ok_or_else(|| AdaptError::MissingSpan(c.id.clone()))?.0, c.id.clone(), span_text(&recipe.preparation, c)?));
    }
    kept.sort();
    let mut order: Vec<(String, String)> = Vec::new();
    let (head, tail): (Vec<_>, Vec<_>) = kept.into_iter().partition(|(s, _, _)| *s < insert_at);
    order.extend(head.into_iter().map(|(_, id, t)| (id, t)));
    order.extend(donor_clauses.iter().zip(donor_texts).map(|(c, t)| (map[&c.id].clone(), t)));
    order.extend(tail.into_iter().map(|(_, id, t)| (id, t)));

    let lower = new_text.to_ascii_lowercase();
    let mut from = 0;
    let mut spans = Vec::new();
    for (id, t) in &order {
        let at = lower[from..]
            .find(&t.to_ascii_lowercase())
            .ok_or_else(|| AdaptError::LostClause(id.clone()))?
            + from;
        spans.push((at, at + t.len()));
        from = at + t.len();
    }
    let renumber: BTreeMap<String, String> = order
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (id.clone(), format!("Clause:c_{}", i + 1)))
        .collect();
    h.rename_vertices(&renumber);
    let ids: Vec<String> = h.vertices().map(|v| v.id.clone()).collect();
    for id in ids {
        let v = h.vertex_mut(&id).expect("listed vertex");
        if let Some(a) = v.anchor.as_ref() {
            // Anchors into pruned clauses fall back to the start of the text.
            v.anchor = renumber.get(a).cloned();
        }
    }
    for ((id, _), span) in order.iter().zip(spans) {
        if let Some(v) = h.vertex_mut(&renumber[id]) {
            v.text_span = Some(span);
        }
    }

    let mut adapted = recipe.clone();
    adapted.preparation = new_text;
    swap_ingredients(&mut adapted, &removed.concept, donor, &inserted.concept, ontology);

    Ok(Adaptation {
        graph: h,
        recipe: adapted,
        patches,
        flags,
        removed: removed.clone(),
        inserted: inserted.clone(),
    })
}

fn span_text(text: &str, clause: &Vertex) -> Result<String, AdaptError> {
    let (s, e) = clause
        .text_span
        .ok_or_else(|| AdaptError::MissingSpan(clause.id.clone()))?;
    text.get(s..e)
        .map(str::to_string)
        .ok_or_else(|| AdaptError::MissingSpan(clause.id.clone()))
}

/// Outputs still typed as the removed ingredient take the concept of their
/// new principal input.
fn relabel_downstream(h: &mut RecipeGraph, alpha: &str, ontology: &Ontology) {
    let limit = h.vertex_count();
    for _ in 0..limit {
        let mut changed = false;
        let stale: Vec<(String, String)> = h
            .foods()
            .filter(|f| f.origin == Some(FoodOrigin::ActionOutput))
            .filter(|f| f.concept.as_deref().is_some_and(|c| ontology.subsumes(alpha, c)))
            .filter_map(|f| h.producers(&f.id).first().map(|p| (f.id.clone(), p.to_string())))
            .collect();
        for (food, producer) in stale {
            let concept = output_concept(h, &producer).filter(|c| !ontology.subsumes(alpha, c));
            let v = h.vertex_mut(&food).expect("listed food");
            if v.concept != concept {
                v.concept = concept;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// The first ingredient line of α becomes the donor's β line(s); further α
/// lines are dropped.
fn swap_ingredients(recipe: &mut Recipe, alpha: &str, donor: &Recipe, beta: &str, ontology: &Ontology) {
    let replacement: Vec<_> = donor
        .ingredients
        .iter()
        .filter(|i| ontology.subsumes(beta, &i.concept))
        .cloned()
        .collect();
    let mut out = Vec::new();
    let mut done = false;
    for i in recipe.ingredients.drain(..) {
        if ontology.subsumes(alpha, &i.concept) {
            if !done {
                out.extend(replacement.iter().cloned());
                done = true;
            }
        } else {
            out.push(i);
        }
    }
    recipe.ingredients = out;
}

#[derive(Debug, Clone, Copy)]
struct Sentence {
    start: usize,
    end: usize,
}

fn sentences(text: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut start = None;
    let mut last_end = 0;
    for t in tokenize(text) {
        start.get_or_insert(t.start);
        last_end = t.end;
        if matches!(t.surface.as_str(), "." | "!" | "?") {
            out.push(Sentence {
                start: start.take().expect("set above"),
                end: t.end,
            });
        }
    }
    if let Some(s) = start {
        out.push(Sentence { start: s, end: last_end });
    }
    out
}

fn as_sentence(clauses: &[String]) -> String {
    let joined = clauses.join(", ");
    let mut chars = joined.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).chain(std::iter::once('.')).collect(),
        None => String::new(),
    }
}

/// Delete the pruned clauses (whole sentences where every clause goes) and
/// insert the donor clause texts at the first deleted position.
fn text_patches(
    recipe: &Recipe,
    g: &RecipeGraph,
    removed: &Branch,
    donor_texts: &[String],
) -> Result<Vec<TextPatch>, AdaptError> {
    let text = &recipe.preparation;
    let sents = sentences(text);
    let sentence_of = |pos: usize| sents.iter().position(|s| pos >= s.start && pos < s.end.max(s.start + 1));

    let mut spans: Vec<(usize, usize, bool)> = Vec::new();
    for c in g.clauses() {
        let (s, e) = c.text_span.ok_or_else(|| AdaptError::MissingSpan(c.id.clone()))?;
        spans.push((s, e, removed.clauses.contains(&c.id)));
    }
    spans.sort();

    if removed.clauses.is_empty() {
        if donor_texts.is_empty() {
            return Ok(Vec::new());
        }
        let cut_clause = g.clause_of(&removed.cut_arc.from).and_then(|c| g.vertex(c));
        let at = cut_clause
            .and_then(|c| c.text_span)
            .and_then(|(s, _)| sentence_of(s))
            .map(|i| sents[i].start)
            .unwrap_or(0);
        return Ok(vec![TextPatch {
            start: at,
            end: at,
            replacement: format!("{} ", as_sentence(donor_texts)),
        }]);
    }

    // Group clauses per sentence.
    let mut per_sentence: BTreeMap<usize, Vec<(usize, usize, bool)>> = BTreeMap::new();
    for &(s, e, gone) in &spans {
        let i = sentence_of(s).unwrap_or(usize::MAX);
        per_sentence.entry(i).or_default().push((s, e, gone));
    }
    let whole: BTreeSet<usize> = per_sentence
        .iter()
        .filter(|(i, cs)| **i != usize::MAX && cs.iter().all(|c| c.2))
        .map(|(i, _)| *i)
        .collect();

    // (start, end, replaceable_start, replaceable_end, whole)
    let mut units: Vec<(usize, usize, usize, usize, bool)> = Vec::new();
    let whole_list: Vec<usize> = whole.iter().copied().collect();
    let mut k = 0;
    while k < whole_list.len() {
        let a = whole_list[k];
        let mut b = a;
        while k + 1 < whole_list.len() && whole_list[k + 1] == b + 1 {
            k += 1;
            b += 1;
        }
        k += 1;
        let (s, e) = if b + 1 < sents.len() {
            (sents[a].start, sents[b + 1].start)
        } else if a > 0 {
            (sents[a - 1].end, sents[b].end)
        } else {
            (sents[a].start, text.len())
        };
        units.push((s, e, sents[a].start, sents[b].end, true));
    }
    for (i, cs) in &per_sentence {
        if whole.contains(i) {
            continue;
        }
        let mut j = 0;
        while j < cs.len() {
            if !cs[j].2 {
                j += 1;
                continue;
            }
            let first = j;
            while j + 1 < cs.len() && cs[j + 1].2 {
                j += 1;
            }
            let last = j;
            j += 1;
            let (s, e) = if first == 0 {
                (cs[first].0, cs.get(last + 1).map(|c| c.0).unwrap_or(cs[last].1))
            } else {
                (cs[first - 1].1, cs[last].1)
            };
            units.push((s, e, cs[first].0, cs[last].1, false));
        }
    }
    units.sort();

    let mut patches: Vec<TextPatch> = units
        .iter()
        .map(|&(s, e, _, _, _)| TextPatch::delete(s, e))
        .collect();
    if !donor_texts.is_empty() {
        let (_, _, rs, re, whole) = units[0];
        patches[0] = TextPatch {
            start: rs,
            end: re,
            replacement: if whole {
                as_sentence(donor_texts)
            } else {
                donor_texts.join(", ")
            },
        };
    }
    Ok(patches)
}
