//! Automatic case acquisition: recipe text → recipe graph.
//!
//! Clauses are processed in text order. Each clause whose verb phrase names
//! an action concept yields an action vertex, its clause link, temporal
//! arcs, inputs resolved from the noun phrases (or by anaphora when a
//! required slot is empty) and fresh output foods. A verb the ontology does
//! not know yields nothing: its clause stays unlinked.

mod resolve;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{
    availability_frontier, clause_vertex_id, lexeme_of, parse_vertex_id, Arc, ArcLabel, At, FoodOrigin,
    GraphError, RecipeGraph, Vertex, VertexKind,
};
use crate::ontology::{ActionSchema, ConceptId, Hierarchy, Ontology};
use crate::recipe::{Recipe, RecipeError};
use crate::textproc::{analyze, Analysis, ChunkKind, Clause, Tag, TemporalMarker};

pub use resolve::{provenance, resolve_target_set, weighted_jaccard, Candidate, ResolveError};
pub(crate) use resolve::{concept_matches, find_food_mention};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotateError {
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error("action concept `{0}` has no schema")]
    MissingSchema(ConceptId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Build the graph of a recipe. The result has version 1.
pub fn annotate(recipe: &Recipe, ontology: &Ontology) -> Result<RecipeGraph, AnnotateError> {
    recipe.check(ontology)?;
    let analysis = analyze(&recipe.preparation, ontology);
    let mut g = RecipeGraph::new(recipe.id.clone());
    g.version = 1;
    let engine = Engine::new(ontology, recipe, &analysis, BTreeMap::new());
    engine.seed(&mut g)?;
    engine.run(&mut g, 1)?;
    Ok(g)
}

/// Argument slot of an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    DirectObject,
    Complement,
}

impl Slot {
    pub fn label(self) -> ArcLabel {
        match self {
            Slot::DirectObject => ArcLabel::HasDOInput,
            Slot::Complement => ArcLabel::HasPCInput,
        }
    }
}

/// What the annotator knows while walking the clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationState {
    /// Most recent action in text order.
    pub last_action: Option<String>,
    /// Actions of the current simultaneous group.
    group: Vec<String>,
    /// Actions of the group before it.
    group_before: Vec<String>,
    /// The last action came from a sentence-initial WHILE clause, so the
    /// next one runs during it.
    pending_while: bool,
    /// Unresolved-mention counters per (clause, lexeme).
    unresolved_seen: BTreeMap<(String, String), usize>,
}

/// Missing-argument rule: the available outputs of the last action; failing
/// that, the only available food; otherwise nothing.
pub fn resolve_anaphora(
    g: &RecipeGraph,
    state: &AnnotationState,
    frontier: &BTreeSet<String>,
    exclude: &BTreeSet<String>,
) -> Vec<String> {
    if let Some(last) = &state.last_action {
        let outs: Vec<String> = g
            .outputs(last)
            .into_iter()
            .filter(|o| frontier.contains(*o) && !exclude.contains(*o))
            .map(str::to_string)
            .collect();
        if !outs.is_empty() {
            return outs;
        }
    }
    let rest: Vec<&String> = frontier.iter().filter(|f| !exclude.contains(*f)).collect();
    match rest.as_slice() {
        [only] => vec![(*only).clone()],
        _ => Vec::new(),
    }
}

/// Outcome of resolving one noun phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reference {
    Foods(Vec<String>),
    /// A food word with nothing available to point at: (lexeme, concept).
    Unresolved(String, Option<ConceptId>),
    /// Not about food at all ("the pits", "12 minutes").
    NotFood,
}

/// Resolve the words of a noun phrase against the graph as seen from
/// `action`: direct or category match walked forward to available foods,
/// then target-set association on the head word.
pub fn resolve_food_reference(
    words: &[&str],
    head: &str,
    g: &RecipeGraph,
    action: &str,
    frontier: &BTreeSet<String>,
    exclude: &BTreeSet<String>,
    ontology: &Ontology,
) -> Reference {
    if let Some((concept, start, len)) = find_food_mention(words, ontology) {
        let starts: Vec<&str> = g
            .foods()
            .filter(|f| f.concept.as_deref().is_some_and(|c| concept_matches(ontology, &concept, c)))
            .map(|f| f.id.as_str())
            .collect();
        let mut found = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for s in starts {
            walk_to_frontier(g, s, action, frontier, &mut seen, &mut found);
        }
        found.retain(|f| !exclude.contains(f));
        if found.is_empty() {
            return Reference::Unresolved(lexeme_of(&words[start..start + len].join(" ")), Some(concept));
        }
        return Reference::Foods(order_by_serial(g, found));
    }
    if ontology.target_set(head).is_some() {
        let candidates: Vec<Candidate> = frontier
            .iter()
            .filter(|f| !exclude.contains(*f))
            .filter_map(|f| g.vertex(f))
            .map(|v| Candidate {
                id: v.id.clone(),
                serial: v.serial(),
                provenance: provenance(g, &v.id),
            })
            .collect();
        return match resolve_target_set(head, &candidates, ontology) {
            Ok(Some((id, _))) => Reference::Foods(vec![id]),
            _ => Reference::Unresolved(lexeme_of(head), None),
        };
    }
    Reference::NotFood
}

/// Follow a food through the actions consuming it until reaching foods
/// available to `action`.
fn walk_to_frontier(
    g: &RecipeGraph,
    food: &str,
    action: &str,
    frontier: &BTreeSet<String>,
    seen: &mut BTreeSet<String>,
    found: &mut BTreeSet<String>,
) {
    if !seen.insert(food.to_string()) {
        return;
    }
    if frontier.contains(food) {
        found.insert(food.to_string());
        return;
    }
    for c in g.consumers(food) {
        if c == action {
            continue;
        }
        for o in g.outputs(c) {
            walk_to_frontier(g, o, action, frontier, seen, found);
        }
    }
}

fn order_by_serial(g: &RecipeGraph, ids: BTreeSet<String>) -> Vec<String> {
    let mut v: Vec<String> = ids.into_iter().collect();
    v.sort_by_key(|id| (g.vertex(id).map(Vertex::serial), id.clone()));
    v
}

// ---- structural keys ----
//
// Auto-generated vertices are identified by where they come from, so that a
// re-run can hand back the same ids and so that user removals can be
// remembered:  I|<ingredient index>, A|<clause>, O|<clause>|<k>,
// U|<clause>|<lexeme>|<k>.

/// Structural key of every auto-generated vertex, by id.
pub(crate) fn vertex_keys(g: &RecipeGraph) -> BTreeMap<String, String> {
    let mut keys = BTreeMap::new();
    let mut ingredients: Vec<&Vertex> = g
        .foods()
        .filter(|f| f.origin == Some(FoodOrigin::IngredientList) && !f.user)
        .collect();
    ingredients.sort_by_key(|v| v.serial());
    for (i, v) in ingredients.iter().enumerate() {
        keys.insert(v.id.clone(), format!("I|{i}"));
    }
    for a in g.actions().filter(|a| !a.user) {
        if let Some(c) = g.clause_of(&a.id).or(a.anchor.as_deref()) {
            let c = c.strip_prefix("Clause:").unwrap_or(c);
            keys.insert(a.id.clone(), format!("A|{c}"));
        }
    }
    for a in g.actions() {
        let clause = g.clause_of(&a.id).or(a.anchor.as_deref()).map(|c| c.strip_prefix("Clause:").unwrap_or(c));
        let Some(clause) = clause else { continue };
        for (k, o) in g.outputs(&a.id).into_iter().enumerate() {
            if g.vertex(o).is_some_and(|v| !v.user && v.origin == Some(FoodOrigin::ActionOutput)) {
                keys.insert(o.to_string(), format!("O|{clause}|{k}"));
            }
        }
    }
    let mut unresolved: Vec<&Vertex> = g
        .foods()
        .filter(|f| f.origin == Some(FoodOrigin::Unresolved) && !f.user)
        .collect();
    unresolved.sort_by_key(|v| v.serial());
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    for v in unresolved {
        let Some(anchor) = v.anchor.as_deref() else { continue };
        let lex = v.lexeme().to_string();
        let n = seen.entry((anchor.to_string(), lex.clone())).or_default();
        keys.insert(v.id.clone(), format!("U|{anchor}|{lex}|{n}"));
        *n += 1;
    }
    keys
}

fn default_schema(concept: &str) -> ActionSchema {
    ActionSchema {
        concept: concept.to_string(),
        requires_direct_object: false,
        requires_prepositional_complement: false,
        allowed_prepositions: Vec::new(),
        output_count: 1,
    }
}

/// A noun phrase in argument position: token range and head token.
#[derive(Debug, Clone, Copy)]
struct NpRef {
    start: usize,
    end: usize,
    head: usize,
}

pub(crate) struct Engine<'a> {
    ontology: &'a Ontology,
    recipe: &'a Recipe,
    analysis: &'a Analysis,
    /// Structural key → id to reuse.
    hints: BTreeMap<String, String>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(
        ontology: &'a Ontology,
        recipe: &'a Recipe,
        analysis: &'a Analysis,
        hints: BTreeMap<String, String>,
    ) -> Engine<'a> {
        Engine {
            ontology,
            recipe,
            analysis,
            hints,
        }
    }

    fn alloc(&self, g: &mut RecipeGraph, key: &str, kind: VertexKind, lexeme: &str) -> String {
        if let Some(id) = self.hints.get(key) {
            let fits = parse_vertex_id(id).is_some_and(|p| p.kind == kind && p.lexeme == lexeme_of(lexeme));
            if fits && !g.contains(id) {
                return id.clone();
            }
        }
        g.fresh_id(kind, lexeme)
    }

    fn auto_arc(&self, g: &mut RecipeGraph, arc: Arc) -> Result<(), GraphError> {
        if !g.suppressed.arcs.contains(&arc) {
            g.add_arc(arc)?;
        }
        Ok(())
    }

    /// Ingredient foods and clause vertices.
    pub(crate) fn seed(&self, g: &mut RecipeGraph) -> Result<(), GraphError> {
        for (i, ing) in self.recipe.ingredients.iter().enumerate() {
            let key = format!("I|{i}");
            if g.suppressed.vertices.contains(&key) {
                continue;
            }
            let id = self.alloc(g, &key, VertexKind::Food, &snake_case(&ing.concept));
            g.add_vertex(Vertex::food(id, Some(ing.concept.clone()), FoodOrigin::IngredientList))?;
        }
        for c in &self.analysis.clauses {
            g.add_vertex(Vertex::clause(c.index, (c.char_start, c.char_end)))?;
        }
        Ok(())
    }

    /// Annotate clauses with index ≥ `from`, continuing from the state the
    /// graph implies for the earlier clauses.
    pub(crate) fn run(&self, g: &mut RecipeGraph, from: usize) -> Result<(), AnnotateError> {
        let mut state = self.reconstruct(g, from);
        for clause in self.analysis.clauses.iter().filter(|c| c.index >= from) {
            self.clause(g, &mut state, clause)?;
        }
        Ok(())
    }

    pub(crate) fn reconstruct(&self, g: &RecipeGraph, from: usize) -> AnnotationState {
        let mut state = AnnotationState::default();
        let earlier: Vec<&Vertex> = g
            .actions_in_text_order()
            .into_iter()
            .filter(|a| g.position(&a.id) < from)
            .collect();
        let Some(last) = earlier.last() else {
            return state;
        };
        let earlier_ids: BTreeSet<&str> = earlier.iter().map(|a| a.id.as_str()).collect();
        // Simultaneous group of the last action: isDuring-connected actions.
        let mut group = BTreeSet::from([last.id.clone()]);
        let mut stack = vec![last.id.clone()];
        while let Some(x) = stack.pop() {
            for arc in g.arcs().filter(|a| a.label == ArcLabel::IsDuring) {
                let other = if arc.from == x {
                    &arc.to
                } else if arc.to == x {
                    &arc.from
                } else {
                    continue;
                };
                if earlier_ids.contains(other.as_str()) && group.insert(other.clone()) {
                    stack.push(other.clone());
                }
            }
        }
        state.group_before = g
            .incoming(&last.id)
            .filter(|a| a.label == ArcLabel::IsBefore)
            .map(|a| a.from.clone())
            .collect();
        state.group = order_by_serial(g, group);
        state.pending_while = self
            .analysis
            .clauses
            .get(g.position(&last.id).wrapping_sub(1))
            .is_some_and(|c| c.temporal_marker == TemporalMarker::While && c.sentence_initial);
        state.last_action = Some(last.id.clone());
        state
    }

    fn clause(&self, g: &mut RecipeGraph, state: &mut AnnotationState, cl: &Clause) -> Result<(), AnnotateError> {
        let tagged = &self.analysis.tagged;

        // A user-made action positioned here takes the place of the verb.
        let adopted = g
            .actions()
            .filter(|a| a.user && g.position(&a.id) == cl.index)
            .min_by_key(|a| a.serial())
            .map(|a| a.id.clone());
        if let Some(a) = adopted {
            return self.complete_action(g, state, &a, cl);
        }
        let Some(vp) = cl.verb_phrase() else {
            return Ok(());
        };
        let words: Vec<&str> = tagged[vp.start..cl.token_end]
            .iter()
            .map(|t| t.token.lower.as_str())
            .collect();
        let Some((concept, _)) = self.ontology.lexical_lookup(&words, Hierarchy::Action).into_iter().next() else {
            return Ok(());
        };
        let key = format!("A|{}", cl.id);
        if g.suppressed.vertices.contains(&key) {
            return Ok(());
        }
        if self.ontology.schema(&concept).is_none() {
            return Err(AnnotateError::MissingSchema(concept));
        }
        let lexeme = tagged[vp.head].token.lower.clone();
        let id = self.alloc(g, &key, VertexKind::Action, &lexeme);
        g.add_vertex(Vertex::action(id.clone(), concept))?;
        self.auto_arc(g, Arc::new(id.clone(), clause_vertex_id(&cl.id), ArcLabel::IsRelatedToClause))?;
        self.complete_action(g, state, &id, cl)
    }

    /// Give an action positioned at `cl` whatever it still lacks: temporal
    /// links (only if it has none), inputs for empty slots, outputs (only if
    /// it has none).
    fn complete_action(
        &self,
        g: &mut RecipeGraph,
        state: &mut AnnotationState,
        action: &str,
        cl: &Clause,
    ) -> Result<(), AnnotateError> {
        let concept = g.vertex(action).and_then(|v| v.concept.clone()).unwrap_or_default();
        let schema = self
            .ontology
            .schema(&concept)
            .cloned()
            .unwrap_or_else(|| default_schema(&concept));

        let has_temporal = g.arcs().any(|a| a.label.is_temporal() && (a.from == action || a.to == action));
        self.link_temporal(g, state, action, cl, !has_temporal)?;
        self.link_arguments(g, state, action, cl, &schema)?;

        if g.outputs(action).is_empty() {
            let lexeme = g.vertex(action).map(|v| v.lexeme().to_string()).unwrap_or_default();
            let out_concept = output_concept(g, action);
            for k in 0..schema.output_count {
                let key = format!("O|{}|{k}", cl.id);
                if g.suppressed.vertices.contains(&key) {
                    continue;
                }
                let id = self.alloc(g, &key, VertexKind::Food, &format!("{lexeme}_out"));
                g.add_vertex(Vertex::food(id.clone(), out_concept.clone(), FoodOrigin::ActionOutput))?;
                self.auto_arc(g, Arc::new(action, id, ArcLabel::HasOutput))?;
            }
        }
        state.last_action = Some(action.to_string());
        Ok(())
    }

    /// Complete the user-made actions positioned at clauses `1..=upto`,
    /// leaving every other element alone.
    pub(crate) fn complete_user_actions(&self, g: &mut RecipeGraph, upto: usize) -> Result<(), AnnotateError> {
        let users: Vec<(String, usize)> = g
            .actions_in_text_order()
            .into_iter()
            .filter(|a| a.user)
            .map(|a| (a.id.clone(), g.position(&a.id)))
            .filter(|(_, p)| (1..=upto).contains(p))
            .collect();
        for (id, pos) in users {
            let Some(cl) = self.analysis.clauses.get(pos - 1) else {
                continue;
            };
            let mut state = self.reconstruct(g, pos);
            self.complete_action(g, &mut state, &id, cl)?;
        }
        Ok(())
    }

    /// New group with isBefore from the previous group, or membership in the
    /// previous group with an isDuring arc from the WHILE/MEANWHILE clause's
    /// action to its neighbour.
    fn link_temporal(
        &self,
        g: &mut RecipeGraph,
        state: &mut AnnotationState,
        action: &str,
        cl: &Clause,
        add_arcs: bool,
    ) -> Result<(), GraphError> {
        let marker = cl.temporal_marker;
        let joins = state.last_action.is_some()
            && (state.pending_while
                || marker == TemporalMarker::Meanwhile
                || (marker == TemporalMarker::While && !cl.sentence_initial));
        if joins {
            let prev = state.last_action.clone().unwrap_or_default();
            let (from, to) = if state.pending_while {
                (prev.as_str(), action)
            } else {
                (action, prev.as_str())
            };
            if from != to && add_arcs {
                self.auto_arc(g, Arc::new(from, to, ArcLabel::IsDuring))?;
            }
            for b in state.group_before.clone() {
                if b != action && add_arcs {
                    self.auto_arc(g, Arc::new(b, action, ArcLabel::IsBefore))?;
                }
            }
            if !state.group.iter().any(|x| x == action) {
                state.group.push(action.to_string());
            }
        } else {
            for b in state.group.clone() {
                if b != action && add_arcs {
                    self.auto_arc(g, Arc::new(b, action, ArcLabel::IsBefore))?;
                }
            }
            state.group_before = std::mem::replace(&mut state.group, vec![action.to_string()]);
        }
        state.pending_while = marker == TemporalMarker::While && cl.sentence_initial;
        Ok(())
    }

    /// Noun phrases of the clause, sorted into argument slots.
    fn argument_phrases(&self, cl: &Clause, schema: &ActionSchema) -> (Vec<NpRef>, Vec<NpRef>) {
        let tagged = &self.analysis.tagged;
        let mut dobj = Vec::new();
        let mut comp = Vec::new();
        let mut last_slot: Option<Slot> = None;
        let mut prev_end: Option<usize> = None;
        for ch in &cl.chunks {
            let (start, end) = ch.noun_range();
            let np = NpRef {
                start,
                end,
                head: ch.head,
            };
            match ch.kind {
                ChunkKind::VP => last_slot = None,
                ChunkKind::NP => {
                    // "with the sugar and the salt": a coordinated NP
                    // continues the complement it follows.
                    let coordinated = ch.start > 0
                        && tagged[ch.start - 1].tag == Tag::Conj
                        && prev_end == Some(ch.start - 1);
                    if coordinated && last_slot == Some(Slot::Complement) {
                        comp.push(np);
                    } else {
                        dobj.push(np);
                        last_slot = Some(Slot::DirectObject);
                    }
                }
                ChunkKind::PP => {
                    let prep = ch.preposition.as_deref().unwrap_or("");
                    if schema.allows_preposition(prep) {
                        comp.push(np);
                        last_slot = Some(Slot::Complement);
                    } else {
                        last_slot = None;
                    }
                }
            }
            prev_end = Some(ch.end);
        }
        (dobj, comp)
    }

    fn link_arguments(
        &self,
        g: &mut RecipeGraph,
        state: &mut AnnotationState,
        action: &str,
        cl: &Clause,
        schema: &ActionSchema,
    ) -> Result<(), AnnotateError> {
        let tagged = &self.analysis.tagged;
        let frontier = availability_frontier(g, At::Action(action))?;
        let (dobj, comp) = self.argument_phrases(cl, schema);
        let mut used: BTreeSet<String> = g.inputs(action).map(|a| a.to.clone()).collect();

        for (slot, phrases, required) in [
            (Slot::DirectObject, dobj, schema.requires_direct_object),
            (Slot::Complement, comp, schema.requires_prepositional_complement),
        ] {
            let label = slot.label();
            if g.inputs(action).any(|a| a.label == label) {
                continue;
            }
            let mut mentioned = false;
            let mut targets: Vec<String> = Vec::new();
            for np in phrases {
                let words: Vec<&str> = tagged[np.start..np.end].iter().map(|t| t.token.lower.as_str()).collect();
                let head = tagged[np.head].token.lower.as_str();
                let exclude: BTreeSet<String> = used.iter().chain(&targets).cloned().collect();
                match resolve_food_reference(&words, head, g, action, &frontier, &exclude, self.ontology) {
                    Reference::Foods(fs) => {
                        mentioned = true;
                        targets.extend(fs);
                    }
                    Reference::Unresolved(lexeme, concept) => {
                        mentioned = true;
                        self.unresolved(g, state, cl, &lexeme, concept)?;
                    }
                    Reference::NotFood => {}
                }
            }
            if !mentioned && required {
                targets = resolve_anaphora(g, state, &frontier, &used);
            }
            for t in targets {
                self.auto_arc(g, Arc::new(action, t.clone(), label))?;
                used.insert(t);
            }
        }
        Ok(())
    }

    fn unresolved(
        &self,
        g: &mut RecipeGraph,
        state: &mut AnnotationState,
        cl: &Clause,
        lexeme: &str,
        concept: Option<ConceptId>,
    ) -> Result<(), GraphError> {
        let n = state
            .unresolved_seen
            .entry((cl.id.clone(), lexeme.to_string()))
            .or_default();
        let key = format!("U|{}|{lexeme}|{n}", clause_vertex_id(&cl.id));
        *n += 1;
        if g.suppressed.vertices.contains(&key) {
            return Ok(());
        }
        let id = self.alloc(g, &key, VertexKind::Food, lexeme);
        let mut v = Vertex::food(id, concept, FoodOrigin::Unresolved);
        v.anchor = Some(clause_vertex_id(&cl.id));
        g.add_vertex(v)
    }
}

/// Concept of an action's output: the single concept shared by its direct
/// objects (or, lacking those, its complements).
pub(crate) fn output_concept(g: &RecipeGraph, action: &str) -> Option<ConceptId> {
    let pick = |label: ArcLabel| -> Vec<Option<ConceptId>> {
        g.inputs(action)
            .filter(|a| a.label == label)
            .map(|a| g.vertex(&a.to).and_then(|v| v.concept.clone()))
            .collect()
    };
    let mut principal = pick(ArcLabel::HasDOInput);
    if principal.is_empty() {
        principal = pick(ArcLabel::HasPCInput);
    }
    let distinct: BTreeSet<Option<ConceptId>> = principal.into_iter().collect();
    match distinct.into_iter().collect::<Vec<_>>().as_slice() {
        [Some(c)] => Some(c.clone()),
        _ => None,
    }
}

/// `GlutinousRice` → `glutinous_rice`.
pub(crate) fn snake_case(concept: &str) -> String {
    let mut out = String::new();
    for (i, c) in concept.chars().enumerate() {
        if c.is_uppercase() && i > 0 {
            out.push('_');
        }
        out.extend(c.to_lowercase());
    }
    lexeme_of(&out)
}
