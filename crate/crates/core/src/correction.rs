//! Guided correction: user edits applied in text order, then automatic
//! re-annotation of everything after the validated part of the text.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotator::{snake_case, vertex_keys, AnnotateError, Engine};
use crate::graph::{
    clause_vertex_id, clause_vertex_index, parse_vertex_id, Arc, ArcLabel, FoodOrigin, GraphError, RecipeGraph,
    Vertex, VertexKind,
};
use crate::ontology::{ConceptId, Hierarchy, Ontology};
use crate::recipe::Recipe;
use crate::textproc::analyze;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorrectionError {
    #[error("edit anchored at clause {anchor} comes before the validated cursor {cursor}")]
    TextOrder { anchor: usize, cursor: usize },
    #[error("unknown clause `{0}`")]
    UnknownClause(String),
    #[error("`{concept}` is not a concept of the {hierarchy} hierarchy")]
    WrongConcept { concept: ConceptId, hierarchy: Hierarchy },
    #[error("clause vertex `{0}` cannot be removed")]
    ClauseRemoval(String),
    #[error("no arc {0} -{1}-> {2}")]
    UnknownArc(String, ArcLabel, String),
    #[error("vertex id `{id}` is not usable for a new {kind} vertex")]
    BadNewId { id: String, kind: VertexKind },
    #[error("`{0}` cannot be relabeled")]
    NotRelabelable(String),
    #[error("graph belongs to recipe `{graph}`, not `{recipe}`")]
    RecipeMismatch { graph: String, recipe: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
}

/// A single user correction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum Edit {
    AddAction {
        concept: ConceptId,
        /// Explicit id; a fresh one is made when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
    AddFood {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        concept: Option<ConceptId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
    AddArc {
        from: String,
        to: String,
        label: ArcLabel,
    },
    RemoveArc {
        from: String,
        to: String,
        label: ArcLabel,
    },
    RemoveVertex {
        id: String,
    },
    Relabel {
        id: String,
        concept: ConceptId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOperation {
    #[serde(flatten)]
    pub edit: Edit,
    /// `c_<n>` (a `Clause:` prefix is accepted too).
    pub anchor_clause: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl EditOperation {
    pub fn new(edit: Edit, anchor_clause: impl Into<String>) -> EditOperation {
        EditOperation {
            edit,
            anchor_clause: anchor_clause.into(),
            author: None,
            timestamp: None,
        }
    }

    fn anchor_index(&self) -> Option<usize> {
        let id = self.anchor_clause.as_str();
        clause_vertex_index(id).or_else(|| clause_vertex_index(&clause_vertex_id(id)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub recipe_id: String,
    pub base_version: u64,
    /// Highest clause index confirmed by the user; 0 before any edit.
    pub validated_cursor: usize,
    #[serde(default)]
    pub pending: Vec<EditOperation>,
}

impl Session {
    pub fn new(g: &RecipeGraph) -> Session {
        Session {
            recipe_id: g.recipe_id.clone(),
            base_version: g.version,
            validated_cursor: 0,
            pending: Vec::new(),
        }
    }
}

/// Apply one edit. On success the returned graph has its version bumped and
/// the session cursor moves to the anchor; on failure neither changes.
pub fn apply_edit(
    g: &RecipeGraph,
    op: &EditOperation,
    session: &mut Session,
    ontology: &Ontology,
) -> Result<RecipeGraph, CorrectionError> {
    let anchor = op
        .anchor_index()
        .filter(|i| g.contains(&format!("Clause:c_{i}")))
        .ok_or_else(|| CorrectionError::UnknownClause(op.anchor_clause.clone()))?;
    if anchor < session.validated_cursor {
        return Err(CorrectionError::TextOrder {
            anchor,
            cursor: session.validated_cursor,
        });
    }
    let anchor_vertex = format!("Clause:c_{anchor}");
    let mut h = g.clone();
    match &op.edit {
        Edit::AddAction { concept, id } => {
            require_concept(ontology, concept, Hierarchy::Action)?;
            let id = new_id(&mut h, id.as_deref(), VertexKind::Action, &action_lexeme(ontology, concept))?;
            let mut v = Vertex::action(id, concept.clone());
            v.user = true;
            v.anchor = Some(anchor_vertex);
            h.add_vertex(v)?;
        }
        Edit::AddFood { concept, id } => {
            if let Some(c) = concept {
                require_concept(ontology, c, Hierarchy::Food)?;
            }
            let lexeme = concept.as_deref().map(snake_case).unwrap_or_else(|| "food".to_string());
            let id = new_id(&mut h, id.as_deref(), VertexKind::Food, &lexeme)?;
            let mut v = Vertex::food(id, concept.clone(), FoodOrigin::UserAdded);
            v.user = true;
            v.anchor = Some(anchor_vertex);
            h.add_vertex(v)?;
        }
        Edit::AddArc { from, to, label } => {
            let arc = Arc::new(from.clone(), to.clone(), *label);
            h.add_user_arc(arc.clone())?;
            h.suppressed.arcs.remove(&arc);
        }
        Edit::RemoveArc { from, to, label } => {
            let arc = Arc::new(from.clone(), to.clone(), *label);
            let user = h.is_user_arc(&arc);
            if !h.remove_arc(&arc) {
                return Err(CorrectionError::UnknownArc(from.clone(), *label, to.clone()));
            }
            if !user {
                h.suppressed.arcs.insert(arc);
            }
        }
        Edit::RemoveVertex { id } => {
            let v = h.vertex(id).ok_or_else(|| GraphError::UnknownVertex(id.clone()))?;
            if v.is_clause() {
                return Err(CorrectionError::ClauseRemoval(id.clone()));
            }
            if let Some(key) = vertex_keys(&h).remove(id) {
                h.suppressed.vertices.insert(key);
            }
            h.remove_vertex(id);
        }
        Edit::Relabel { id, concept } => {
            let v = h.vertex(id).ok_or_else(|| GraphError::UnknownVertex(id.clone()))?;
            let hierarchy = match v.kind {
                VertexKind::Action => Hierarchy::Action,
                VertexKind::Food => Hierarchy::Food,
                VertexKind::Clause => return Err(CorrectionError::NotRelabelable(id.clone())),
            };
            require_concept(ontology, concept, hierarchy)?;
            if hierarchy == Hierarchy::Action {
                relabel_action(&mut h, id, concept, ontology);
            }
            let v = h.vertex_mut(id).expect("checked above");
            v.concept = Some(concept.clone());
            v.user = true;
            if v.anchor.is_none() && v.kind == VertexKind::Action {
                v.anchor = Some(anchor_vertex);
            }
        }
    }
    h.version = g.version + 1;
    session.validated_cursor = session.validated_cursor.max(anchor);
    session.pending.push(op.clone());
    Ok(h)
}

/// Apply a batch atomically: all edits or none. The version grows by one.
pub fn apply_edits(
    g: &RecipeGraph,
    ops: &[EditOperation],
    session: &mut Session,
    ontology: &Ontology,
) -> Result<RecipeGraph, CorrectionError> {
    let mut trial = session.clone();
    let mut h = g.clone();
    for op in ops {
        h = apply_edit(&h, op, &mut trial, ontology)?;
    }
    h.version = g.version + u64::from(!ops.is_empty());
    *session = trial;
    Ok(h)
}

/// A relabeled action's automatic inputs are recomputed; its automatic
/// outputs go too when the new schema wants a different number of them.
fn relabel_action(h: &mut RecipeGraph, id: &str, concept: &str, ontology: &Ontology) {
    let auto_inputs: Vec<Arc> = h.inputs(id).filter(|a| !h.is_user_arc(a)).cloned().collect();
    for a in auto_inputs {
        h.remove_arc(&a);
    }
    let wanted = ontology.schema(concept).map(|s| s.output_count).unwrap_or(1);
    let outputs: Vec<String> = h.outputs(id).into_iter().map(str::to_string).collect();
    if outputs.len() != wanted {
        for o in outputs {
            if h.vertex(&o).is_some_and(|v| !v.user) {
                h.remove_vertex(&o);
            }
        }
    }
}

fn require_concept(ontology: &Ontology, concept: &str, h: Hierarchy) -> Result<(), CorrectionError> {
    if ontology.in_hierarchy(concept, h) {
        Ok(())
    } else {
        Err(CorrectionError::WrongConcept {
            concept: concept.to_string(),
            hierarchy: h,
        })
    }
}

fn action_lexeme(ontology: &Ontology, concept: &str) -> String {
    ontology
        .concept(concept)
        .and_then(|c| c.lexical_variants.first())
        .map(|v| v.join("_"))
        .unwrap_or_else(|| snake_case(concept))
}

fn new_id(h: &mut RecipeGraph, explicit: Option<&str>, kind: VertexKind, lexeme: &str) -> Result<String, CorrectionError> {
    match explicit {
        Some(id) => {
            let ok = parse_vertex_id(id).is_some_and(|p| p.kind == kind) && !h.contains(id);
            if ok {
                Ok(id.to_string())
            } else {
                Err(CorrectionError::BadNewId {
                    id: id.to_string(),
                    kind,
                })
            }
        }
        None => Ok(h.fresh_id(kind, lexeme)),
    }
}

/// Vertex summary used in change sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: String,
    pub kind: VertexKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept: Option<ConceptId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub vertices: Vec<VertexEntry>,
    pub arcs: Vec<Arc>,
}

/// Difference between two graphs, for display.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub added: Delta,
    pub removed: Delta,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.added.vertices.is_empty()
            && self.added.arcs.is_empty()
            && self.removed.vertices.is_empty()
            && self.removed.arcs.is_empty()
    }

    pub fn between(before: &RecipeGraph, after: &RecipeGraph) -> ChangeSet {
        let entries = |g: &RecipeGraph| -> BTreeSet<VertexEntry> {
            g.vertices()
                .map(|v| VertexEntry {
                    id: v.id.clone(),
                    kind: v.kind,
                    concept: v.concept.clone(),
                })
                .collect()
        };
        let (vb, va) = (entries(before), entries(after));
        let ab: BTreeSet<&Arc> = before.arcs().collect();
        let aa: BTreeSet<&Arc> = after.arcs().collect();
        ChangeSet {
            added: Delta {
                vertices: va.difference(&vb).cloned().collect(),
                arcs: aa.difference(&ab).map(|a| (*a).clone()).collect(),
            },
            removed: Delta {
                vertices: vb.difference(&va).cloned().collect(),
                arcs: ab.difference(&aa).map(|a| (*a).clone()).collect(),
            },
        }
    }
}

/// Re-annotate after the validated cursor.
///
/// User-made actions up to the cursor are completed first (temporal links,
/// empty slots, outputs). Then every automatic element positioned after the
/// cursor is dropped and the annotator runs again from the next clause,
/// starting from the state the kept prefix implies. Regenerated vertices
/// get back their previous ids, so an unchanged result is an empty change
/// set and the version stays put.
pub fn repropagate(
    recipe: &Recipe,
    g: &RecipeGraph,
    session: &Session,
    ontology: &Ontology,
) -> Result<(RecipeGraph, ChangeSet), CorrectionError> {
    if recipe.id != g.recipe_id {
        return Err(CorrectionError::RecipeMismatch {
            graph: g.recipe_id.clone(),
            recipe: recipe.id.clone(),
        });
    }
    let cursor = session.validated_cursor;
    let hints: BTreeMap<String, String> = vertex_keys(g).into_iter().map(|(id, key)| (key, id)).collect();
    let analysis = analyze(&recipe.preparation, ontology);
    let engine = Engine::new(ontology, recipe, &analysis, hints);

    let mut h = g.clone();
    engine.complete_user_actions(&mut h, cursor)?;

    let doomed_vertices: Vec<String> = h
        .vertices()
        .filter(|v| !v.user && h.position(&v.id) > cursor)
        .filter(|v| match v.kind {
            VertexKind::Action => true,
            VertexKind::Food => match v.origin {
                Some(FoodOrigin::ActionOutput) => !h.producers(&v.id).is_empty(),
                Some(FoodOrigin::Unresolved) => true,
                _ => false,
            },
            VertexKind::Clause => false,
        })
        .map(|v| v.id.clone())
        .collect();
    let doomed_arcs: Vec<Arc> = h
        .arcs()
        .filter(|a| !h.is_user_arc(a) && h.arc_position(a) > cursor)
        .cloned()
        .collect();
    let mut orphaned_user_arcs = Vec::new();
    for a in &doomed_arcs {
        h.remove_arc(a);
    }
    for id in &doomed_vertices {
        if let Some((_, arcs)) = h.remove_vertex(id) {
            orphaned_user_arcs.extend(arcs.into_iter().filter(|a| g.is_user_arc(a)));
        }
    }

    engine.run(&mut h, cursor + 1)?;
    for a in orphaned_user_arcs {
        if h.check_arc(&a).is_ok() {
            h.add_user_arc(a)?;
        }
    }

    let changes = ChangeSet::between(g, &h);
    if changes.is_empty() && h == *g {
        return Ok((g.clone(), changes));
    }
    h.version = g.version + 1;
    Ok((h, changes))
}
