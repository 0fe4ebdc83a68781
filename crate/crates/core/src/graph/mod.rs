//! Recipe graph: typed vertices (actions, foods, clauses) and labeled arcs.
//!
//! All arcs start at an action vertex; dataflow direction is carried by the
//! label. Arc typing is checked on every insertion, so a graph value never
//! holds an ill-typed arc.

mod dot;
mod frontier;
mod iso;
mod serialize;
mod validate;
mod zoom;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::ConceptId;
use crate::textproc::clause_index;

pub use dot::export_dot;
pub use frontier::{availability_frontier, temporal_order, At, TemporalOrder};
pub use iso::{isomorphic, IsoOptions};
pub use serialize::{deserialize, serialize, GraphDoc};
pub use validate::{validate, Severity, ValidationReport, Violation};
pub use zoom::zoom;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex id `{0}` does not follow the `<Kind>:<lexeme>_<n>` scheme for its kind")]
    BadVertexId(String),
    #[error("unknown arc label `{0}`")]
    UnknownArcLabel(String),
    #[error("arc {label} from {from_kind} `{from}` to {to_kind} `{to}` is ill-typed")]
    ArcTyping {
        from: String,
        to: String,
        label: ArcLabel,
        from_kind: VertexKind,
        to_kind: VertexKind,
    },
    #[error("`{0}` is not an action vertex")]
    NotAnAction(String),
    #[error("temporal order is cyclic")]
    CyclicTemporalOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexKind {
    Action,
    Food,
    Clause,
}

impl VertexKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::Action => "Action",
            VertexKind::Food => "Food",
            VertexKind::Clause => "Clause",
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoodOrigin {
    IngredientList,
    ActionOutput,
    UserAdded,
    /// A food mention that matched nothing available; left isolated.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
    /// Ontology concept; `None` for clauses, mixtures and unknown mentions.
    pub concept: Option<ConceptId>,
    /// Foods only.
    pub origin: Option<FoodOrigin>,
    /// Clauses only: byte span in the preparation text.
    pub text_span: Option<(usize, usize)>,
    /// Clause id a vertex is positioned at when no arc says so.
    pub anchor: Option<String>,
    /// Created or edited by a user.
    pub user: bool,
}

impl Vertex {
    pub fn action(id: String, concept: ConceptId) -> Vertex {
        Vertex {
            id,
            kind: VertexKind::Action,
            concept: Some(concept),
            origin: None,
            text_span: None,
            anchor: None,
            user: false,
        }
    }

    pub fn food(id: String, concept: Option<ConceptId>, origin: FoodOrigin) -> Vertex {
        Vertex {
            id,
            kind: VertexKind::Food,
            concept,
            origin: Some(origin),
            text_span: None,
            anchor: None,
            user: false,
        }
    }

    pub fn clause(index: usize, span: (usize, usize)) -> Vertex {
        Vertex {
            id: format!("Clause:c_{index}"),
            kind: VertexKind::Clause,
            concept: None,
            origin: None,
            text_span: Some(span),
            anchor: None,
            user: false,
        }
    }

    pub fn is_action(&self) -> bool {
        self.kind == VertexKind::Action
    }

    pub fn is_food(&self) -> bool {
        self.kind == VertexKind::Food
    }

    pub fn is_clause(&self) -> bool {
        self.kind == VertexKind::Clause
    }

    /// The trailing number of the id.
    pub fn serial(&self) -> u64 {
        parse_vertex_id(&self.id).map(|p| p.serial).unwrap_or(0)
    }

    pub fn lexeme(&self) -> &str {
        parse_vertex_id(&self.id).map(|p| p.lexeme).unwrap_or("")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexIdParts<'a> {
    pub kind: VertexKind,
    pub lexeme: &'a str,
    pub serial: u64,
}

/// Split `<Kind>:<lexeme>_<n>`; clauses use `Clause:c_<n>`.
pub fn parse_vertex_id(id: &str) -> Option<VertexIdParts<'_>> {
    let (kind, rest) = id.split_once(':')?;
    let kind = match kind {
        "Action" => VertexKind::Action,
        "Food" => VertexKind::Food,
        "Clause" => VertexKind::Clause,
        _ => return None,
    };
    let (lexeme, serial) = rest.rsplit_once('_')?;
    if lexeme.is_empty()
        || serial.is_empty()
        || !serial.bytes().all(|b| b.is_ascii_digit())
        || lexeme.chars().any(|c| c.is_whitespace() || c == ':')
    {
        return None;
    }
    if kind == VertexKind::Clause && lexeme != "c" {
        return None;
    }
    Some(VertexIdParts {
        kind,
        lexeme,
        serial: serial.parse().ok()?,
    })
}

/// Normalize free text into an id lexeme.
pub fn lexeme_of(text: &str) -> String {
    let mut s: String = text
        .trim()
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    let s = s.trim_matches('_').to_string();
    if s.is_empty() {
        "x".to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArcLabel {
    #[serde(rename = "hasDOInput")]
    HasDOInput,
    #[serde(rename = "hasPCInput")]
    HasPCInput,
    #[serde(rename = "hasOutput")]
    HasOutput,
    #[serde(rename = "isBefore")]
    IsBefore,
    #[serde(rename = "isDuring")]
    IsDuring,
    #[serde(rename = "isRelatedToClause")]
    IsRelatedToClause,
}

impl ArcLabel {
    pub const ALL: [ArcLabel; 6] = [
        ArcLabel::HasDOInput,
        ArcLabel::HasPCInput,
        ArcLabel::HasOutput,
        ArcLabel::IsBefore,
        ArcLabel::IsDuring,
        ArcLabel::IsRelatedToClause,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArcLabel::HasDOInput => "hasDOInput",
            ArcLabel::HasPCInput => "hasPCInput",
            ArcLabel::HasOutput => "hasOutput",
            ArcLabel::IsBefore => "isBefore",
            ArcLabel::IsDuring => "isDuring",
            ArcLabel::IsRelatedToClause => "isRelatedToClause",
        }
    }

    pub fn is_input(self) -> bool {
        matches!(self, ArcLabel::HasDOInput | ArcLabel::HasPCInput)
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, ArcLabel::IsBefore | ArcLabel::IsDuring)
    }

    /// Endpoint kinds required by the label.
    pub fn endpoint_kinds(self) -> (VertexKind, VertexKind) {
        match self {
            ArcLabel::HasDOInput | ArcLabel::HasPCInput | ArcLabel::HasOutput => {
                (VertexKind::Action, VertexKind::Food)
            }
            ArcLabel::IsBefore | ArcLabel::IsDuring => (VertexKind::Action, VertexKind::Action),
            ArcLabel::IsRelatedToClause => (VertexKind::Action, VertexKind::Clause),
        }
    }
}

impl fmt::Display for ArcLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArcLabel {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ArcLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| GraphError::UnknownArcLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub from: String,
    pub to: String,
    pub label: ArcLabel,
}

impl Arc {
    pub fn new(from: impl Into<String>, to: impl Into<String>, label: ArcLabel) -> Arc {
        Arc {
            from: from.into(),
            to: to.into(),
            label,
        }
    }
}

/// Auto-generated elements a user removed; the annotator will not recreate them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Suppressed {
    /// Structural keys of auto vertices (see `annotator::vertex_key`).
    pub vertices: BTreeSet<String>,
    pub arcs: BTreeSet<Arc>,
}

impl Suppressed {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.arcs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecipeGraph {
    pub recipe_id: String,
    pub version: u64,
    next_serial: u64,
    vertices: BTreeMap<String, Vertex>,
    arcs: BTreeSet<Arc>,
    user_arcs: BTreeSet<Arc>,
    pub suppressed: Suppressed,
}

impl RecipeGraph {
    pub fn new(recipe_id: impl Into<String>) -> RecipeGraph {
        RecipeGraph {
            recipe_id: recipe_id.into(),
            version: 0,
            next_serial: 1,
            vertices: BTreeMap::new(),
            arcs: BTreeSet::new(),
            user_arcs: BTreeSet::new(),
            suppressed: Suppressed::default(),
        }
    }

    pub fn next_serial(&self) -> u64 {
        self.next_serial
    }

    pub(crate) fn set_next_serial(&mut self, n: u64) {
        self.next_serial = n;
    }

    /// Reserve the next vertex number. Numbers are never handed out twice.
    pub fn alloc_serial(&mut self) -> u64 {
        let n = self.next_serial;
        self.next_serial += 1;
        n
    }

    pub fn fresh_id(&mut self, kind: VertexKind, lexeme: &str) -> String {
        let n = self.alloc_serial();
        format!("{}:{}_{}", kind.as_str(), lexeme_of(lexeme), n)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.get(id)
    }

    pub fn vertex_mut(&mut self, id: &str) -> Option<&mut Vertex> {
        self.vertices.get_mut(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vertices.contains_key(id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.arcs.iter()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn has_arc(&self, arc: &Arc) -> bool {
        self.arcs.contains(arc)
    }

    pub fn is_user_arc(&self, arc: &Arc) -> bool {
        self.user_arcs.contains(arc)
    }

    pub fn actions(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values().filter(|v| v.is_action())
    }

    pub fn foods(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values().filter(|v| v.is_food())
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values().filter(|v| v.is_clause())
    }

    pub fn add_vertex(&mut self, v: Vertex) -> Result<(), GraphError> {
        let parts = parse_vertex_id(&v.id).ok_or_else(|| GraphError::BadVertexId(v.id.clone()))?;
        if parts.kind != v.kind {
            return Err(GraphError::BadVertexId(v.id.clone()));
        }
        if self.vertices.contains_key(&v.id) {
            return Err(GraphError::DuplicateVertex(v.id));
        }
        if v.kind != VertexKind::Clause && parts.serial >= self.next_serial {
            self.next_serial = parts.serial + 1;
        }
        self.vertices.insert(v.id.clone(), v);
        Ok(())
    }

    /// Check an arc against the endpoint-kind rules without inserting it.
    pub fn check_arc(&self, arc: &Arc) -> Result<(), GraphError> {
        let from = self
            .vertices
            .get(&arc.from)
            .ok_or_else(|| GraphError::UnknownVertex(arc.from.clone()))?;
        let to = self
            .vertices
            .get(&arc.to)
            .ok_or_else(|| GraphError::UnknownVertex(arc.to.clone()))?;
        let (fk, tk) = arc.label.endpoint_kinds();
        let self_loop = arc.label.is_temporal() && arc.from == arc.to;
        if from.kind != fk || to.kind != tk || self_loop {
            return Err(GraphError::ArcTyping {
                from: arc.from.clone(),
                to: arc.to.clone(),
                label: arc.label,
                from_kind: from.kind,
                to_kind: to.kind,
            });
        }
        Ok(())
    }

    /// Insert an arc; returns false when the triple already exists.
    pub fn add_arc(&mut self, arc: Arc) -> Result<bool, GraphError> {
        self.check_arc(&arc)?;
        Ok(self.arcs.insert(arc))
    }

    pub fn add_user_arc(&mut self, arc: Arc) -> Result<bool, GraphError> {
        self.check_arc(&arc)?;
        self.user_arcs.insert(arc.clone());
        Ok(self.arcs.insert(arc))
    }

    pub(crate) fn mark_user_arc(&mut self, arc: &Arc) {
        if self.arcs.contains(arc) {
            self.user_arcs.insert(arc.clone());
        }
    }

    pub fn remove_arc(&mut self, arc: &Arc) -> bool {
        self.user_arcs.remove(arc);
        self.arcs.remove(arc)
    }

    /// Remove a vertex and every incident arc.
    pub fn remove_vertex(&mut self, id: &str) -> Option<(Vertex, Vec<Arc>)> {
        let v = self.vertices.remove(id)?;
        let incident: Vec<Arc> = self
            .arcs
            .iter()
            .filter(|a| a.from == id || a.to == id)
            .cloned()
            .collect();
        for a in &incident {
            self.arcs.remove(a);
            self.user_arcs.remove(a);
        }
        Some((v, incident))
    }

    /// Rename vertices; ids absent from `map` are kept.
    pub fn rename_vertices(&mut self, map: &BTreeMap<String, String>) {
        if map.is_empty() {
            return;
        }
        let rename = |id: &String| map.get(id).cloned().unwrap_or_else(|| id.clone());
        self.vertices = std::mem::take(&mut self.vertices)
            .into_values()
            .map(|mut v| {
                v.id = rename(&v.id);
                (v.id.clone(), v)
            })
            .collect();
        let re_arc = |a: &Arc| Arc::new(rename(&a.from), rename(&a.to), a.label);
        self.arcs = self.arcs.iter().map(re_arc).collect();
        self.user_arcs = self.user_arcs.iter().map(re_arc).collect();
        self.suppressed.arcs = self.suppressed.arcs.iter().map(re_arc).collect();
    }

    pub fn outgoing<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a Arc> + 'a {
        let id = id.to_string();
        let lo = Arc::new(id.clone(), "", ArcLabel::HasDOInput);
        self.arcs.range(lo..).take_while(move |a| a.from == id)
    }

    pub fn incoming<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a Arc> + 'a {
        let id = id.to_string();
        self.arcs.iter().filter(move |a| a.to == id)
    }

    /// Input arcs (DO and PC) of an action.
    pub fn inputs<'a>(&'a self, action: &str) -> impl Iterator<Item = &'a Arc> + 'a {
        self.outgoing(action).filter(|a| a.label.is_input())
    }

    /// Output foods of an action, ordered by vertex number.
    pub fn outputs(&self, action: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .outgoing(action)
            .filter(|a| a.label == ArcLabel::HasOutput)
            .map(|a| a.to.as_str())
            .collect();
        out.sort_by_key(|id| self.vertices.get(*id).map(Vertex::serial));
        out
    }

    /// Actions that output `food`.
    pub fn producers(&self, food: &str) -> Vec<&str> {
        self.incoming(food)
            .filter(|a| a.label == ArcLabel::HasOutput)
            .map(|a| a.from.as_str())
            .collect()
    }

    /// Actions that take `food` as an input.
    pub fn consumers(&self, food: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .incoming(food)
            .filter(|a| a.label.is_input())
            .map(|a| a.from.as_str())
            .collect();
        out.dedup();
        out
    }

    /// Clause vertex an action is attached to.
    pub fn clause_of(&self, action: &str) -> Option<&str> {
        self.outgoing(action)
            .find(|a| a.label == ArcLabel::IsRelatedToClause)
            .map(|a| a.to.as_str())
    }

    /// Text position of a vertex as a clause index; 0 means before all text.
    pub fn position(&self, id: &str) -> usize {
        let Some(v) = self.vertices.get(id) else {
            return 0;
        };
        let clause = match v.kind {
            VertexKind::Clause => Some(v.id.as_str()),
            VertexKind::Action => self.clause_of(id).or(v.anchor.as_deref()),
            VertexKind::Food => match self.producers(id).first() {
                Some(p) => return self.position(p),
                None => v.anchor.as_deref(),
            },
        };
        clause.and_then(clause_vertex_index).unwrap_or(0)
    }

    /// Text position of an arc: its source action, or the later endpoint
    /// for temporal arcs.
    pub fn arc_position(&self, arc: &Arc) -> usize {
        if arc.label.is_temporal() {
            self.position(&arc.from).max(self.position(&arc.to))
        } else {
            self.position(&arc.from)
        }
    }

    /// Actions in text order (clause position, then vertex number).
    pub fn actions_in_text_order(&self) -> Vec<&Vertex> {
        let mut acts: Vec<&Vertex> = self.actions().collect();
        acts.sort_by_key(|v| (self.position(&v.id), v.serial(), v.id.clone()));
        acts
    }
}

/// Index `n` of a `Clause:c_<n>` vertex id.
pub fn clause_vertex_index(id: &str) -> Option<usize> {
    clause_index(id.strip_prefix("Clause:")?)
}

pub fn clause_vertex_id(clause_id: &str) -> String {
    format!("Clause:{clause_id}")
}
