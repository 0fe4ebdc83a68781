use serde::{Deserialize, Serialize};

use super::{Arc, ArcLabel, FoodOrigin, GraphError, RecipeGraph, Vertex, VertexKind};

/// JSON shape of a graph. Vertices are sorted by id, arcs by
/// (from, to, label), so serializing the same graph twice is byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub recipe_id: String,
    pub version: u64,
    /// Next vertex number to hand out; absent in hand-written documents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_serial: Option<u64>,
    pub vertices: Vec<VertexDoc>,
    pub arcs: Vec<ArcDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppressed: Option<SuppressedDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: String,
    pub kind: VertexKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<FoodOrigin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_span: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub user: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcDoc {
    pub from: String,
    pub to: String,
    /// Kept as a string so unknown labels get a precise error.
    pub label: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub user: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuppressedDoc {
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub arcs: Vec<ArcDoc>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn arc_doc(a: &Arc, user: bool) -> ArcDoc {
    ArcDoc {
        from: a.from.clone(),
        to: a.to.clone(),
        label: a.label.as_str().to_string(),
        user,
    }
}

pub fn serialize(g: &RecipeGraph) -> GraphDoc {
    let vertices = g
        .vertices()
        .map(|v| VertexDoc {
            id: v.id.clone(),
            kind: v.kind,
            concept: v.concept.clone(),
            origin: v.origin,
            text_span: v.text_span.map(|(s, e)| [s, e]),
            anchor: v.anchor.clone(),
            user: v.user,
        })
        .collect();
    let arcs = g.arcs().map(|a| arc_doc(a, g.is_user_arc(a))).collect();
    let suppressed = (!g.suppressed.is_empty()).then(|| SuppressedDoc {
        vertices: g.suppressed.vertices.iter().cloned().collect(),
        arcs: g.suppressed.arcs.iter().map(|a| arc_doc(a, false)).collect(),
    });
    GraphDoc {
        recipe_id: g.recipe_id.clone(),
        version: g.version,
        next_serial: Some(g.next_serial()),
        vertices,
        arcs,
        suppressed,
    }
}

pub fn deserialize(doc: &GraphDoc) -> Result<RecipeGraph, GraphError> {
    let mut g = RecipeGraph::new(doc.recipe_id.clone());
    g.version = doc.version;
    for v in &doc.vertices {
        let span = v.text_span.map(|[s, e]| (s, e));
        if v.kind == VertexKind::Clause && span.is_none() {
            return Err(GraphError::Malformed(format!("clause `{}` has no text_span", v.id)));
        }
        if v.kind == VertexKind::Food && v.origin.is_none() {
            return Err(GraphError::Malformed(format!("food `{}` has no origin", v.id)));
        }
        if v.kind == VertexKind::Action && v.concept.is_none() {
            return Err(GraphError::Malformed(format!("action `{}` has no concept", v.id)));
        }
        g.add_vertex(Vertex {
            id: v.id.clone(),
            kind: v.kind,
            concept: v.concept.clone(),
            origin: v.origin,
            text_span: span,
            anchor: v.anchor.clone(),
            user: v.user,
        })?;
    }
    for a in &doc.arcs {
        let arc = Arc::new(a.from.clone(), a.to.clone(), a.label.parse::<ArcLabel>()?);
        if a.user {
            g.add_user_arc(arc)?;
        } else {
            g.add_arc(arc)?;
        }
    }
    if let Some(s) = &doc.suppressed {
        g.suppressed.vertices = s.vertices.iter().cloned().collect();
        for a in &s.arcs {
            let label = a.label.parse::<ArcLabel>()?;
            g.suppressed.arcs.insert(Arc::new(a.from.clone(), a.to.clone(), label));
        }
    }
    if let Some(n) = doc.next_serial {
        if n < g.next_serial() {
            return Err(GraphError::Malformed(format!(
                "next_serial {n} is not above existing vertex numbers"
            )));
        }
        g.set_next_serial(n);
    }
    Ok(g)
}

impl RecipeGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serialize(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<RecipeGraph, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| {
            // serde reports unknown enum variants for `kind`; labels are strings.
            GraphError::Malformed(e.to_string())
        })?;
        deserialize(&doc)
    }
}
