//! Concept hierarchies, action schemas and target sets.
//!
//! The ontology is read from a single JSON document and is immutable after
//! loading. Six hierarchies are expected (food, dish-type, dish-moment,
//! location, diet, action); every concept id is unique across all of them.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ConceptId = String;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("malformed ontology document: {0}")]
    Malformed(String),
    #[error("unknown hierarchy `{0}`")]
    UnknownHierarchy(String),
    #[error("missing hierarchy roots: {0:?}")]
    MissingRoots(Vec<String>),
    #[error("hierarchy `{hierarchy}` has several roots: {roots:?}")]
    SeveralRoots { hierarchy: String, roots: Vec<ConceptId> },
    #[error("duplicate concept id `{0}`")]
    DuplicateConcept(ConceptId),
    #[error("concept `{concept}` lists unknown parent `{parent}`")]
    DanglingParent { concept: ConceptId, parent: ConceptId },
    #[error("concept `{concept}` has parent `{parent}` from another hierarchy")]
    ParentHierarchyMismatch { concept: ConceptId, parent: ConceptId },
    #[error("cycle detected through concept `{0}`")]
    Cycle(ConceptId),
    #[error("action concept `{0}` has no schema")]
    MissingSchema(ConceptId),
    #[error("schema given for `{0}`, which is not an action concept")]
    SchemaForNonAction(ConceptId),
    #[error("schema for `{0}` has output_count 0")]
    ZeroOutputCount(ConceptId),
    #[error("target set `{trigger}`: {reason}")]
    InvalidTargetSet { trigger: String, reason: String },
    #[error("unknown concept `{0}`")]
    UnknownConcept(ConceptId),
    #[error("`{0}` and `{1}` belong to different hierarchies")]
    CrossHierarchy(ConceptId, ConceptId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hierarchy {
    Food,
    DishType,
    DishMoment,
    Location,
    Diet,
    Action,
}

impl Hierarchy {
    pub const ALL: [Hierarchy; 6] = [
        Hierarchy::Food,
        Hierarchy::DishType,
        Hierarchy::DishMoment,
        Hierarchy::Location,
        Hierarchy::Diet,
        Hierarchy::Action,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Hierarchy::Food => "food",
            Hierarchy::DishType => "dish-type",
            Hierarchy::DishMoment => "dish-moment",
            Hierarchy::Location => "location",
            Hierarchy::Diet => "diet",
            Hierarchy::Action => "action",
        }
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hierarchy {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Hierarchy::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| OntologyError::UnknownHierarchy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: ConceptId,
    pub hierarchy: Hierarchy,
    pub parents: Vec<ConceptId>,
    /// Lowercase, pre-tokenized word sequences.
    pub lexical_variants: Vec<Vec<String>>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub concept: ConceptId,
    pub requires_direct_object: bool,
    pub requires_prepositional_complement: bool,
    pub allowed_prepositions: Vec<String>,
    pub output_count: usize,
}

impl ActionSchema {
    pub fn requires_input(&self) -> bool {
        self.requires_direct_object || self.requires_prepositional_complement
    }

    pub fn allows_preposition(&self, word: &str) -> bool {
        self.allowed_prepositions.iter().any(|p| p == word)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub trigger_word: String,
    /// Member concept -> weight in (0, 1].
    pub members: BTreeMap<ConceptId, f64>,
}

#[derive(Debug, Clone)]
pub struct Ontology {
    concepts: BTreeMap<ConceptId, Concept>,
    children: BTreeMap<ConceptId, Vec<ConceptId>>,
    roots: BTreeMap<Hierarchy, ConceptId>,
    ancestors: HashMap<ConceptId, BTreeSet<ConceptId>>,
    schemas: BTreeMap<ConceptId, ActionSchema>,
    target_sets: BTreeMap<String, TargetSet>,
    lexicon: HashMap<Hierarchy, HashMap<Vec<String>, Vec<ConceptId>>>,
    longest_variant: usize,
}

// ---- document format ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyDoc {
    #[serde(default)]
    hierarchies: BTreeMap<String, Vec<ConceptDoc>>,
    #[serde(default)]
    action_schemas: BTreeMap<String, SchemaDoc>,
    #[serde(default)]
    target_sets: BTreeMap<String, Vec<TargetMemberDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptDoc {
    id: String,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default)]
    variants: Vec<String>,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaDoc {
    #[serde(default)]
    requires_do: bool,
    #[serde(default)]
    requires_pc: bool,
    #[serde(default)]
    prepositions: Vec<String>,
    #[serde(default = "one")]
    output_count: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetMemberDoc {
    concept: String,
    weight: f64,
}

fn tokenize_variant(v: &str) -> Vec<String> {
    v.split_whitespace().map(|w| w.to_lowercase()).collect()
}

impl Ontology {
    pub fn from_json(text: &str) -> Result<Ontology, OntologyError> {
        let doc: OntologyDoc =
            serde_json::from_str(text).map_err(|e| OntologyError::Malformed(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Ontology, OntologyError> {
        let doc: OntologyDoc =
            serde_json::from_reader(reader).map_err(|e| OntologyError::Malformed(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: OntologyDoc) -> Result<Ontology, OntologyError> {
        let mut concepts = BTreeMap::new();
        for (name, records) in doc.hierarchies {
            let hierarchy: Hierarchy = name.parse()?;
            for rec in records {
                if concepts.contains_key(&rec.id) {
                    return Err(OntologyError::DuplicateConcept(rec.id));
                }
                let concept = Concept {
                    id: rec.id.clone(),
                    hierarchy,
                    parents: rec.parents,
                    lexical_variants: rec
                        .variants
                        .iter()
                        .map(|v| tokenize_variant(v))
                        .filter(|v| !v.is_empty())
                        .collect(),
                    description: rec.description,
                };
                concepts.insert(rec.id, concept);
            }
        }

        let mut children: BTreeMap<ConceptId, Vec<ConceptId>> = BTreeMap::new();
        for c in concepts.values() {
            for p in &c.parents {
                let parent = concepts.get(p).ok_or_else(|| OntologyError::DanglingParent {
                    concept: c.id.clone(),
                    parent: p.clone(),
                })?;
                if parent.hierarchy != c.hierarchy {
                    return Err(OntologyError::ParentHierarchyMismatch {
                        concept: c.id.clone(),
                        parent: p.clone(),
                    });
                }
                children.entry(p.clone()).or_default().push(c.id.clone());
            }
        }

        check_acyclic(&concepts)?;

        let mut roots = BTreeMap::new();
        let mut missing = Vec::new();
        for h in Hierarchy::ALL {
            let hroots: Vec<ConceptId> = concepts
                .values()
                .filter(|c| c.hierarchy == h && c.parents.is_empty())
                .map(|c| c.id.clone())
                .collect();
            match hroots.len() {
                0 => missing.push(h.as_str().to_string()),
                1 => {
                    roots.insert(h, hroots[0].clone());
                }
                _ => {
                    return Err(OntologyError::SeveralRoots {
                        hierarchy: h.as_str().to_string(),
                        roots: hroots,
                    })
                }
            }
        }
        if !missing.is_empty() {
            return Err(OntologyError::MissingRoots(missing));
        }

        // Acyclic with one root per hierarchy: every concept reaches its root.
        let mut ancestors = HashMap::new();
        for id in concepts.keys() {
            ancestors.insert(id.clone(), collect_ancestors(&concepts, id));
        }

        let mut schemas = BTreeMap::new();
        for (id, s) in doc.action_schemas {
            match concepts.get(&id) {
                Some(c) if c.hierarchy == Hierarchy::Action => {}
                Some(_) => return Err(OntologyError::SchemaForNonAction(id)),
                None => return Err(OntologyError::UnknownConcept(id)),
            }
            if s.output_count == 0 {
                return Err(OntologyError::ZeroOutputCount(id));
            }
            schemas.insert(
                id.clone(),
                ActionSchema {
                    concept: id,
                    requires_direct_object: s.requires_do,
                    requires_prepositional_complement: s.requires_pc,
                    allowed_prepositions: s.prepositions.iter().map(|p| p.to_lowercase()).collect(),
                    output_count: s.output_count,
                },
            );
        }
        for c in concepts.values() {
            if c.hierarchy == Hierarchy::Action && !schemas.contains_key(&c.id) {
                return Err(OntologyError::MissingSchema(c.id.clone()));
            }
        }

        let mut target_sets = BTreeMap::new();
        for (trigger, members) in doc.target_sets {
            let trigger = trigger.to_lowercase();
            if members.is_empty() {
                return Err(OntologyError::InvalidTargetSet {
                    trigger,
                    reason: "no members".into(),
                });
            }
            let mut map = BTreeMap::new();
            for m in members {
                match concepts.get(&m.concept) {
                    Some(c) if c.hierarchy == Hierarchy::Food => {}
                    _ => {
                        return Err(OntologyError::InvalidTargetSet {
                            trigger,
                            reason: format!("`{}` is not a food concept", m.concept),
                        })
                    }
                }
                if !(m.weight > 0.0 && m.weight <= 1.0) {
                    return Err(OntologyError::InvalidTargetSet {
                        trigger,
                        reason: format!("weight {} of `{}` outside (0,1]", m.weight, m.concept),
                    });
                }
                map.insert(m.concept, m.weight);
            }
            target_sets.insert(
                trigger.clone(),
                TargetSet {
                    trigger_word: trigger,
                    members: map,
                },
            );
        }

        let mut lexicon: HashMap<Hierarchy, HashMap<Vec<String>, Vec<ConceptId>>> = HashMap::new();
        let mut longest_variant = 0;
        for c in concepts.values() {
            for v in &c.lexical_variants {
                longest_variant = longest_variant.max(v.len());
                let ids = lexicon.entry(c.hierarchy).or_default().entry(v.clone()).or_default();
                if !ids.contains(&c.id) {
                    ids.push(c.id.clone());
                }
            }
        }
        for table in lexicon.values_mut() {
            for ids in table.values_mut() {
                ids.sort();
            }
        }

        Ok(Ontology {
            concepts,
            children,
            roots,
            ancestors,
            schemas,
            target_sets,
            lexicon,
            longest_variant,
        })
    }

    /// Serialize back to the document format.
    pub fn to_json(&self) -> String {
        let mut hierarchies: BTreeMap<String, Vec<ConceptDoc>> = BTreeMap::new();
        for c in self.concepts.values() {
            hierarchies
                .entry(c.hierarchy.as_str().to_string())
                .or_default()
                .push(ConceptDoc {
                    id: c.id.clone(),
                    parents: c.parents.clone(),
                    variants: c.lexical_variants.iter().map(|v| v.join(" ")).collect(),
                    description: c.description.clone(),
                });
        }
        let action_schemas = self
            .schemas
            .iter()
            .map(|(id, s)| {
                (
                    id.clone(),
                    SchemaDoc {
                        requires_do: s.requires_direct_object,
                        requires_pc: s.requires_prepositional_complement,
                        prepositions: s.allowed_prepositions.clone(),
                        output_count: s.output_count,
                    },
                )
            })
            .collect();
        let target_sets = self
            .target_sets
            .iter()
            .map(|(w, t)| {
                (
                    w.clone(),
                    t.members
                        .iter()
                        .map(|(c, weight)| TargetMemberDoc {
                            concept: c.clone(),
                            weight: *weight,
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = OntologyDoc {
            hierarchies,
            action_schemas,
            target_sets,
        };
        serde_json::to_string_pretty(&doc).expect("ontology document serializes")
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn root(&self, h: Hierarchy) -> &str {
        &self.roots[&h]
    }

    pub fn children(&self, id: &str) -> &[ConceptId] {
        self.children.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_leaf(&self, id: &str) -> bool {
        self.children(id).is_empty()
    }

    pub fn in_hierarchy(&self, id: &str, h: Hierarchy) -> bool {
        self.concepts.get(id).is_some_and(|c| c.hierarchy == h)
    }

    pub fn schema(&self, action: &str) -> Option<&ActionSchema> {
        self.schemas.get(action)
    }

    pub fn target_set(&self, word: &str) -> Option<&TargetSet> {
        self.target_sets.get(word)
    }

    pub fn target_sets(&self) -> &BTreeMap<String, TargetSet> {
        &self.target_sets
    }

    /// Reflexive subsumption test within one hierarchy.
    pub fn is_a(&self, c: &str, ancestor: &str) -> Result<bool, OntologyError> {
        let cc = self
            .concepts
            .get(c)
            .ok_or_else(|| OntologyError::UnknownConcept(c.to_string()))?;
        let ac = self
            .concepts
            .get(ancestor)
            .ok_or_else(|| OntologyError::UnknownConcept(ancestor.to_string()))?;
        if cc.hierarchy != ac.hierarchy {
            return Err(OntologyError::CrossHierarchy(c.to_string(), ancestor.to_string()));
        }
        Ok(self.subsumes(ancestor, c))
    }

    /// `is_a` without error reporting: false for unknown or cross-hierarchy ids.
    pub fn subsumes(&self, ancestor: &str, c: &str) -> bool {
        c == ancestor && self.concepts.contains_key(c)
            || self.ancestors.get(c).is_some_and(|a| a.contains(ancestor))
    }

    /// Strict descendants of `id`, in id order.
    pub fn descendants(&self, id: &str) -> BTreeSet<ConceptId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&str> = self.children(id).iter().map(String::as_str).collect();
        while let Some(c) = stack.pop() {
            if out.insert(c.to_string()) {
                stack.extend(self.children(c).iter().map(String::as_str));
            }
        }
        out
    }

    /// Concepts whose variant equals a prefix of `words`, longest first.
    /// Entries of equal length are ordered by concept id.
    pub fn lexical_lookup<S: AsRef<str>>(&self, words: &[S], h: Hierarchy) -> Vec<(ConceptId, usize)> {
        let Some(table) = self.lexicon.get(&h) else {
            return Vec::new();
        };
        let max = words.len().min(self.longest_variant);
        let mut out = Vec::new();
        for len in (1..=max).rev() {
            let key: Vec<String> = words[..len].iter().map(|w| w.as_ref().to_lowercase()).collect();
            if let Some(ids) = table.get(&key) {
                out.extend(ids.iter().map(|id| (id.clone(), len)));
            }
        }
        out
    }

    /// True if `word` occurs inside some variant of the hierarchy.
    pub fn has_variant_word(&self, word: &str, h: Hierarchy) -> bool {
        self.lexicon
            .get(&h)
            .is_some_and(|t| t.keys().any(|v| v.iter().any(|w| w == word)))
    }

    /// True if some variant of the hierarchy starts with `word`.
    pub fn is_variant_start(&self, word: &str, h: Hierarchy) -> bool {
        self.lexicon
            .get(&h)
            .is_some_and(|t| t.keys().any(|v| v.first().is_some_and(|w| w == word)))
    }

    /// True if `word` alone is a complete variant in the hierarchy.
    pub fn is_single_word_variant(&self, word: &str, h: Hierarchy) -> bool {
        self.lexicon
            .get(&h)
            .is_some_and(|t| t.contains_key(&vec![word.to_string()]))
    }

    /// Ranked substitutes for `target`: generalize k ≥ 1 steps, specialize to a
    /// leaf; cost is the smallest such k. Leaves equal to or under a
    /// forbidden concept are excluded, as is `target` itself.
    pub fn substitution_candidates(
        &self,
        target: &str,
        forbidden: &BTreeSet<ConceptId>,
    ) -> Result<Vec<(ConceptId, u32)>, OntologyError> {
        let tc = self
            .concepts
            .get(target)
            .ok_or_else(|| OntologyError::UnknownConcept(target.to_string()))?;
        if tc.hierarchy != Hierarchy::Food {
            return Err(OntologyError::CrossHierarchy(
                target.to_string(),
                self.root(Hierarchy::Food).to_string(),
            ));
        }

        // Shortest generalization distance to each ancestor (reflexive).
        let mut dist: BTreeMap<&str, u32> = BTreeMap::new();
        let mut queue = VecDeque::from([(target, 0u32)]);
        while let Some((c, d)) = queue.pop_front() {
            if dist.contains_key(c) {
                continue;
            }
            dist.insert(c, d);
            for p in &self.concepts[c].parents {
                queue.push_back((p.as_str(), d + 1));
            }
        }

        let mut best: BTreeMap<ConceptId, u32> = BTreeMap::new();
        // At least one generalization step: a concept is not its own substitute
        // family, and the root has nothing above it.
        for (&anc, &k) in dist.iter().filter(|(_, &k)| k > 0) {
            for leaf in self.descendants(anc) {
                if !self.is_leaf(&leaf) || leaf == target {
                    continue;
                }
                if forbidden.iter().any(|f| self.subsumes(f, &leaf)) {
                    continue;
                }
                best.entry(leaf)
                    .and_modify(|c| *c = (*c).min(k))
                    .or_insert(k);
            }
        }
        let mut ranked: Vec<(ConceptId, u32)> = best.into_iter().collect();
        ranked.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(ranked)
    }

    /// Copy of the ontology with the lexical variants of `concept` removed,
    /// so the annotator can no longer find it in text.
    pub fn without_variants(&self, concept: &str) -> Ontology {
        let mut concepts = self.concepts.clone();
        if let Some(c) = concepts.get_mut(concept) {
            c.lexical_variants.clear();
        }
        let mut lexicon = self.lexicon.clone();
        for table in lexicon.values_mut() {
            for ids in table.values_mut() {
                ids.retain(|id| id != concept);
            }
            table.retain(|_, ids| !ids.is_empty());
        }
        Ontology {
            concepts,
            lexicon,
            ..self.clone()
        }
    }
}

fn collect_ancestors(concepts: &BTreeMap<ConceptId, Concept>, id: &str) -> BTreeSet<ConceptId> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<&str> = concepts[id].parents.iter().map(String::as_str).collect();
    while let Some(p) = stack.pop() {
        if out.insert(p.to_string()) {
            stack.extend(concepts[p].parents.iter().map(String::as_str));
        }
    }
    out
}

fn check_acyclic(concepts: &BTreeMap<ConceptId, Concept>) -> Result<(), OntologyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    for start in concepts.keys() {
        if marks.contains_key(start.as_str()) {
            continue;
        }
        // Iterative DFS over parent links.
        let mut stack: Vec<(&str, usize)> = vec![(start.as_str(), 0)];
        marks.insert(start, Mark::Open);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let parents = &concepts[node].parents;
            if *next < parents.len() {
                let p = parents[*next].as_str();
                *next += 1;
                match marks.get(p) {
                    Some(Mark::Open) => return Err(OntologyError::Cycle(p.to_string())),
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(p, Mark::Open);
                        stack.push((p, 0));
                    }
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    Ok(())
}
