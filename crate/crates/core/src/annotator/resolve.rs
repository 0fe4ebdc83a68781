//! Reference resolution helpers: food mentions, target sets, provenance.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{FoodOrigin, RecipeGraph};
use crate::ontology::{ConceptId, Hierarchy, Ontology, TargetSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("no target set for `{0}`")]
    NoTargetSet(String),
}

/// A frontier food considered for a target-set reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub id: String,
    /// Creation order; larger is more recent.
    pub serial: u64,
    /// Ingredient concepts the food is made from.
    pub provenance: BTreeSet<ConceptId>,
}

/// Weighted Jaccard of a provenance set against a target set: summed member
/// weight of the intersection over summed weight of the union, where
/// concepts missing from the target set weigh 1.
pub fn weighted_jaccard(provenance: &BTreeSet<ConceptId>, ts: &TargetSet) -> f64 {
    let inter: f64 = provenance.iter().filter_map(|c| ts.members.get(c)).sum();
    let outside = provenance.iter().filter(|c| !ts.members.contains_key(*c)).count() as f64;
    let union: f64 = ts.members.values().sum::<f64>() + outside;
    if union == 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Best candidate for `word` by weighted Jaccard. Ties go to the most
/// recently created food; a best score of 0 leaves the word unresolved.
pub fn resolve_target_set(
    word: &str,
    candidates: &[Candidate],
    ontology: &Ontology,
) -> Result<Option<(String, f64)>, ResolveError> {
    let ts = ontology
        .target_set(word)
        .ok_or_else(|| ResolveError::NoTargetSet(word.to_string()))?;
    let mut best: Option<(&Candidate, f64)> = None;
    for c in candidates {
        let s = weighted_jaccard(&c.provenance, ts);
        let better = match best {
            None => true,
            Some((b, bs)) => s > bs || (s == bs && c.serial > b.serial),
        };
        if better {
            best = Some((c, s));
        }
    }
    Ok(best.filter(|(_, s)| *s > 0.0).map(|(c, s)| (c.id.clone(), s)))
}

/// Ingredient concepts reachable backwards from `food` through producers
/// and their inputs.
pub fn provenance(g: &RecipeGraph, food: &str) -> BTreeSet<ConceptId> {
    let mut memo = BTreeMap::new();
    provenance_memo(g, food, &mut memo, &mut BTreeSet::new())
}

fn provenance_memo(
    g: &RecipeGraph,
    food: &str,
    memo: &mut BTreeMap<String, BTreeSet<ConceptId>>,
    visiting: &mut BTreeSet<String>,
) -> BTreeSet<ConceptId> {
    if let Some(p) = memo.get(food) {
        return p.clone();
    }
    if !visiting.insert(food.to_string()) {
        return BTreeSet::new();
    }
    let mut out = BTreeSet::new();
    let producers = g.producers(food);
    if producers.is_empty() {
        if let Some(v) = g.vertex(food) {
            if matches!(v.origin, Some(FoodOrigin::IngredientList | FoodOrigin::UserAdded)) {
                out.extend(v.concept.clone());
            }
        }
    }
    for p in producers {
        let inputs: Vec<String> = g.inputs(p).map(|a| a.to.clone()).collect();
        for i in inputs {
            out.extend(provenance_memo(g, &i, memo, visiting));
        }
    }
    visiting.remove(food);
    memo.insert(food.to_string(), out.clone());
    out
}

/// Longest food-variant match anywhere in `words`; ties go to the
/// rightmost start. Returns (concept, start, length).
pub(crate) fn find_food_mention(words: &[&str], ontology: &Ontology) -> Option<(ConceptId, usize, usize)> {
    let mut best: Option<(ConceptId, usize, usize)> = None;
    for s in 0..words.len() {
        if let Some((c, len)) = ontology.lexical_lookup(&words[s..], Hierarchy::Food).into_iter().next() {
            if best.as_ref().is_none_or(|b| len >= b.2) {
                best = Some((c, s, len));
            }
        }
    }
    best
}

/// Does a food of concept `food_concept` answer a mention of `mentioned`?
/// A leaf mention also accepts more general foods ("glutinous rice" finds a
/// Rice vertex); a category mention accepts everything under it.
pub(crate) fn concept_matches(ontology: &Ontology, mentioned: &str, food_concept: &str) -> bool {
    if ontology.is_leaf(mentioned) {
        ontology.subsumes(food_concept, mentioned)
    } else {
        ontology.subsumes(mentioned, food_concept)
    }
}
