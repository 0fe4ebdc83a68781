//! Recipe input documents.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ConceptId, Hierarchy, Ontology};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecipeError {
    #[error("malformed recipe document: {0}")]
    Malformed(String),
    #[error("ingredient `{text}` refers to `{concept}`, which is not a food concept")]
    UnknownIngredient { text: String, concept: ConceptId },
    #[error("preparation text is empty")]
    EmptyPreparation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ingredient {
    /// The ingredient line as written, quantity included.
    pub text: String,
    pub concept: ConceptId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub id: String,
    pub title: String,
    pub ingredients: Vec<Ingredient>,
    pub preparation: String,
}

impl Recipe {
    pub fn from_json(text: &str) -> Result<Recipe, RecipeError> {
        serde_json::from_str(text).map_err(|e| RecipeError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("recipe serializes")
    }

    /// Check ingredient concepts and that there is text to annotate.
    pub fn check(&self, ontology: &Ontology) -> Result<(), RecipeError> {
        for ing in &self.ingredients {
            if !ontology.in_hierarchy(&ing.concept, Hierarchy::Food) {
                return Err(RecipeError::UnknownIngredient {
                    text: ing.text.clone(),
                    concept: ing.concept.clone(),
                });
            }
        }
        if self.preparation.trim().is_empty() {
            return Err(RecipeError::EmptyPreparation);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{recipe, sample_ontology};

    #[test]
    fn json_round_trip() {
        let r = recipe("mango", &["Mango"], "Peel the mangoes.");
        assert_eq!(Recipe::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn check_rejects_bad_input() {
        let o = sample_ontology();
        assert_eq!(
            recipe("x", &["Peel"], "Peel.").check(&o),
            Err(RecipeError::UnknownIngredient {
                text: "peel".into(),
                concept: "Peel".into()
            })
        );
        assert_eq!(recipe("x", &["Mango"], "  ").check(&o), Err(RecipeError::EmptyPreparation));
        assert!(Recipe::from_json("{").is_err());
    }
}
