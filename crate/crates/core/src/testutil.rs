use crate::ontology::Ontology;
use crate::recipe::{Ingredient, Recipe};

pub(crate) const SAMPLE_ONTOLOGY: &str = include_str!("../../../fixtures/ontology.json");

pub(crate) fn sample_ontology() -> Ontology {
    Ontology::from_json(SAMPLE_ONTOLOGY).expect("sample ontology loads")
}

/// Recipe whose ingredient lines are just the concept names.
pub(crate) fn recipe(id: &str, ingredients: &[&str], text: &str) -> Recipe {
    Recipe {
        id: id.to_string(),
        title: id.to_string(),
        ingredients: ingredients
            .iter()
            .map(|c| Ingredient {
                text: c.to_lowercase(),
                concept: c.to_string(),
            })
            .collect(),
        preparation: text.to_string(),
    }
}
