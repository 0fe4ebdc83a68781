//! Rule-based acquisition of cooking recipes as typed action graphs.
//!
//! The pipeline runs text → [`textproc`] (tokens, tags, chunks, clauses) →
//! [`annotator`] (a [`graph::RecipeGraph`]). Graphs can then be checked with
//! [`graph::validate`], adapted to a substitute ingredient with
//! [`adaptation::adapt`], and repaired incrementally via [`correction`].

pub mod adaptation;
pub mod annotator;
pub mod correction;
pub mod graph;
pub mod ontology;
pub mod recipe;
pub mod textproc;

#[cfg(test)]
pub(crate) mod testutil;

pub use graph::{Arc, ArcLabel, FoodOrigin, GraphError, RecipeGraph, Vertex, VertexKind};
pub use ontology::{ConceptId, Hierarchy, Ontology, OntologyError};
pub use recipe::{Ingredient, Recipe, RecipeError};
