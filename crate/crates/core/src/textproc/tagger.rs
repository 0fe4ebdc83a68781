//! Deterministic tag cascade keyed to the ontology lexicon.

use std::fmt;

use serde::Serialize;

use super::tokenize::Token;
use crate::ontology::{Hierarchy, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Verb,
    Noun,
    Adj,
    Det,
    Prep,
    Conj,
    Punct,
    Num,
    Other,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Verb => "VERB",
            Tag::Noun => "NOUN",
            Tag::Adj => "ADJ",
            Tag::Det => "DET",
            Tag::Prep => "PREP",
            Tag::Conj => "CONJ",
            Tag::Punct => "PUNCT",
            Tag::Num => "NUM",
            Tag::Other => "OTHER",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: Tag,
}

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "some", "each", "all", "any", "this", "these", "that", "those", "your",
    "its", "their", "another", "every", "both",
];

const PREPOSITIONS: &[&str] = &[
    "in", "on", "to", "with", "into", "onto", "from", "over", "under", "for", "at", "of", "by",
    "until", "through", "about", "around", "after", "before", "without", "between", "across",
    "along", "above", "below", "per", "within", "inside", "beside",
];

const CONJUNCTIONS: &[&str] = &["and", "or", "but", "then", "while", "nor"];

/// Coordinators that open a new clause; "while" is kept with its clause.
pub(crate) const CLAUSE_COORDINATORS: &[&str] = &["and", "or", "but", "then", "nor"];

const NUMBER_WORDS: &[&str] = &[
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "dozen", "half", "quarter-cup",
];

pub(crate) const PARTICLES: &[&str] = &["up", "down", "out", "off", "aside", "together", "away", "back"];

const FUNCTION_OTHER: &[&str] = &[
    "it", "them", "they", "everything", "itself", "themselves", "lengthwise", "overnight",
    "well", "gently", "again", "meanwhile", "immediately", "very", "too", "also", "not", "just",
    "only", "now", "first", "later", "occasionally", "constantly", "once", "thoroughly",
    "evenly", "carefully", "slowly", "quickly", "briefly", "lightly", "finely", "thinly",
    "roughly", "halfway", "more", "less", "until", "instead", "whenever", "if", "when",
];

const ADJECTIVES: &[&str] = &[
    "fresh", "large", "small", "medium", "ripe", "hot", "cold", "warm", "soft", "whole",
    "sweet", "dry", "thin", "thick", "golden", "smooth", "remaining", "green", "red", "white",
    "big", "little", "fine", "coarse", "firm", "light", "heavy", "clean", "cool", "boiling",
    "greased", "shallow", "deep", "separate", "same", "other",
];

fn is_number(word: &str) -> bool {
    let numeric = !word.is_empty()
        && word.chars().any(|c| c.is_ascii_digit())
        && word.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '/' | '-'));
    numeric || NUMBER_WORDS.contains(&word)
}

fn closed_class(tok: &Token) -> Option<Tag> {
    let w = tok.lower.as_str();
    if w.chars().count() == 1 && super::tokenize::PUNCTUATION.contains(&w.chars().next().unwrap()) {
        return Some(Tag::Punct);
    }
    if DETERMINERS.contains(&w) {
        Some(Tag::Det)
    } else if PREPOSITIONS.contains(&w) {
        Some(Tag::Prep)
    } else if CONJUNCTIONS.contains(&w) {
        Some(Tag::Conj)
    } else if is_number(w) {
        Some(Tag::Num)
    } else if PARTICLES.contains(&w) || FUNCTION_OTHER.contains(&w) {
        Some(Tag::Other)
    } else {
        None
    }
}

fn clause_initial(prev: Option<(&Token, Tag)>) -> bool {
    match prev {
        None => true,
        Some((_, Tag::Punct)) => true,
        Some((t, Tag::Conj)) => CLAUSE_COORDINATORS.contains(&t.lower.as_str()),
        _ => false,
    }
}

fn nominal_context(prev: Option<Tag>) -> bool {
    matches!(prev, Some(Tag::Det | Tag::Adj | Tag::Num | Tag::Prep))
}

/// Tag every token. Rules, first match wins: closed-class lexicon; action
/// variant outside nominal context; clause-initial action variant (even if
/// also a food word); food variant word; suffix heuristics; default NOUN.
pub fn tag(tokens: &[Token], ontology: &Ontology) -> Vec<TaggedToken> {
    let mut out: Vec<TaggedToken> = Vec::with_capacity(tokens.len());
    for (i, tok) in tokens.iter().enumerate() {
        let prev = out.last().map(|t| (&t.token, t.tag));
        let prev_tag = prev.map(|(_, t)| t);
        let w = tok.lower.as_str();
        let is_action = ontology.is_variant_start(w, Hierarchy::Action);
        let is_food = ontology.has_variant_word(w, Hierarchy::Food);
        let next_is_food = tokens
            .get(i + 1)
            .is_some_and(|n| ontology.has_variant_word(&n.lower, Hierarchy::Food));

        let tag = if let Some(t) = closed_class(tok) {
            t
        } else if is_action && !is_food && !nominal_context(prev_tag) {
            Tag::Verb
        } else if is_action && clause_initial(prev) {
            Tag::Verb
        } else if is_food {
            Tag::Noun
        } else if w.ends_with("ly") && w.len() > 3 {
            Tag::Other
        } else if (w.ends_with("ed") || w.ends_with("ing"))
            && (prev_tag == Some(Tag::Noun) || next_is_food)
        {
            Tag::Adj
        } else if ADJECTIVES.contains(&w) {
            Tag::Adj
        } else {
            Tag::Noun
        };
        out.push(TaggedToken {
            token: tok.clone(),
            tag,
        });
    }
    out
}
