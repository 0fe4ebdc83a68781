//! Rule-based linguistic front end: tokenizer, tagger, chunker and clause
//! segmenter. Every function here is pure.

mod chunker;
mod clauses;
mod tagger;
mod tokenize;

use std::fmt::Write as _;

pub use chunker::{chunk, Chunk, ChunkKind};
pub use clauses::{clause_id, clause_index, segment_clauses, Clause, TemporalMarker};
pub use tagger::{tag, Tag, TaggedToken};
pub use tokenize::{tokenize, Token};

use crate::ontology::Ontology;

/// Output of the whole front end for one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub tokens: Vec<Token>,
    pub tagged: Vec<TaggedToken>,
    pub chunks: Vec<Chunk>,
    pub clauses: Vec<Clause>,
}

impl Analysis {
    pub fn clause(&self, id: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }
}

pub fn analyze(text: &str, ontology: &Ontology) -> Analysis {
    let tokens = tokenize(text);
    let tagged = tag(&tokens, ontology);
    let chunks = chunk(&tagged);
    let clauses = segment_clauses(&tagged, &chunks);
    Analysis {
        tokens,
        tagged,
        chunks,
        clauses,
    }
}

/// `token<TAB>tag<TAB>chunk` lines, grouped under one header line per clause.
/// The chunk column uses B-/I- prefixes; tokens outside any chunk get `O`.
pub fn debug_dump(text: &str, analysis: &Analysis) -> String {
    let mut chunk_col = vec!["O".to_string(); analysis.tagged.len()];
    for c in &analysis.chunks {
        for (k, slot) in chunk_col[c.start..c.end].iter_mut().enumerate() {
            let prefix = if k == 0 { "B" } else { "I" };
            *slot = format!("{prefix}-{:?}", c.kind);
        }
    }
    let mut clause_of = vec![None; analysis.tagged.len()];
    for cl in &analysis.clauses {
        for slot in &mut clause_of[cl.token_start..cl.token_end] {
            *slot = Some(cl);
        }
    }

    let mut out = String::new();
    let mut current: Option<&str> = None;
    for (i, t) in analysis.tagged.iter().enumerate() {
        if let Some(cl) = clause_of[i] {
            if current != Some(cl.id.as_str()) {
                current = Some(cl.id.as_str());
                let _ = writeln!(
                    out,
                    "# {}\t{}..{}\tmarker={:?}\t{}",
                    cl.id,
                    cl.char_start,
                    cl.char_end,
                    cl.temporal_marker,
                    cl.text(text)
                );
            }
        }
        let _ = writeln!(out, "{}\t{}\t{}", t.token.surface, t.tag, chunk_col[i]);
    }
    out
}
