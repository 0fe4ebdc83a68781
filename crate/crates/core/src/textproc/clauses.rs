use serde::Serialize;

use super::chunker::{Chunk, ChunkKind};
use super::tagger::{Tag, TaggedToken, CLAUSE_COORDINATORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TemporalMarker {
    While,
    Meanwhile,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clause {
    /// `c_<n>`, 1-based in text order.
    pub id: String,
    pub index: usize,
    pub char_start: usize,
    pub char_end: usize,
    /// Token index range `[token_start, token_end)`.
    pub token_start: usize,
    pub token_end: usize,
    pub chunks: Vec<Chunk>,
    pub temporal_marker: TemporalMarker,
    /// First clause of its sentence (or `;`/`:` segment).
    pub sentence_initial: bool,
}

impl Clause {
    pub fn verb_phrase(&self) -> Option<&Chunk> {
        self.chunks.iter().find(|c| c.kind == ChunkKind::VP)
    }

    pub fn is_actionable(&self) -> bool {
        self.verb_phrase().is_some()
    }

    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.char_start..self.char_end]
    }
}

pub fn clause_id(index: usize) -> String {
    format!("c_{index}")
}

/// Parse the 1-based index out of a `c_<n>` id.
pub fn clause_index(id: &str) -> Option<usize> {
    id.strip_prefix("c_")?.parse().ok().filter(|n| *n > 0)
}

fn is_hard_boundary(t: &TaggedToken) -> bool {
    t.tag == Tag::Punct && matches!(t.token.lower.as_str(), "." | "!" | "?" | ";" | ":")
}

fn is_soft_separator(t: &TaggedToken) -> bool {
    match t.tag {
        Tag::Punct => true,
        Tag::Conj => CLAUSE_COORDINATORS.contains(&t.token.lower.as_str()) || t.token.lower == "while",
        _ => t.token.lower == "meanwhile",
    }
}

/// Separators dropped at the edges of a clause ("while"/"meanwhile" stay).
fn is_edge_filler(t: &TaggedToken) -> bool {
    t.tag == Tag::Punct || (t.tag == Tag::Conj && CLAUSE_COORDINATORS.contains(&t.token.lower.as_str()))
}

/// Split the text into clauses holding at most one verb phrase each.
/// Hard boundaries are `. ! ? ; :`; two verb phrases inside one sentence are
/// separated at the first comma, coordinator or `while` between them.
pub fn segment_clauses(tagged: &[TaggedToken], chunks: &[Chunk]) -> Vec<Clause> {
    let mut pieces: Vec<(usize, usize, bool)> = Vec::new();
    let mut seg_start = 0;
    for i in 0..=tagged.len() {
        if i < tagged.len() && !is_hard_boundary(&tagged[i]) {
            continue;
        }
        let (s, e) = (seg_start, i);
        seg_start = i + 1;
        if s >= e {
            continue;
        }
        let vps: Vec<&Chunk> = chunks
            .iter()
            .filter(|c| c.kind == ChunkKind::VP && c.start >= s && c.start < e)
            .collect();
        let mut bounds = vec![s];
        for pair in vps.windows(2) {
            let (p, q) = (pair[0], pair[1]);
            let split = (p.end..q.start)
                .find(|&k| is_soft_separator(&tagged[k]))
                .unwrap_or(q.start);
            bounds.push(split);
        }
        bounds.push(e);
        for (n, w) in bounds.windows(2).enumerate() {
            pieces.push((w[0], w[1], n == 0));
        }
    }

    let mut clauses = Vec::new();
    for (s, e, first_in_sentence) in pieces {
        let mut a = s;
        let mut b = e;
        while a < b && is_edge_filler(&tagged[a]) {
            a += 1;
        }
        while b > a && is_edge_filler(&tagged[b - 1]) {
            b -= 1;
        }
        if a >= b {
            continue;
        }
        let index = clauses.len() + 1;
        let marker = match tagged[a].token.lower.as_str() {
            "while" => TemporalMarker::While,
            "meanwhile" => TemporalMarker::Meanwhile,
            _ => TemporalMarker::None,
        };
        clauses.push(Clause {
            id: clause_id(index),
            index,
            char_start: tagged[a].token.start,
            char_end: tagged[b - 1].token.end,
            token_start: a,
            token_end: b,
            chunks: chunks
                .iter()
                .filter(|c| c.start >= a && c.end <= b)
                .cloned()
                .collect(),
            temporal_marker: marker,
            sentence_initial: first_in_sentence,
        });
    }
    clauses
}
