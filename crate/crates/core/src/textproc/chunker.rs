//! Greedy left-to-right shallow chunker.
//!
//! ```text
//! NP := DET? NUM? ADJ* NOUN+ ( "of" DET? NUM? ADJ* NOUN+ )?
//! PP := PREP NP
//! VP := VERB particle*
//! ```
//! A measure phrase ("a pinch of salt") is one NP whose head is taken from
//! the `of` complement.

use serde::Serialize;

use super::tagger::{Tag, TaggedToken, PARTICLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChunkKind {
    VP,
    NP,
    PP,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chunk {
    pub kind: ChunkKind,
    /// Token index range `[start, end)`.
    pub start: usize,
    pub end: usize,
    /// Token index of the main verb or head noun.
    pub head: usize,
    /// PP only.
    pub preposition: Option<String>,
}

impl Chunk {
    pub fn tokens<'a>(&self, tagged: &'a [TaggedToken]) -> &'a [TaggedToken] {
        &tagged[self.start..self.end]
    }

    /// The noun phrase part of an NP or PP, as a token range.
    pub fn noun_range(&self) -> (usize, usize) {
        match self.kind {
            ChunkKind::PP => (self.start + 1, self.end),
            _ => (self.start, self.end),
        }
    }
}

/// Match a bare NP starting at `i`; returns (end, head).
fn match_np(tagged: &[TaggedToken], i: usize) -> Option<(usize, usize)> {
    let (end, head) = match_simple_np(tagged, i)?;
    let is_of = tagged
        .get(end)
        .is_some_and(|t| t.tag == Tag::Prep && t.token.lower == "of");
    if is_of {
        if let Some((end2, head2)) = match_simple_np(tagged, end + 1) {
            return Some((end2, head2));
        }
    }
    Some((end, head))
}

fn match_simple_np(tagged: &[TaggedToken], mut i: usize) -> Option<(usize, usize)> {
    let tag_at = |k: usize| tagged.get(k).map(|t| t.tag);
    if tag_at(i) == Some(Tag::Det) {
        i += 1;
    }
    if tag_at(i) == Some(Tag::Num) {
        i += 1;
    }
    while tag_at(i) == Some(Tag::Adj) {
        i += 1;
    }
    let first_noun = i;
    while tag_at(i) == Some(Tag::Noun) {
        i += 1;
    }
    (i > first_noun).then(|| (i, i - 1))
}

pub fn chunk(tagged: &[TaggedToken]) -> Vec<Chunk> {
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < tagged.len() {
        match tagged[i].tag {
            Tag::Verb => {
                let mut end = i + 1;
                while tagged
                    .get(end)
                    .is_some_and(|t| t.tag == Tag::Other && PARTICLES.contains(&t.token.lower.as_str()))
                {
                    end += 1;
                }
                chunks.push(Chunk {
                    kind: ChunkKind::VP,
                    start: i,
                    end,
                    head: i,
                    preposition: None,
                });
                i = end;
            }
            Tag::Prep => {
                if let Some((end, head)) = match_np(tagged, i + 1) {
                    chunks.push(Chunk {
                        kind: ChunkKind::PP,
                        start: i,
                        end,
                        head,
                        preposition: Some(tagged[i].token.lower.clone()),
                    });
                    i = end;
                } else {
                    i += 1;
                }
            }
            _ => {
                if let Some((end, head)) = match_np(tagged, i) {
                    chunks.push(Chunk {
                        kind: ChunkKind::NP,
                        start: i,
                        end,
                        head,
                        preposition: None,
                    });
                    i = end;
                } else {
                    i += 1;
                }
            }
        }
    }
    chunks
}
