//! Text patches and the small clean-ups applied where they join the text.

use serde::{Deserialize, Serialize};

use super::AdaptError;

/// Replace `text[start..end]` by `replacement` (byte offsets).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextPatch {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

impl TextPatch {
    pub fn delete(start: usize, end: usize) -> TextPatch {
        TextPatch {
            start,
            end,
            replacement: String::new(),
        }
    }
}

fn is_sentence_end(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Apply non-overlapping patches, then tidy each junction: duplicate
/// spaces and commas collapse, a comma is followed by one space, the first
/// letter after a sentence end is capitalized and an inserted clause joined
/// mid-sentence starts lowercase. The result ends with a sentence mark
/// whenever something was patched. Text away from the junctions is left
/// byte-identical.
pub fn apply_text_patches(text: &str, patches: &[TextPatch]) -> Result<String, AdaptError> {
    if patches.is_empty() {
        return Ok(text.to_string());
    }
    let mut sorted: Vec<&TextPatch> = patches.iter().collect();
    sorted.sort_by_key(|p| (p.start, p.end));
    for p in &sorted {
        if p.start > p.end || p.end > text.len() || !text.is_char_boundary(p.start) || !text.is_char_boundary(p.end) {
            return Err(AdaptError::PatchOutOfRange {
                start: p.start,
                end: p.end,
            });
        }
    }
    for w in sorted.windows(2) {
        if w[0].end > w[1].start {
            return Err(AdaptError::OverlappingPatches {
                first: (w[0].start, w[0].end),
                second: (w[1].start, w[1].end),
            });
        }
    }

    let mut out = String::with_capacity(text.len());
    // (position, inserted text starts here)
    let mut junctions: Vec<(usize, bool)> = Vec::new();
    let mut last = 0;
    for p in &sorted {
        out.push_str(&text[last..p.start]);
        junctions.push((out.len(), !p.replacement.is_empty()));
        out.push_str(&p.replacement);
        if !p.replacement.is_empty() {
            junctions.push((out.len(), false));
        }
        last = p.end;
    }
    out.push_str(&text[last..]);

    let mut chars: Vec<char> = out.chars().collect();
    // Byte offsets → char offsets.
    let mut junctions: Vec<(usize, bool)> = junctions
        .into_iter()
        .map(|(b, ins)| (out[..b].chars().count(), ins))
        .collect();
    junctions.sort();
    junctions.dedup();
    for &(j, inserted) in junctions.iter().rev() {
        tidy_junction(&mut chars, j, inserted);
    }
    let mut result: String = chars.into_iter().collect();
    let trimmed = result.trim_end().len();
    if trimmed > 0 && !result[..trimmed].ends_with(is_sentence_end) {
        result.insert(trimmed, '.');
    }
    Ok(result)
}

fn tidy_junction(chars: &mut Vec<char>, j: usize, inserted: bool) {
    let j = j.min(chars.len());
    // Whitespace run around the junction.
    let mut a = j;
    while a > 0 && chars[a - 1].is_whitespace() {
        a -= 1;
    }
    let mut b = j;
    while b < chars.len() && chars[b].is_whitespace() {
        b += 1;
    }
    let before = a.checked_sub(1).map(|i| chars[i]);
    let after = chars.get(b).copied();

    // ", ," / ", ." / ",." → keep the later mark.
    if before == Some(',') && matches!(after, Some(',' | '.' | '!' | '?' | ';' | ':')) {
        chars.drain(a - 1..b);
        return tidy_junction(chars, a - 1, inserted);
    }
    // A clause-leading comma at the start of a sentence goes.
    let at_sentence_start = before.is_none_or(is_sentence_end);
    if at_sentence_start && after == Some(',') {
        let mut c = b + 1;
        while c < chars.len() && chars[c].is_whitespace() {
            c += 1;
        }
        chars.drain(b..c);
        return tidy_junction(chars, j.min(b), inserted);
    }

    let gap: &[char] = match (before, after) {
        (None, _) | (_, None) => &[],
        (_, Some(',' | '.' | '!' | '?' | ';' | ':')) => &[],
        (Some(_), Some(_)) if a == b => {
            // Words glued together: only split after punctuation.
            if before.is_some_and(|c| matches!(c, ',' | '.' | '!' | '?' | ';' | ':')) {
                &[' ']
            } else {
                &[]
            }
        }
        _ => &[' '],
    };
    chars.splice(a..b, gap.iter().copied());
    let first = a + gap.len();

    if let Some(c) = chars.get(first).copied() {
        if c.is_alphabetic() {
            if at_sentence_start {
                let up: Vec<char> = c.to_uppercase().collect();
                chars.splice(first..first + 1, up);
            } else if inserted && !is_acronym(chars, first) {
                let low: Vec<char> = c.to_lowercase().collect();
                chars.splice(first..first + 1, low);
            }
        }
    }
}

/// "I" or an all-caps word keeps its case.
fn is_acronym(chars: &[char], at: usize) -> bool {
    let word: Vec<char> = chars[at..].iter().take_while(|c| c.is_alphanumeric()).copied().collect();
    word.len() == 1 && word[0] == 'I' || word.len() > 1 && word.iter().all(|c| !c.is_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch(start: usize, end: usize, r: &str) -> TextPatch {
        TextPatch {
            start,
            end,
            replacement: r.into(),
        }
    }

    #[test]
    fn identity() {
        assert_eq!(apply_text_patches("Mix  it", &[]).unwrap(), "Mix  it");
    }

    #[test]
    fn deleting_sentence_start_capitalizes() {
        let text = "Peel the mangoes, slice lengthwise.";
        assert_eq!(apply_text_patches(text, &[TextPatch::delete(0, 18)]).unwrap(), "Slice lengthwise.");
    }

    #[test]
    fn mid_sentence_insert_lowercases() {
        let text = "Wash the figs, serve.";
        let out = apply_text_patches(text, &[patch(14, 14, "Quarter the figs,")]).unwrap();
        assert_eq!(out, "Wash the figs, quarter the figs, serve.");
    }

    #[test]
    fn comma_and_period_collapse() {
        let text = "Peel the mangoes, slice lengthwise and remove the pits.";
        // Drop "slice lengthwise and remove the pits".
        let out = apply_text_patches(text, &[TextPatch::delete(18, 54)]).unwrap();
        assert_eq!(out, "Peel the mangoes.");
    }

    #[test]
    fn final_period_added() {
        let out = apply_text_patches("Boil the rice. Serve", &[TextPatch::delete(0, 15)]).unwrap();
        assert_eq!(out, "Serve.");
    }

    #[test]
    fn untouched_text_kept() {
        let text = "Boil  the rice. Peel the mango. Serve  hot.";
        let out = apply_text_patches(text, &[TextPatch::delete(16, 32)]).unwrap();
        assert_eq!(out, "Boil  the rice. Serve  hot.");
    }

    #[test]
    fn overlap_rejected() {
        let err = apply_text_patches("abcdef", &[patch(0, 3, ""), patch(2, 4, "")]).unwrap_err();
        assert!(matches!(err, AdaptError::OverlappingPatches { .. }));
        assert!(apply_text_patches("abc", &[patch(2, 9, "")]).is_err());
    }
}
