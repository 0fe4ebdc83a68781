use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    /// Byte offsets into the source text.
    pub start: usize,
    pub end: usize,
    pub index: usize,
}

pub const PUNCTUATION: [char; 6] = [',', '.', ';', ':', '!', '?'];

fn is_punct(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// Split on whitespace; each punctuation mark becomes its own token. A
/// period or comma between two digits stays inside the number ("1.5").
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;

    let push = |start: usize, end: usize, tokens: &mut Vec<Token>| {
        let surface = &text[start..end];
        tokens.push(Token {
            surface: surface.to_string(),
            lower: surface.to_lowercase(),
            start,
            end,
            index: tokens.len(),
        });
    };

    for (i, &(pos, c)) in chars.iter().enumerate() {
        if c.is_whitespace() {
            if let Some(s) = word_start.take() {
                push(s, pos, &mut tokens);
            }
        } else if is_punct(c) {
            let inside_number = matches!(c, '.' | ',')
                && i > 0
                && chars[i - 1].1.is_ascii_digit()
                && chars.get(i + 1).is_some_and(|(_, n)| n.is_ascii_digit());
            if inside_number {
                continue;
            }
            if let Some(s) = word_start.take() {
                push(s, pos, &mut tokens);
            }
            push(pos, pos + c.len_utf8(), &mut tokens);
        } else if word_start.is_none() {
            word_start = Some(pos);
        }
    }
    if let Some(s) = word_start {
        push(s, text.len(), &mut tokens);
    }
    tokens
}
