use serde::{Deserialize, Serialize};

/// Reserved replacement for masked words. Never split by the tokenizer.
pub const MASK_TOKEN: &str = "<MASK>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Case-folded form used for every lookup.
    pub surface: String,
    pub original: String,
    /// Position in the utterance, 0-based.
    pub index: usize,
}

impl Token {
    pub fn new(original: &str, index: usize) -> Self {
        let surface = if original == MASK_TOKEN {
            original.to_string()
        } else {
            original.to_lowercase()
        };
        Token {
            surface,
            original: original.to_string(),
            index,
        }
    }

    pub fn is_punctuation(&self) -> bool {
        self.original.chars().all(is_punct)
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{201C}'
                | '\u{201D}'
                | '\u{2018}'
                | '\u{2019}'
                | '\u{2026}'
                | '\u{2013}'
                | '\u{2014}'
                | '\u{00AB}'
                | '\u{00BB}'
                | '\u{00BF}'
                | '\u{00A1}'
        )
}

/// Splits on whitespace, then peels leading and trailing punctuation off each
/// chunk as single-character tokens. Interior punctuation ("don't", "e-mail")
/// stays attached.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut pieces: Vec<&str> = Vec::new();
    for chunk in text.split_whitespace() {
        if chunk == MASK_TOKEN {
            pieces.push(chunk);
            continue;
        }
        let mut rest = chunk;
        while let Some(c) = rest.chars().next().filter(|&c| is_punct(c)) {
            pieces.push(&rest[..c.len_utf8()]);
            rest = &rest[c.len_utf8()..];
        }
        let mut trailing = Vec::new();
        while let Some(c) = rest.chars().next_back().filter(|&c| is_punct(c)) {
            let at = rest.len() - c.len_utf8();
            trailing.push(&rest[at..]);
            rest = &rest[..at];
        }
        if !rest.is_empty() {
            pieces.push(rest);
        }
        pieces.extend(trailing.into_iter().rev());
    }
    pieces
        .into_iter()
        .enumerate()
        .map(|(i, p)| Token::new(p, i))
        .collect()
}

/// Joins token originals with single spaces.
pub fn detokenize(tokens: &[Token]) -> String {
    let parts: Vec<&str> = tokens.iter().map(|t| t.original.as_str()).collect();
    parts.join(" ")
}
