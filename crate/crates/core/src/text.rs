//! Tokenization shared by the topic model, clarity and sentiment features.
//!
//! Text is split on Unicode word boundaries and lowercased. Words that are
//! part of a `#hashtag` or `@mention` are dropped, as are tokens without any
//! alphabetic character.

use unicode_segmentation::UnicodeSegmentation;

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut prev: Option<&str> = None;
    for piece in text.split_word_bounds() {
        let marker = matches!(prev, Some("#") | Some("@"));
        prev = Some(piece);
        if marker {
            continue;
        }
        if piece.chars().any(char::is_alphabetic) {
            out.push(piece.to_lowercase());
        }
    }
    out
}
