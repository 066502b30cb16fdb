//! The closed glyph set that every transcript is drawn from.

use crate::error::{Error, Result};

/// Canonical alphabet in display order: digits, separators, fit letters,
/// then symbols. The minus sign is the ASCII hyphen-minus.
pub const ALPHABET: [char; 21] = [
    '0', '1', '2', '3', '4', '5', '6', '7', '8', '9', '.', ',', 'F', 'G', 'H', 'K', 'M', '+', '-',
    '∓', '∅',
];

pub const DIGITS: [char; 10] = ['0', '1', '2', '3', '4', '5', '6', '7', '8', '9'];

/// Letters used for fits and datum references.
pub const FIT_LETTERS: [char; 5] = ['F', 'G', 'H', 'K', 'M'];

pub const DIAMETER: char = '∅';
pub const MINUS_PLUS: char = '∓';

pub fn contains(c: char) -> bool {
    ALPHABET.contains(&c)
}

pub fn index_of(c: char) -> Option<usize> {
    ALPHABET.iter().position(|&g| g == c)
}

/// Rejects empty strings and any glyph outside [`ALPHABET`].
pub fn check_text(text: &str) -> Result<()> {
    if text.is_empty() {
        return Err(Error::domain("transcript must not be empty"));
    }
    match text.chars().find(|&c| !contains(c)) {
        Some(c) => Err(Error::domain(format!(
            "glyph {c:?} in {text:?} is not in the alphabet"
        ))),
        None => Ok(()),
    }
}
