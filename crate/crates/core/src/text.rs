//! Harness-side text analysis: normalization, tokenization and occurrence
//! counting over normalized token streams.
//!
//! Normalization runs, in order: canonical composition (NFC), Arabic to
//! Persian letter folding, Persian/Arabic-Indic digit folding, lowercasing,
//! and tokenization on whitespace and punctuation. The zero-width non-joiner
//! is a word-internal character in Persian and is kept inside tokens.

use alloc::string::String;
use alloc::vec::Vec;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::CoreError;

include!(concat!(env!("OUT_DIR"), "/folding.rs"));

pub const ZWNJ: char = '\u{200C}';
pub const ZWJ: char = '\u{200D}';

/// Text after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalizedText {
    /// The input exactly as supplied.
    pub raw: String,
    pub tokens: Vec<String>,
    /// Names of the folding rules that fired, in first-use order.
    pub trace: Vec<&'static str>,
}

impl NormalizedText {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

fn is_joiner(c: char) -> bool {
    c == ZWNJ || c == ZWJ
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c) || is_joiner(c)
}

fn note(trace: &mut Vec<&'static str>, rule: &'static str) {
    if !trace.contains(&rule) {
        trace.push(rule);
    }
}

/// Folds and lowercases `raw`, returning the folded string.
fn fold(raw: &str, trace: &mut Vec<&'static str>) -> String {
    let mut folded = String::with_capacity(raw.len());
    for c in raw.nfc() {
        let c = match fold_letter(c) {
            Some((to, rule)) => {
                note(trace, rule);
                to
            }
            None => c,
        };
        let c = match fold_digit(c) {
            Some((to, rule)) => {
                note(trace, rule);
                to
            }
            None => c,
        };
        if c.is_uppercase() {
            note(trace, "lowercase");
        }
        folded.extend(c.to_lowercase());
    }
    // Recompose in case a folded letter forms a canonical pair with its neighbour.
    folded.nfc().collect()
}

/// Splits already folded text into tokens.
pub fn tokenize(folded: &str) -> Vec<String> {
    folded
        .split(|c: char| !is_token_char(c))
        .map(|t| t.trim_matches(is_joiner))
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// Normalizes `raw` into a token sequence. Empty input yields no tokens.
pub fn normalize_text(raw: &str) -> NormalizedText {
    let mut trace = Vec::new();
    let folded = fold(raw, &mut trace);
    NormalizedText {
        raw: String::from(raw),
        tokens: tokenize(&folded),
        trace,
    }
}

/// A metric term (single word or phrase) in normalized token form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    tokens: Vec<String>,
}

impl Term {
    /// Normalizes `raw`; terms that normalize to zero tokens are rejected.
    pub fn parse(raw: &str) -> Result<Term, CoreError> {
        let tokens = normalize_text(raw).tokens;
        if tokens.is_empty() {
            return Err(CoreError::EmptyTerm(String::from(raw)));
        }
        Ok(Term { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Canonical text form: tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Number of (possibly overlapping) windows of `haystack` equal to `needle`.
pub fn count_windows(haystack: &[String], needle: &[String]) -> usize {
    if needle.is_empty() || needle.len() > haystack.len() {
        return 0;
    }
    haystack
        .windows(needle.len())
        .filter(|w| *w == needle)
        .count()
}

/// Occurrences of the normalized term `m` in a normalized document part.
pub fn count_occurrences(part: &NormalizedText, m: &str) -> Result<usize, CoreError> {
    let term = Term::parse(m)?;
    Ok(count_term(part, &term))
}

pub fn count_term(part: &NormalizedText, term: &Term) -> usize {
    count_windows(&part.tokens, term.tokens())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toks(s: &str) -> Vec<String> {
        normalize_text(s).tokens
    }

    #[test]
    fn arabic_kaf_folds_to_persian() {
        assert_eq!(toks("كتاب"), vec!["کتاب"]);
    }

    #[test]
    fn persian_digits_fold_to_ascii() {
        assert_eq!(toks("۱۲۳"), vec!["123"]);
        assert_eq!(toks("٤٥"), vec!["45"]);
    }

    #[test]
    fn yeh_and_teh_marbuta_fold() {
        assert_eq!(toks("علي مدرسة"), vec!["علی", "مدرسه"]);
    }

    #[test]
    fn latin_is_lowercased_and_split_on_punctuation() {
        assert_eq!(
            toks("Hello,  World! foo-bar"),
            vec!["hello", "world", "foo", "bar"]
        );
    }

    #[test]
    fn zwnj_is_kept_inside_tokens() {
        let t = toks("می\u{200C}خواهم کتاب\u{200C}ها");
        assert_eq!(t, vec!["می\u{200C}خواهم", "کتاب\u{200C}ها"]);
    }

    #[test]
    fn zwnj_at_token_edges_is_dropped() {
        assert_eq!(toks("\u{200C}abc\u{200C} \u{200C}"), vec!["abc"]);
    }

    #[test]
    fn empty_input_gives_no_tokens() {
        assert!(normalize_text("").is_empty());
        assert!(normalize_text("  ...  ").is_empty());
    }

    #[test]
    fn hamza_sequences_are_stable() {
        for raw in ["\u{0629}\u{0654}", "\u{064A}\u{0654}", "\u{06D5}\u{0654}"] {
            let once = toks(raw);
            assert_eq!(once, toks(&once.join(" ")), "{raw:?}");
        }
        // Arabic yeh + hamza above composes before folding sees it.
        assert_eq!(toks("\u{064A}\u{0654}"), vec!["\u{0626}"]);
    }

    #[test]
    fn trace_records_rules_once() {
        let n = normalize_text("كك ۱۲ A");
        assert_eq!(n.trace, vec!["arabic_kaf", "persian_digit", "lowercase"]);
    }

    #[test]
    fn single_token_count() {
        let part = normalize_text("fast car fast");
        assert_eq!(count_occurrences(&part, "fast").unwrap(), 2);
    }

    #[test]
    fn phrase_count_uses_sliding_windows() {
        let part = normalize_text("fast car fast car");
        assert_eq!(count_occurrences(&part, "fast car").unwrap(), 2);
        let overlapping = normalize_text("a a a");
        assert_eq!(count_occurrences(&overlapping, "a a").unwrap(), 2);
    }

    #[test]
    fn absent_term_counts_zero() {
        let part = normalize_text("fast car");
        assert_eq!(count_occurrences(&part, "absent").unwrap(), 0);
    }

    #[test]
    fn counting_matches_on_normalized_tokens() {
        let part = normalize_text("كتاب خوب");
        assert_eq!(count_occurrences(&part, "کتاب").unwrap(), 1);
        assert_eq!(count_occurrences(&part, "KITAB").unwrap(), 0);
    }

    #[test]
    fn empty_term_is_rejected() {
        let part = normalize_text("x");
        assert_eq!(
            count_occurrences(&part, " !! "),
            Err(CoreError::EmptyTerm(String::from(" !! ")))
        );
    }

    #[test]
    fn folding_table_version_is_exposed() {
        assert_eq!(FOLDING_TABLE_VERSION, 1);
    }
}
