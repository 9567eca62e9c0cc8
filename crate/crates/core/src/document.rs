//! Documents split into scored parts, and shallow (directly computable)
//! features over them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::{normalize_text, NormalizedText};
use crate::url::{parse_url, path_segments};
use crate::CoreError;

/// A scored part of a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Url,
    Title,
    Meta,
    Headings,
    Body,
    Anchors,
}

impl Part {
    pub const ALL: [Part; 6] = [
        Part::Url,
        Part::Title,
        Part::Meta,
        Part::Headings,
        Part::Body,
        Part::Anchors,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Part::Url => "url",
            Part::Title => "title",
            Part::Meta => "meta",
            Part::Headings => "headings",
            Part::Body => "body",
            Part::Anchors => "anchors",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Part {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Part::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| CoreError::OutOfRange {
                field: "part id",
                value: s.to_string(),
            })
    }
}

/// Raw extracted text of each non-URL part, before normalization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartTexts {
    pub title: String,
    pub meta: String,
    pub headings: String,
    pub body: String,
    pub anchors: String,
}

/// Joins text fragments with single spaces, collapsing all whitespace.
pub fn join_text<'a>(pieces: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for word in pieces.into_iter().flat_map(str::split_whitespace) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// A fetched page split into normalized parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedDocument {
    pub url: String,
    /// UTC timestamp supplied by the caller.
    pub fetched_at: String,
    parts: [NormalizedText; 6],
    pub body_length: usize,
    pub url_depth: usize,
}

/// Text of the URL part: hostname followed by the path segments.
fn url_part_text(url: &str) -> String {
    match parse_url(url) {
        Ok(parts) => {
            let mut text = parts.host.to_string();
            for seg in path_segments(&parts) {
                text.push(' ');
                text.push_str(seg);
            }
            text
        }
        Err(_) => String::new(),
    }
}

impl SegmentedDocument {
    pub fn new(url: &str, fetched_at: &str, texts: &PartTexts) -> SegmentedDocument {
        let depth = parse_url(url).map_or(0, |p| path_segments(&p).count());
        let parts = [
            normalize_text(&url_part_text(url)),
            normalize_text(&texts.title),
            normalize_text(&texts.meta),
            normalize_text(&texts.headings),
            normalize_text(&texts.body),
            normalize_text(&texts.anchors),
        ];
        let body_length = parts[Part::Body.index()].len();
        SegmentedDocument {
            url: url.to_string(),
            fetched_at: fetched_at.to_string(),
            parts,
            body_length,
            url_depth: depth,
        }
    }

    /// Stand-in for a page that could not be fetched: every part empty.
    pub fn empty(url: &str, fetched_at: &str) -> SegmentedDocument {
        let mut doc = SegmentedDocument::new(url, fetched_at, &PartTexts::default());
        doc.parts[Part::Url.index()] = NormalizedText::default();
        doc
    }

    pub fn part(&self, part: Part) -> &NormalizedText {
        &self.parts[part.index()]
    }

    pub fn parts(&self) -> impl Iterator<Item = (Part, &NormalizedText)> {
        Part::ALL.into_iter().map(move |p| (p, self.part(p)))
    }
}

pub const BODY_LENGTH: &str = "body_length";
pub const URL_DEPTH: &str = "url_depth";
pub const READABILITY: &str = "readability";
pub const SCRIPT_MARKER_PREFIX: &str = "has_script_marker:";

/// Shallow feature ids that need third-party services. They are reserved so
/// models and reports can name them, but never computed.
pub const RESERVED_SHALLOW_FEATURES: [&str; 3] = ["host_age", "publish_time", "alexa_rank"];

const SENTENCE_FINAL: [char; 5] = ['.', '!', '?', '\u{061F}', '\u{06D4}'];

/// Mean sentence length: body tokens over sentence-final punctuation marks.
pub fn readability(doc: &SegmentedDocument) -> f64 {
    let body = doc.part(Part::Body);
    let marks = body
        .raw
        .chars()
        .filter(|c| SENTENCE_FINAL.contains(c))
        .count();
    body.len() as f64 / marks.max(1) as f64
}

/// Whether the raw body text contains `marker`.
pub fn has_marker(doc: &SegmentedDocument, marker: &str) -> bool {
    !marker.is_empty() && doc.part(Part::Body).raw.contains(marker)
}

pub fn marker_feature_id(marker: &str) -> String {
    format!("{SCRIPT_MARKER_PREFIX}{marker}")
}

/// Body length, URL depth, readability, and one indicator per marker string.
pub fn shallow_features(doc: &SegmentedDocument, markers: &[String]) -> BTreeMap<String, f64> {
    let mut features = BTreeMap::new();
    features.insert(BODY_LENGTH.to_string(), doc.body_length as f64);
    features.insert(URL_DEPTH.to_string(), doc.url_depth as f64);
    features.insert(READABILITY.to_string(), readability(doc));
    for marker in markers {
        let present = if has_marker(doc, marker) { 1.0 } else { 0.0 };
        features.insert(marker_feature_id(marker), present);
    }
    features
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn doc(url: &str, body: &str) -> SegmentedDocument {
        SegmentedDocument::new(
            url,
            "2024-01-01T00:00:00Z",
            &PartTexts {
                body: body.to_string(),
                ..PartTexts::default()
            },
        )
    }

    #[test]
    fn all_six_parts_present_even_when_empty() {
        let d = doc("https://ex.com/", "");
        assert_eq!(d.parts().count(), 6);
        assert!(d.part(Part::Meta).is_empty());
    }

    #[test]
    fn url_part_holds_host_and_segments() {
        let d = doc("https://Ex.com/a/b/c.html", "");
        assert_eq!(d.url_depth, 3);
        assert_eq!(
            d.part(Part::Url).tokens,
            vec!["ex", "com", "a", "b", "c", "html"]
        );
    }

    #[test]
    fn body_length_matches_body_tokens() {
        let d = doc("https://h/x", "one two three");
        assert_eq!(d.body_length, 3);
        assert_eq!(d.url_depth, 1);
    }

    #[test]
    fn readability_is_mean_sentence_length() {
        let sentence = "w w w w w w w w w w.";
        let body = [sentence; 4].join(" ");
        let d = doc("https://h/", &body);
        assert_eq!(d.body_length, 40);
        assert_eq!(readability(&d), 10.0);
    }

    #[test]
    fn empty_body_has_zero_features() {
        let f = shallow_features(&doc("https://h/", ""), &[]);
        assert_eq!(f[BODY_LENGTH], 0.0);
        assert_eq!(f[READABILITY], 0.0);
        assert_eq!(f[URL_DEPTH], 0.0);
    }

    #[test]
    fn marker_indicator() {
        let d = doc("https://h/", "uses gtag( tracking");
        let f = shallow_features(&d, &["gtag(".to_string(), "jquery".to_string()]);
        assert_eq!(f["has_script_marker:gtag("], 1.0);
        assert_eq!(f["has_script_marker:jquery"], 0.0);
        assert!(f.values().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn part_ids_round_trip() {
        for p in Part::ALL {
            assert_eq!(p.as_str().parse::<Part>().unwrap(), p);
        }
        assert!("footer".parse::<Part>().is_err());
    }
}
