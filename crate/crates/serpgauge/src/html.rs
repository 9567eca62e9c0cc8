//! Tag-based segmentation of HTML pages into scored parts.

use std::sync::LazyLock;

use scraper::node::Node;
use scraper::{ElementRef, Html, Selector};
use serpgauge_core::document::{join_text, PartTexts, SegmentedDocument};

/// Subtrees that never contribute to the body part.
const BOILERPLATE: [&str; 7] = [
    "script", "style", "noscript", "template", "nav", "footer", "head",
];

/// Elements whose boundaries separate words. Other inline markup does not.
const SEPARATING: [&str; 38] = [
    "address",
    "article",
    "aside",
    "blockquote",
    "br",
    "caption",
    "dd",
    "details",
    "dialog",
    "div",
    "dl",
    "dt",
    "fieldset",
    "figcaption",
    "figure",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "li",
    "main",
    "ol",
    "option",
    "p",
    "pre",
    "section",
    "summary",
    "table",
    "td",
    "th",
    "tr",
    "ul",
    "a",
];

fn selector(css: &str) -> Selector {
    Selector::parse(css).unwrap_or_else(|e| panic!("invalid built-in selector {css:?}: {e}"))
}

static TITLE: LazyLock<Selector> = LazyLock::new(|| selector("title"));
static DESCRIPTION: LazyLock<Selector> = LazyLock::new(|| selector("meta[name]"));
static HEADINGS: LazyLock<Selector> = LazyLock::new(|| selector("h1, h2, h3"));
static ANCHORS: LazyLock<Selector> = LazyLock::new(|| selector("a"));
static BODY: LazyLock<Selector> = LazyLock::new(|| selector("body"));

fn element_text(el: ElementRef<'_>) -> String {
    join_text([el.text().collect::<String>().as_str()])
}

fn visible_text(el: ElementRef<'_>, out: &mut String) {
    for child in el.children() {
        match child.value() {
            Node::Text(t) => out.push_str(t),
            Node::Element(e) => {
                let name = e.name();
                if BOILERPLATE.contains(&name) {
                    continue;
                }
                let separate = SEPARATING.contains(&name);
                if separate {
                    out.push(' ');
                }
                if let Some(child) = ElementRef::wrap(child) {
                    visible_text(child, out);
                }
                if separate {
                    out.push(' ');
                }
            }
            _ => {}
        }
    }
}

/// Raw text of each part of a parsed page.
pub fn extract_parts(html: &Html) -> PartTexts {
    let title = html
        .select(&TITLE)
        .next()
        .map(element_text)
        .unwrap_or_default();
    let meta = html
        .select(&DESCRIPTION)
        .filter(|m| {
            m.attr("name")
                .is_some_and(|n| n.eq_ignore_ascii_case("description"))
        })
        .filter_map(|m| m.attr("content"))
        .map(|c| join_text([c]))
        .next()
        .unwrap_or_default();
    let headings: Vec<String> = html.select(&HEADINGS).map(element_text).collect();
    let anchors: Vec<String> = html.select(&ANCHORS).map(element_text).collect();
    let mut body = String::new();
    if let Some(b) = html.select(&BODY).next() {
        visible_text(b, &mut body);
    }
    PartTexts {
        title,
        meta,
        headings: join_text(headings.iter().map(String::as_str)),
        body: join_text([body.as_str()]),
        anchors: join_text(anchors.iter().map(String::as_str)),
    }
}

/// Segments raw page bytes. Invalid UTF-8 is replaced, never rejected.
pub fn segment_html(bytes: &[u8], url: &str, fetched_at: &str) -> SegmentedDocument {
    let text = String::from_utf8_lossy(bytes);
    let html = Html::parse_document(&text);
    SegmentedDocument::new(url, fetched_at, &extract_parts(&html))
}
