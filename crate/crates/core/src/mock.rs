//! Synthetic corpus and mock search engines with switchable component
//! defects.
//!
//! The corpus is generated together with a query set. Each analyzer probe is
//! answerable only through one processing step of the mock engine, so
//! disabling that step empties the probe's result list and nothing else.
//! Vocabularies are disjoint: filler text uses the vowels a/o/u, probe and
//! ranking words use e/i, and no document contains digits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::document::{join_text, PartTexts, SegmentedDocument};
use crate::query::{QuerySet, QuerySpec, QueryType};
use crate::rng::{stable_hash, SeededRng};
use crate::serp::{Serp, SerpEntry};
use crate::taxonomy::Component;
use crate::CoreError;

pub const MIN_CORPUS_SIZE: usize = 100;
pub const MAX_DEFAULT_QUERIES: usize = 50;
pub const MOCK_RETRIEVED_AT: &str = "2024-01-01T00:00:00Z";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Defect {
    NoDigitFolding,
    NoCharFolding,
    NoCompoundSplit,
    NoSpellCorrection,
    NoSynonymExpansion,
    ShuffledRank,
}

impl Defect {
    pub const ALL: [Defect; 6] = [
        Defect::NoDigitFolding,
        Defect::NoCharFolding,
        Defect::NoCompoundSplit,
        Defect::NoSpellCorrection,
        Defect::NoSynonymExpansion,
        Defect::ShuffledRank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Defect::NoDigitFolding => "no_digit_folding",
            Defect::NoCharFolding => "no_char_folding",
            Defect::NoCompoundSplit => "no_compound_split",
            Defect::NoSpellCorrection => "no_spell_correction",
            Defect::NoSynonymExpansion => "no_synonym_expansion",
            Defect::ShuffledRank => "shuffled_rank",
        }
    }

    /// The component whose behaviour the defect breaks.
    pub fn component(self) -> Component {
        match self {
            Defect::NoDigitFolding | Defect::NoCharFolding => Component::Normalizer,
            Defect::NoCompoundSplit => Component::Tokenizer,
            Defect::NoSpellCorrection => Component::SpellCorrection,
            Defect::NoSynonymExpansion => Component::QueryExpansion,
            Defect::ShuffledRank => Component::Ranking,
        }
    }
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Defect {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Defect::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CoreError::UnknownDefect(s.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DefectSet(BTreeSet<Defect>);

impl DefectSet {
    pub fn none() -> DefectSet {
        DefectSet::default()
    }

    pub fn only(defect: Defect) -> DefectSet {
        DefectSet(BTreeSet::from([defect]))
    }

    /// Parses a comma-separated flag list; `""` and `"none"` give no defects.
    pub fn parse(list: &str) -> Result<DefectSet, CoreError> {
        let mut set = BTreeSet::new();
        for flag in list.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            if flag != "none" {
                set.insert(flag.parse()?);
            }
        }
        Ok(DefectSet(set))
    }

    pub fn contains(&self, d: Defect) -> bool {
        self.0.contains(&d)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Defect> + '_ {
        self.0.iter().copied()
    }

    /// Engine id of a mock engine carrying these defects.
    pub fn engine_id(&self) -> String {
        if self.0.is_empty() {
            return "mock-clean".to_string();
        }
        let flags: Vec<&str> = self.iter().map(Defect::as_str).collect();
        format!("mock-{}", flags.join("."))
    }
}

const NUMERALS: [(u32, &str, &str); 29] = [
    (1, "one", "first"),
    (2, "two", "second"),
    (3, "three", "third"),
    (4, "four", "fourth"),
    (5, "five", "fifth"),
    (6, "six", "sixth"),
    (7, "seven", "seventh"),
    (8, "eight", "eighth"),
    (9, "nine", "ninth"),
    (10, "ten", "tenth"),
    (11, "eleven", "eleventh"),
    (12, "twelve", "twelfth"),
    (13, "thirteen", "thirteenth"),
    (14, "fourteen", "fourteenth"),
    (15, "fifteen", "fifteenth"),
    (16, "sixteen", "sixteenth"),
    (17, "seventeen", "seventeenth"),
    (18, "eighteen", "eighteenth"),
    (19, "nineteen", "nineteenth"),
    (20, "twenty", "twentieth"),
    (30, "thirty", "thirtieth"),
    (40, "forty", "fortieth"),
    (50, "fifty", "fiftieth"),
    (60, "sixty", "sixtieth"),
    (70, "seventy", "seventieth"),
    (80, "eighty", "eightieth"),
    (90, "ninety", "ninetieth"),
    (100, "hundred", "hundredth"),
    (1000, "thousand", "thousandth"),
];

const NAV_LINKS: [(&str, &str); 2] = [("/", "home"), ("/about.html", "about")];

const RESERVED: [&str; 6] = ["home", "about", "example", "news", "archive", "copyright"];

fn ordinal_suffix(n: u32) -> &'static str {
    match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

fn persian_digits(n: u32) -> String {
    n.to_string()
        .chars()
        .map(|c| char::from_u32(0x06F0 + c.to_digit(10).unwrap_or(0)).unwrap_or(c))
        .collect()
}

fn base26(mut n: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (n % 26) as u8);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).unwrap_or_default()
}

/// Arabic code points the mock engine's character folding understands.
fn fold_arabic_char(c: char) -> char {
    match c {
        '\u{064A}' => '\u{06CC}',
        '\u{0643}' => '\u{06A9}',
        '\u{0629}' => '\u{0647}',
        c => c,
    }
}

fn to_arabic_form(word: &str) -> String {
    word.chars()
        .map(|c| match c {
            '\u{06CC}' => '\u{064A}',
            '\u{06A9}' => '\u{0643}',
            c => c,
        })
        .collect()
}

fn ascii_digit(c: char) -> Option<char> {
    let d = match c {
        '0'..='9' => return Some(c),
        '\u{06F0}'..='\u{06F9}' => c as u32 - 0x06F0,
        '\u{0660}'..='\u{0669}' => c as u32 - 0x0660,
        _ => return None,
    };
    char::from_digit(d, 10)
}

/// Spelled-out form of a numeric token such as `17` or `17th`.
fn numeral_word(token: &str) -> Option<&'static str> {
    let digits_end = token
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(token.len());
    if digits_end == 0 {
        return None;
    }
    let n: u32 = token[..digits_end].parse().ok()?;
    let suffix = &token[digits_end..];
    let (_, cardinal, ordinal) = NUMERALS.iter().find(|(v, _, _)| *v == n)?;
    if suffix.is_empty() {
        Some(cardinal)
    } else if suffix == ordinal_suffix(n) {
        Some(ordinal)
    } else {
        None
    }
}

/// Mock-engine tokenizer: lowercase, split on anything not alphanumeric.
fn raw_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Engine-side lexical resources, generated with the corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub compounds: BTreeMap<String, Vec<String>>,
    pub spelling: BTreeMap<String, String>,
    pub synonyms: BTreeMap<String, Vec<String>>,
}

impl Lexicon {
    /// Normalization and token splitting shared by documents and queries.
    fn analyze(&self, token: &str, defects: &DefectSet, out: &mut Vec<String>) {
        let simple = token.bytes().all(|b| b.is_ascii_lowercase());
        if simple && !self.compounds.contains_key(token) {
            out.push(token.to_string());
            return;
        }
        let mut t: String = if defects.contains(Defect::NoCharFolding) {
            token.to_string()
        } else {
            token.chars().map(fold_arabic_char).collect()
        };
        if !defects.contains(Defect::NoDigitFolding) {
            t = t.chars().map(|c| ascii_digit(c).unwrap_or(c)).collect();
            if let Some(word) = numeral_word(&t) {
                t = word.to_string();
            }
        }
        match self.compounds.get(&t) {
            Some(parts) if !defects.contains(Defect::NoCompoundSplit) => {
                out.extend(parts.iter().cloned())
            }
            _ => out.push(t),
        }
    }

    fn query_terms(&self, query: &str, defects: &DefectSet) -> BTreeSet<String> {
        let mut analyzed = Vec::new();
        for t in raw_tokens(query) {
            self.analyze(&t, defects, &mut analyzed);
        }
        let mut terms = BTreeSet::new();
        for mut t in analyzed {
            if !defects.contains(Defect::NoSpellCorrection) {
                if let Some(fixed) = self.spelling.get(&t) {
                    t = fixed.clone();
                }
            }
            if !defects.contains(Defect::NoSynonymExpansion) {
                if let Some(syns) = self.synonyms.get(&t) {
                    terms.extend(syns.iter().cloned());
                }
            }
            terms.insert(t);
        }
        terms
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockDocument {
    pub id: usize,
    pub url: String,
    pub host: String,
    pub title: String,
    pub meta: String,
    pub heading: String,
    pub paragraphs: Vec<String>,
    /// (href, text) pairs inside the main content.
    pub links: Vec<(String, String)>,
}

impl MockDocument {
    pub fn render_html(&self) -> String {
        let mut html = String::new();
        html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
        html.push_str(&format!("<title>{}</title>\n", escape(&self.title)));
        html.push_str(&format!(
            "<meta name=\"description\" content=\"{}\">\n",
            escape(&self.meta)
        ));
        html.push_str("</head>\n<body>\n<nav>");
        for (href, text) in NAV_LINKS {
            html.push_str(&format!("<a href=\"{href}\">{text}</a> "));
        }
        html.push_str("</nav>\n<main>\n");
        html.push_str(&format!("<h1>{}</h1>\n", escape(&self.heading)));
        for p in &self.paragraphs {
            html.push_str(&format!("<p>{}</p>\n", escape(p)));
        }
        html.push_str("<ul>");
        for (href, text) in &self.links {
            html.push_str(&format!(
                "<li><a href=\"{}\">{}</a></li>",
                escape(href),
                escape(text)
            ));
        }
        html.push_str("</ul>\n</main>\n");
        html.push_str(&format!(
            "<footer><p>copyright {}</p></footer>\n</body>\n</html>\n",
            escape(&self.host)
        ));
        html
    }

    /// Part texts as the harness extracts them from [`Self::render_html`]:
    /// navigation and footer are boilerplate and excluded from the body.
    pub fn part_texts(&self) -> PartTexts {
        let link_texts = self.links.iter().map(|(_, t)| t.as_str());
        PartTexts {
            title: join_text([self.title.as_str()]),
            meta: join_text([self.meta.as_str()]),
            headings: join_text([self.heading.as_str()]),
            body: join_text(
                core::iter::once(self.heading.as_str())
                    .chain(self.paragraphs.iter().map(String::as_str))
                    .chain(link_texts.clone()),
            ),
            anchors: join_text(NAV_LINKS.iter().map(|(_, t)| *t).chain(link_texts)),
        }
    }

    pub fn segmented(&self, fetched_at: &str) -> SegmentedDocument {
        SegmentedDocument::new(&self.url, fetched_at, &self.part_texts())
    }

    /// Everything the mock engine indexes, in mock-token form.
    fn indexed_tokens(&self) -> Vec<String> {
        let mut out: Vec<String> = raw_tokens(&self.url).collect();
        for text in [&self.title, &self.meta, &self.heading] {
            out.extend(raw_tokens(text));
        }
        for p in &self.paragraphs {
            out.extend(raw_tokens(p));
        }
        for (_, t) in NAV_LINKS {
            out.extend(raw_tokens(t));
        }
        for (_, t) in &self.links {
            out.extend(raw_tokens(t));
        }
        out
    }

    fn snippet(&self) -> String {
        let words: Vec<&str> = self
            .paragraphs
            .iter()
            .flat_map(|p| p.split_whitespace())
            .take(12)
            .collect();
        words.join(" ")
    }
}

/// Leaves the synthetic query set covers, in allocation order.
pub const MOCK_LEAVES: [&str; 9] = [
    "normalizer/numbers/cardinal",
    "normalizer/numbers/ordinal",
    "normalizer/multi_form/positional_forms",
    "tokenizer/joined_terms",
    "spell_correction/keyboard_order",
    "query_expansion/synonyms",
    "ranking/navigational",
    "ranking/trend_single_url",
    "ranking/known_items",
];

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const FILLER_VOWELS: &[u8] = b"aou";
const PROBE_VOWELS: &[u8] = b"ei";
const PERSIAN_LETTERS: [char; 9] = ['ب', 'ت', 'د', 'ر', 'س', 'م', 'ن', 'و', 'ل'];
const U_SIZE: usize = 4;
const NOISE_DOCS: usize = 5;
const MENTION_DOCS: usize = 4;

struct Words {
    rng: SeededRng,
    used: BTreeSet<String>,
    filler: Vec<String>,
}

impl Words {
    fn new(seed: u64) -> Words {
        let mut used: BTreeSet<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        for (_, c, o) in NUMERALS {
            used.insert(c.to_string());
            used.insert(o.to_string());
        }
        let mut words = Words {
            rng: SeededRng::new(seed),
            used,
            filler: Vec::new(),
        };
        for _ in 0..600 {
            let w = words.cv_word(FILLER_VOWELS);
            words.filler.push(w);
        }
        words
    }

    fn cv_word(&mut self, vowels: &[u8]) -> String {
        loop {
            let syllables = self.rng.between(2, 3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push(CONSONANTS[self.rng.below(CONSONANTS.len())] as char);
                w.push(vowels[self.rng.below(vowels.len())] as char);
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn probe(&mut self) -> String {
        self.cv_word(PROBE_VOWELS)
    }

    fn persian(&mut self) -> String {
        loop {
            let mut w = String::from('\u{06A9}');
            for _ in 0..self.rng.between(2, 3) {
                w.push(PERSIAN_LETTERS[self.rng.below(PERSIAN_LETTERS.len())]);
            }
            w.push('\u{06CC}');
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn typo_of(&mut self, word: &str) -> String {
        let chars: Vec<char> = word.chars().collect();
        for _ in 0..32 {
            let i = self.rng.below(chars.len() - 1);
            let mut t = chars.clone();
            t.swap(i, i + 1);
            let t: String = t.into_iter().collect();
            if t != word && self.used.insert(t.clone()) {
                return t;
            }
        }
        // Swaps of a CV word can only collide a handful of times; pad instead.
        let t = format!("{word}{word}");
        self.used.insert(t.clone());
        t
    }

    fn filler_word(&mut self) -> String {
        self.filler[self.rng.below(self.filler.len())].clone()
    }

    fn sentence(&mut self, len: usize) -> String {
        let words: Vec<String> = (0..len).map(|_| self.filler_word()).collect();
        format!("{}.", words.join(" "))
    }
}

/// A document under construction; the URL is fixed once its id is known.
struct Draft {
    host: String,
    kind: UrlKind,
    title: String,
    meta: String,
    heading: String,
    paragraphs: Vec<String>,
}

#[derive(Clone)]
enum UrlKind {
    Home,
    Section(String),
    News,
    Archive(String),
}

impl Words {
    fn draft(&mut self) -> Draft {
        let host = self.filler_word();
        let section = self.filler_word();
        let title = format!("{} {}", self.filler_word(), self.filler_word());
        let meta = (0..5)
            .map(|_| self.filler_word())
            .collect::<Vec<_>>()
            .join(" ");
        let heading = self.filler_word();
        let paragraphs = (0..self.rng.between(2, 4))
            .map(|_| {
                let len = self.rng.between(6, 14);
                self.sentence(len)
            })
            .collect();
        Draft {
            host,
            kind: UrlKind::Section(section),
            title,
            meta,
            heading,
            paragraphs,
        }
    }

    /// Inserts `phrase` at a random word boundary of a random paragraph.
    fn plant(&mut self, draft: &mut Draft, phrase: &str) {
        let p = self.rng.below(draft.paragraphs.len());
        let mut words: Vec<&str> = draft.paragraphs[p].split(' ').collect();
        let at = self.rng.below(words.len());
        words.insert(at, phrase);
        draft.paragraphs[p] = words.join(" ");
    }
}

#[derive(Debug, Clone)]
pub struct MockCorpus {
    pub seed: u64,
    pub documents: Vec<MockDocument>,
    pub queries: Vec<QuerySpec>,
    pub lexicon: Lexicon,
    index: Vec<Vec<String>>,
}

fn spec(
    id: String,
    leaf: &str,
    component: Component,
    query_type: QueryType,
    text: String,
) -> QuerySpec {
    QuerySpec {
        query_id: id,
        component,
        domain_path: leaf.to_string(),
        query_text: text,
        query_type,
        descriptive_terms: Vec::new(),
        exclusive_terms: Vec::new(),
        evidence_terms: Vec::new(),
        expected_urls: Vec::new(),
        u_set: Vec::new(),
    }
}

/// Default number of synthetic queries for a corpus of `size` documents.
pub fn default_query_count(size: usize) -> usize {
    (size / 10).clamp(1, MAX_DEFAULT_QUERIES)
}

impl MockCorpus {
    pub fn build(seed: u64, size: usize) -> Result<MockCorpus, CoreError> {
        MockCorpus::build_with_queries(seed, size, default_query_count(size))
    }

    pub fn build_with_queries(
        seed: u64,
        size: usize,
        n_queries: usize,
    ) -> Result<MockCorpus, CoreError> {
        if size < MIN_CORPUS_SIZE {
            return Err(CoreError::OutOfRange {
                field: "corpus size",
                value: size.to_string(),
            });
        }
        let mut w = Words::new(seed);
        let mut drafts: Vec<Draft> = Vec::new();
        let mut queries = Vec::new();
        // Per query: URL references resolved after ids are assigned.
        let mut expected: Vec<Vec<usize>> = Vec::new();
        let mut u_sets: Vec<Vec<usize>> = Vec::new();
        let mut lexicon = Lexicon::default();
        let mut numerals: Vec<usize> = (0..NUMERALS.len()).collect();
        w.rng.shuffle(&mut numerals);

        for i in 0..n_queries {
            let leaf = MOCK_LEAVES[i % MOCK_LEAVES.len()];
            let id = format!("q{:03}", i + 1);
            let mut exp = Vec::new();
            let mut u = Vec::new();
            let probe = |text: String,
                         evidence: String,
                         component,
                         w: &mut Words,
                         drafts: &mut Vec<Draft>| {
                let mut q = spec(id.clone(), leaf, component, QueryType::AnalyzerProbe, text);
                for _ in 0..w.rng.between(5, 8) {
                    let mut d = w.draft();
                    for _ in 0..w.rng.between(1, 3) {
                        w.plant(&mut d, &evidence);
                    }
                    drafts.push(d);
                }
                q.evidence_terms.push(evidence);
                q
            };
            let q = match leaf {
                "normalizer/numbers/cardinal" | "normalizer/numbers/ordinal" => {
                    let (n, cardinal, ordinal) =
                        NUMERALS[numerals[(i / MOCK_LEAVES.len()) % NUMERALS.len()]];
                    if leaf.ends_with("cardinal") {
                        probe(
                            persian_digits(n),
                            cardinal.to_string(),
                            Component::Normalizer,
                            &mut w,
                            &mut drafts,
                        )
                    } else {
                        let text = format!("{n}{}", ordinal_suffix(n));
                        probe(
                            text,
                            ordinal.to_string(),
                            Component::Normalizer,
                            &mut w,
                            &mut drafts,
                        )
                    }
                }
                "normalizer/multi_form/positional_forms" => {
                    let word = w.persian();
                    probe(
                        to_arabic_form(&word),
                        word,
                        Component::Normalizer,
                        &mut w,
                        &mut drafts,
                    )
                }
                "tokenizer/joined_terms" => {
                    let (a, b) = (w.probe(), w.probe());
                    let joined = format!("{a}{b}");
                    w.used.insert(joined.clone());
                    lexicon
                        .compounds
                        .insert(joined.clone(), vec![a.clone(), b.clone()]);
                    probe(
                        joined,
                        format!("{a} {b}"),
                        Component::Tokenizer,
                        &mut w,
                        &mut drafts,
                    )
                }
                "spell_correction/keyboard_order" => {
                    let word = w.probe();
                    let typo = w.typo_of(&word);
                    lexicon.spelling.insert(typo.clone(), word.clone());
                    probe(typo, word, Component::SpellCorrection, &mut w, &mut drafts)
                }
                "query_expansion/synonyms" => {
                    let (word, synonym) = (w.probe(), w.probe());
                    lexicon.synonyms.insert(word.clone(), vec![synonym.clone()]);
                    probe(
                        word,
                        synonym,
                        Component::QueryExpansion,
                        &mut w,
                        &mut drafts,
                    )
                }
                "ranking/navigational" => {
                    let brand = w.probe();
                    let mut home = w.draft();
                    home.host = brand.clone();
                    home.kind = UrlKind::Home;
                    home.title = format!("{brand} {}", w.filler_word());
                    home.heading = brand.clone();
                    for _ in 0..2 {
                        w.plant(&mut home, &brand);
                    }
                    exp.push(drafts.len());
                    drafts.push(home);
                    for _ in 0..MENTION_DOCS {
                        let mut d = w.draft();
                        w.plant(&mut d, &brand);
                        drafts.push(d);
                    }
                    spec(
                        id.clone(),
                        leaf,
                        Component::Ranking,
                        QueryType::Navigational,
                        brand,
                    )
                }
                "ranking/trend_single_url" => {
                    let (a, b) = (w.probe(), w.probe());
                    let phrase = format!("{a} {b}");
                    let mut article = w.draft();
                    article.kind = UrlKind::News;
                    article.title = phrase.clone();
                    article.heading = phrase.clone();
                    for _ in 0..2 {
                        w.plant(&mut article, &phrase);
                    }
                    exp.push(drafts.len());
                    drafts.push(article);
                    for k in 0..MENTION_DOCS {
                        let mut d = w.draft();
                        w.plant(&mut d, if k % 2 == 0 { &a } else { &b });
                        drafts.push(d);
                    }
                    spec(
                        id.clone(),
                        leaf,
                        Component::Ranking,
                        QueryType::TrendSingleUrl,
                        phrase,
                    )
                }
                _ => {
                    let (a, b, c, x) = (w.probe(), w.probe(), w.probe(), w.probe());
                    let text = format!("{a} {b} {c}");
                    // Identically shaped members keep every expectation band tight.
                    for _ in 0..U_SIZE {
                        let mut d = w.draft();
                        d.title = text.clone();
                        d.heading = text.clone();
                        let mut s1 = w.sentence(8);
                        s1.insert_str(0, &format!("{a} {b} {c} "));
                        let mut s2 = w.sentence(8);
                        s2.insert_str(0, &format!("{a} {b} {c} {x} "));
                        d.paragraphs = vec![s1, w.sentence(10), s2];
                        u.push(drafts.len());
                        drafts.push(d);
                    }
                    for _ in 0..NOISE_DOCS {
                        let mut d = w.draft();
                        d.kind = UrlKind::Archive(w.filler_word());
                        w.plant(&mut d, &c);
                        drafts.push(d);
                    }
                    let mut q = spec(
                        id.clone(),
                        leaf,
                        Component::Ranking,
                        QueryType::KnownItem,
                        text,
                    );
                    q.descriptive_terms = vec![format!("{a} {b}"), c.clone()];
                    q.exclusive_terms = vec![x];
                    q
                }
            };
            queries.push(q);
            expected.push(exp);
            u_sets.push(u);
        }

        if drafts.len() > size {
            return Err(CoreError::OutOfRange {
                field: "corpus size",
                value: format!(
                    "{size} (the {n_queries}-query set plants {} documents)",
                    drafts.len()
                ),
            });
        }
        while drafts.len() < size {
            let d = w.draft();
            drafts.push(d);
        }

        let urls: Vec<String> = drafts
            .iter()
            .enumerate()
            .map(|(id, d)| match &d.kind {
                UrlKind::Home => format!("https://{}.example/", d.host),
                UrlKind::Section(s) => {
                    format!("https://{}.example/{s}/d{}.html", d.host, base26(id))
                }
                UrlKind::News => format!("https://{}.example/news/d{}.html", d.host, base26(id)),
                UrlKind::Archive(s) => {
                    format!(
                        "https://{}.example/{s}/archive/d{}.html",
                        d.host,
                        base26(id)
                    )
                }
            })
            .collect();

        let mut documents = Vec::with_capacity(drafts.len());
        for (id, d) in drafts.into_iter().enumerate() {
            let links = (0..2)
                .map(|_| {
                    let target = urls[w.rng.below(urls.len())].clone();
                    (target, w.filler_word())
                })
                .collect();
            documents.push(MockDocument {
                id,
                url: urls[id].clone(),
                host: format!("{}.example", d.host),
                title: d.title,
                meta: d.meta,
                heading: d.heading,
                paragraphs: d.paragraphs,
                links,
            });
        }
        let resolve = |refs: &[usize]| refs.iter().map(|i| urls[*i].clone()).collect();
        for ((q, exp), u) in queries.iter_mut().zip(&expected).zip(&u_sets) {
            q.expected_urls = resolve(exp);
            q.u_set = resolve(u);
        }

        let index = documents.iter().map(MockDocument::indexed_tokens).collect();
        Ok(MockCorpus {
            seed,
            documents,
            queries,
            lexicon,
            index,
        })
    }

    pub fn query_set(&self) -> QuerySet {
        QuerySet {
            queries: self.queries.clone(),
            v_overrides: BTreeMap::new(),
        }
    }

    pub fn document_by_url(&self, url: &str) -> Option<&MockDocument> {
        self.documents.iter().find(|d| d.url == url)
    }

    /// Documents whose title or body holds one of the query's evidence terms,
    /// counted with the harness's own normalization.
    pub fn evidence_coverage(&self, query: &QuerySpec) -> usize {
        use crate::document::Part;
        use crate::text::{count_term, Term};
        let terms: Vec<Term> = query
            .evidence_terms
            .iter()
            .filter_map(|t| Term::parse(t).ok())
            .collect();
        self.documents
            .iter()
            .filter(|d| {
                let seg = d.segmented(MOCK_RETRIEVED_AT);
                terms.iter().any(|t| {
                    count_term(seg.part(Part::Title), t) + count_term(seg.part(Part::Body), t) > 0
                })
            })
            .count()
    }
}

/// Runs `query_text` against the corpus as an engine with `defects` would.
/// Results are ranked by total term frequency over all indexed text, ties
/// broken by document id; documents without any match are not returned.
pub fn mock_search(
    corpus: &MockCorpus,
    defects: &DefectSet,
    query_id: &str,
    query_text: &str,
    count: usize,
) -> Serp {
    let terms = corpus.lexicon.query_terms(query_text, defects);
    let mut scored: Vec<(u64, usize)> = Vec::new();
    let mut analyzed = Vec::new();
    for (id, tokens) in corpus.index.iter().enumerate() {
        let mut score = 0u64;
        for t in tokens {
            analyzed.clear();
            corpus.lexicon.analyze(t, defects, &mut analyzed);
            score += analyzed.iter().filter(|a| terms.contains(*a)).count() as u64;
        }
        if score > 0 {
            scored.push((score, id));
        }
    }
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(count);
    let mut ids: Vec<usize> = scored.into_iter().map(|(_, id)| id).collect();

    if defects.contains(Defect::ShuffledRank) && ids.len() > 1 {
        let mut rng = SeededRng::new(corpus.seed ^ stable_hash(query_text).rotate_left(17));
        let first = ids[0];
        rng.shuffle(&mut ids);
        if ids[0] == first {
            let j = 1 + rng.below(ids.len() - 1);
            ids.swap(0, j);
        }
    }

    Serp {
        engine_id: defects.engine_id(),
        query_id: query_id.to_string(),
        requested_count: count as u32,
        retrieved_at: MOCK_RETRIEVED_AT.to_string(),
        entries: ids
            .into_iter()
            .enumerate()
            .map(|(rank, id)| {
                let d = &corpus.documents[id];
                SerpEntry {
                    rank: rank as u32 + 1,
                    url: d.url.clone(),
                    title: d.title.clone(),
                    snippet: d.snippet(),
                }
            })
            .collect(),
    }
}
