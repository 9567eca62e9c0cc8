//! Query-set schema, validation, term enrichment and expert labels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::document::Part;
use crate::taxonomy::{Component, DomainTaxonomy};
use crate::text::normalize_text;
use crate::url::parse_url;
use crate::CoreError;

/// The only query-set file version understood by this release.
pub const QUERYSET_VERSION: u64 = 1;

/// Minimum universal-set size for inference-based judging.
pub const MIN_U_SET: usize = 3;

/// Expert grades at or above this value count as relevant.
pub const RELEVANT_GRADE: u8 = 2;

pub const MAX_GRADE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryType {
    Navigational,
    TrendSingleUrl,
    KnownItem,
    SemiInformational,
    AnalyzerProbe,
}

impl QueryType {
    pub const ALL: [QueryType; 5] = [
        QueryType::Navigational,
        QueryType::TrendSingleUrl,
        QueryType::KnownItem,
        QueryType::SemiInformational,
        QueryType::AnalyzerProbe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::Navigational => "navigational",
            QueryType::TrendSingleUrl => "trend_single_url",
            QueryType::KnownItem => "known_item",
            QueryType::SemiInformational => "semi_informational",
            QueryType::AnalyzerProbe => "analyzer_probe",
        }
    }

    /// Judged by matching result URLs against `expected_urls`.
    pub fn uses_expected_urls(self) -> bool {
        matches!(self, QueryType::Navigational | QueryType::TrendSingleUrl)
    }

    /// Judged through the decision network built from the universal set.
    pub fn uses_universal_set(self) -> bool {
        matches!(self, QueryType::KnownItem | QueryType::SemiInformational)
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryType {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| CoreError::OutOfRange {
                field: "query_type",
                value: s.to_string(),
            })
    }
}

/// One query as written in a query-set file, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RawQuerySpec {
    pub query_id: Option<String>,
    pub component: Option<String>,
    pub domain_path: Option<String>,
    pub query_text: Option<String>,
    pub query_type: Option<String>,
    pub descriptive_terms: Vec<String>,
    pub exclusive_terms: Vec<String>,
    pub evidence_terms: Vec<String>,
    pub expected_urls: Vec<String>,
    pub u_set: Vec<String>,
}

/// A query-set file, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RawQuerySet {
    pub version: Option<u64>,
    pub queries: Vec<RawQuerySpec>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub v_overrides: BTreeMap<String, f64>,
}

/// A validated probe query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub query_id: String,
    pub component: Component,
    pub domain_path: String,
    pub query_text: String,
    pub query_type: QueryType,
    pub descriptive_terms: Vec<String>,
    pub exclusive_terms: Vec<String>,
    pub evidence_terms: Vec<String>,
    pub expected_urls: Vec<String>,
    pub u_set: Vec<String>,
}

impl QuerySpec {
    pub fn to_raw(&self) -> RawQuerySpec {
        RawQuerySpec {
            query_id: Some(self.query_id.clone()),
            component: Some(self.component.as_str().to_string()),
            domain_path: Some(self.domain_path.clone()),
            query_text: Some(self.query_text.clone()),
            query_type: Some(self.query_type.as_str().to_string()),
            descriptive_terms: self.descriptive_terms.clone(),
            exclusive_terms: self.exclusive_terms.clone(),
            evidence_terms: self.evidence_terms.clone(),
            expected_urls: self.expected_urls.clone(),
            u_set: self.u_set.clone(),
        }
    }
}

/// A validated query set.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    pub queries: Vec<QuerySpec>,
    /// Per-part importance overrides for the decision network.
    pub v_overrides: BTreeMap<Part, f64>,
}

impl QuerySet {
    pub fn to_raw(&self) -> RawQuerySet {
        RawQuerySet {
            version: Some(QUERYSET_VERSION),
            queries: self.queries.iter().map(QuerySpec::to_raw).collect(),
            v_overrides: self
                .v_overrides
                .iter()
                .map(|(p, v)| (p.as_str().to_string(), *v))
                .collect(),
        }
    }

    pub fn get(&self, query_id: &str) -> Option<&QuerySpec> {
        self.queries.iter().find(|q| q.query_id == query_id)
    }
}

/// One validation failure, located by query id and field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub query_id: String,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.query_id, self.field, self.message)
    }
}

fn is_safe_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

struct Collector<'a> {
    violations: &'a mut Vec<Violation>,
    query_id: String,
    prefix: String,
}

impl Collector<'_> {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            query_id: self.query_id.clone(),
            field: format!("{}.{field}", self.prefix),
            message: message.into(),
        });
    }
}

fn validate_query(
    index: usize,
    raw: &RawQuerySpec,
    taxonomy: &DomainTaxonomy,
    violations: &mut Vec<Violation>,
) -> Option<QuerySpec> {
    let before = violations.len();
    let mut c = Collector {
        violations,
        query_id: raw.query_id.clone().unwrap_or_else(|| format!("#{index}")),
        prefix: format!("queries[{index}]"),
    };

    match raw.query_id.as_deref() {
        None | Some("") => c.push("query_id", "query_id required"),
        Some(id) if !is_safe_id(id) => c.push(
            "query_id",
            "query_id may only contain ASCII letters, digits, '-', '_' and '.'",
        ),
        _ => {}
    }

    let component = match raw.component.as_deref() {
        None => {
            c.push("component", "component required");
            None
        }
        Some(id) => match id.parse::<Component>() {
            Ok(comp) => Some(comp),
            Err(_) => {
                c.push("component", format!("unknown component {id:?}"));
                None
            }
        },
    };

    match raw.domain_path.as_deref() {
        None => c.push("domain_path", "domain_path required"),
        Some(path) => match taxonomy.leaf(path) {
            None => c.push("domain_path", format!("unknown domain_path {path:?}")),
            Some(leaf) if !leaf.supported => c.push(
                "domain_path",
                format!("domain {path:?} is not supported: the harness has no evaluation mechanics for it"),
            ),
            Some(leaf) => {
                if let Some(comp) = component.filter(|&comp| comp != leaf.component) {
                    c.push(
                        "domain_path",
                        format!("domain_path {path:?} belongs to {}, not {comp}", leaf.component),
                    );
                }
            }
        },
    }

    if raw
        .query_text
        .as_deref()
        .is_none_or(|t| t.trim().is_empty())
    {
        c.push("query_text", "query_text required");
    }

    let query_type = match raw.query_type.as_deref() {
        None => {
            c.push("query_type", "query_type required");
            None
        }
        Some(t) => match t.parse::<QueryType>() {
            Ok(qt) => Some(qt),
            Err(_) => {
                c.push("query_type", format!("unknown query_type {t:?}"));
                None
            }
        },
    };

    if let (Some(qt), Some(comp)) = (query_type, component) {
        let analyzer_type = qt == QueryType::AnalyzerProbe;
        if analyzer_type != comp.is_analyzer() {
            c.push(
                "query_type",
                format!("query_type {qt} cannot target component {comp}"),
            );
        }
    }

    if let Some(qt) = query_type {
        if qt.uses_expected_urls() && raw.expected_urls.is_empty() {
            c.push("expected_urls", "expected_urls required");
        }
        if qt.uses_universal_set() && raw.u_set.len() < MIN_U_SET {
            c.push(
                "u_set",
                format!(
                    "u_set requires at least {MIN_U_SET} URLs, found {}",
                    raw.u_set.len()
                ),
            );
        }
        if qt == QueryType::AnalyzerProbe && raw.evidence_terms.is_empty() {
            c.push("evidence_terms", "evidence_terms required");
        }
    }

    for (field, urls) in [("expected_urls", &raw.expected_urls), ("u_set", &raw.u_set)] {
        for (i, url) in urls.iter().enumerate() {
            if let Err(CoreError::MalformedUrl { reason, .. }) = parse_url(url) {
                c.push(
                    &format!("{field}[{i}]"),
                    format!("malformed URL {url:?}: {reason}"),
                );
            }
        }
    }

    for (field, terms) in [
        ("descriptive_terms", &raw.descriptive_terms),
        ("exclusive_terms", &raw.exclusive_terms),
        ("evidence_terms", &raw.evidence_terms),
    ] {
        for (i, term) in terms.iter().enumerate() {
            if normalize_text(term).is_empty() {
                c.push(&format!("{field}[{i}]"), "term normalizes to zero tokens");
            }
        }
    }

    if c.violations.len() > before {
        return None;
    }
    Some(QuerySpec {
        query_id: raw.query_id.clone()?,
        component: component?,
        domain_path: raw.domain_path.clone()?,
        query_text: raw.query_text.clone()?,
        query_type: query_type?,
        descriptive_terms: raw.descriptive_terms.clone(),
        exclusive_terms: raw.exclusive_terms.clone(),
        evidence_terms: raw.evidence_terms.clone(),
        expected_urls: raw.expected_urls.clone(),
        u_set: raw.u_set.clone(),
    })
}

/// Validates a parsed query-set document. Every violation is reported; the
/// set is returned only when there are none.
pub fn validate_queryset(raw: &RawQuerySet) -> Result<QuerySet, Vec<Violation>> {
    let taxonomy = DomainTaxonomy::builtin();
    let mut violations = Vec::new();

    if raw.version != Some(QUERYSET_VERSION) {
        violations.push(Violation {
            query_id: "-".to_string(),
            field: "version".to_string(),
            message: format!("version must be {QUERYSET_VERSION}"),
        });
    }

    let mut v_overrides = BTreeMap::new();
    for (key, value) in &raw.v_overrides {
        let field = format!("v_overrides.{key}");
        match key.parse::<Part>() {
            Err(_) => violations.push(Violation {
                query_id: "-".to_string(),
                field,
                message: format!("unknown part {key:?}"),
            }),
            Ok(_) if !value.is_finite() || *value < 0.0 => violations.push(Violation {
                query_id: "-".to_string(),
                field,
                message: "part importance must be finite and non-negative".to_string(),
            }),
            Ok(part) => {
                v_overrides.insert(part, *value);
            }
        }
    }

    let mut seen = BTreeSet::new();
    let mut queries = Vec::with_capacity(raw.queries.len());
    for (index, q) in raw.queries.iter().enumerate() {
        if let Some(id) = q.query_id.as_deref().filter(|id| !id.is_empty()) {
            if !seen.insert(id) {
                violations.push(Violation {
                    query_id: id.to_string(),
                    field: format!("queries[{index}].query_id"),
                    message: "duplicate query_id".to_string(),
                });
            }
        }
        if let Some(spec) = validate_query(index, q, &taxonomy, &mut violations) {
            queries.push(spec);
        }
    }

    if violations.is_empty() {
        Ok(QuerySet {
            queries,
            v_overrides,
        })
    } else {
        Err(violations)
    }
}

fn canonical_term(term: &str) -> String {
    let tokens = normalize_text(term).tokens;
    if tokens.is_empty() {
        term.to_string()
    } else {
        tokens.join(" ")
    }
}

/// Appends the adjacent-token bigrams of every multi-token term, skipping
/// bigrams already present in the list.
pub fn enrich_terms(terms: &[String]) -> Vec<String> {
    let mut out = terms.to_vec();
    let mut seen: BTreeSet<String> = terms.iter().map(|t| canonical_term(t)).collect();
    for term in terms {
        let tokens = normalize_text(term).tokens;
        for pair in tokens.windows(2) {
            let bigram = format!("{} {}", pair[0], pair[1]);
            if seen.insert(bigram.clone()) {
                out.push(bigram);
            }
        }
    }
    out
}

/// Enriches the descriptive and exclusive term lists with bigrams drawn from
/// within each term. Distinct list entries are never combined.
pub fn enrich_bigrams(spec: &QuerySpec) -> QuerySpec {
    QuerySpec {
        descriptive_terms: enrich_terms(&spec.descriptive_terms),
        exclusive_terms: enrich_terms(&spec.exclusive_terms),
        ..spec.clone()
    }
}

/// One expert judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertLabel {
    pub query_id: String,
    pub url: String,
    /// 0 = irrelevant .. 3 = perfect.
    pub grade: u8,
}

impl ExpertLabel {
    pub fn is_relevant(&self) -> bool {
        self.grade >= RELEVANT_GRADE
    }
}

/// Checks label uniqueness, grade range and that every query id exists.
pub fn validate_labels(labels: &[ExpertLabel], queries: &QuerySet) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, label) in labels.iter().enumerate() {
        let mut push = |message: String| {
            violations.push(Violation {
                query_id: label.query_id.clone(),
                field: format!("labels[{i}]"),
                message,
            })
        };
        if label.grade > MAX_GRADE {
            push(format!("grade {} outside 0..={MAX_GRADE}", label.grade));
        }
        if queries.get(&label.query_id).is_none() {
            push("unknown query_id".to_string());
        }
        if !seen.insert((label.query_id.as_str(), label.url.as_str())) {
            push(format!("duplicate label for {}", label.url));
        }
    }
    violations
}
