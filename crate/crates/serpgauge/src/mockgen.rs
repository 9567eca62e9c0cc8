//! Writes mock engines into the standard fixture layout so the ordinary
//! pipeline can evaluate them offline.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serpgauge_core::mock::{mock_search, Defect, DefectSet, MockCorpus, MOCK_RETRIEVED_AT};
use serpgauge_core::query::{ExpertLabel, QueryType, MAX_GRADE};
use serpgauge_core::CoreError;

use crate::engines::cache::to_stable_json;
use crate::engines::{Cache, EngineConfig, PageMeta};
use crate::formats::{self, labels_text, queryset_bytes, FormatError};

#[derive(Debug, Clone)]
pub struct MockOptions {
    pub seed: u64,
    pub size: usize,
    /// Defaults to one query per ten documents, at most 50.
    pub queries: Option<usize>,
    /// Defective engines to emit next to the defect-free one.
    pub engines: Vec<DefectSet>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockSummary {
    pub engines: Vec<String>,
    pub queries: usize,
    pub documents: usize,
    pub serps: usize,
    pub labels: usize,
}

/// Paths inside a mock output directory.
pub struct MockLayout {
    pub queryset: PathBuf,
    pub engines: PathBuf,
    pub cache: PathBuf,
    pub labels: PathBuf,
}

impl MockLayout {
    pub fn new(out: &Path) -> MockLayout {
        MockLayout {
            queryset: out.join("queryset.json"),
            engines: out.join("engines"),
            cache: out.join("cache"),
            labels: out.join("labels.tsv"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MockError {
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Parses an engine list: comma-separated entries, each a defect flag or
/// several joined with `+`. `all` expands to one engine per flag, `none`
/// and the empty list add nothing.
pub fn parse_engine_list(list: &str) -> Result<Vec<DefectSet>, CoreError> {
    let mut engines = Vec::new();
    for entry in list.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        if entry == "all" {
            engines.extend(Defect::ALL.into_iter().map(DefectSet::only));
        } else {
            let set = DefectSet::parse(&entry.replace('+', ","))?;
            if !set.is_empty() {
                engines.push(set);
            }
        }
    }
    Ok(engines)
}

/// Grades for the ranking queries, from the corpus construction: universal
/// set and expected pages are perfect, everything else the defect-free
/// engine returns is graded low.
fn labels(corpus: &MockCorpus, count: usize) -> Vec<ExpertLabel> {
    let clean = DefectSet::none();
    let mut out = Vec::new();
    for q in &corpus.queries {
        let gold: BTreeSet<&str> = match q.query_type {
            QueryType::KnownItem | QueryType::SemiInformational => {
                q.u_set.iter().map(String::as_str).collect()
            }
            QueryType::Navigational | QueryType::TrendSingleUrl => {
                q.expected_urls.iter().map(String::as_str).collect()
            }
            QueryType::AnalyzerProbe => continue,
        };
        let other_grade = if q.query_type.uses_universal_set() {
            0
        } else {
            1
        };
        let mut seen = BTreeSet::new();
        for url in &gold {
            seen.insert(url.to_string());
            out.push(ExpertLabel {
                query_id: q.query_id.clone(),
                url: url.to_string(),
                grade: MAX_GRADE,
            });
        }
        for e in mock_search(corpus, &clean, &q.query_id, &q.query_text, count).entries {
            if seen.insert(e.url.clone()) {
                out.push(ExpertLabel {
                    query_id: q.query_id.clone(),
                    url: e.url,
                    grade: other_grade,
                });
            }
        }
    }
    out
}

/// Builds the corpus and writes the query set, one fixture-mode engine
/// config per engine, every result page and document into the cache, and
/// expert labels for the ranking queries.
pub fn write_mock(out: &Path, opts: &MockOptions) -> Result<MockSummary, MockError> {
    let corpus = match opts.queries {
        Some(n) => MockCorpus::build_with_queries(opts.seed, opts.size, n)?,
        None => MockCorpus::build(opts.seed, opts.size)?,
    };
    let layout = MockLayout::new(out);
    formats::write_file(&layout.queryset, &queryset_bytes(&corpus.query_set()))?;

    let mut engines = vec![DefectSet::none()];
    for e in &opts.engines {
        if !engines.contains(e) {
            engines.push(e.clone());
        }
    }
    let cache = Cache::new(&layout.cache);
    let mut serps = 0;
    for defects in &engines {
        let config = EngineConfig::fixture(&defects.engine_id());
        formats::write_file(
            &layout.engines.join(format!("{}.json", config.engine_id)),
            &to_stable_json(&config),
        )?;
        for q in &corpus.queries {
            let serp = mock_search(&corpus, defects, &q.query_id, &q.query_text, opts.count);
            cache.write_serp(&serp)?;
            serps += 1;
        }
    }
    for d in &corpus.documents {
        let meta = PageMeta {
            requested_url: d.url.clone(),
            final_url: d.url.clone(),
            status: Some(200),
            retrieved_at: MOCK_RETRIEVED_AT.to_string(),
            error: None,
        };
        cache.write_page(&meta, d.render_html().as_bytes())?;
    }
    let labels = labels(&corpus, opts.count);
    formats::write_file(&layout.labels, labels_text(&labels).as_bytes())?;
    Ok(MockSummary {
        engines: engines.iter().map(DefectSet::engine_id).collect(),
        queries: corpus.queries.len(),
        documents: corpus.documents.len(),
        serps,
        labels: labels.len(),
    })
}
