use std::collections::BTreeSet;

use rayon::prelude::*;
use scraper::{ElementRef, Html, Selector};
use serpgauge_core::document::join_text;
use serpgauge_core::query::QuerySpec;
use serpgauge_core::serp::{Serp, SerpEntry};
use serpgauge_core::url::resolve;
use thiserror::Error;

use super::config::{EngineConfig, EngineMode, ExtractionRules};
use super::fetch::{Client, FetchError, Politeness};

pub const MAX_COUNT: usize = 50;
pub const DEFAULT_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("missing fixture: {engine_id}/{query_id}")]
    MissingFixture { engine_id: String, query_id: String },
    #[error("count {0} outside 1..={MAX_COUNT}")]
    CountOutOfRange(usize),
    #[error("{engine_id}/{query_id}: {source}")]
    Fetch {
        engine_id: String,
        query_id: String,
        source: FetchError,
    },
    #[error("{engine_id}: {message}")]
    Config { engine_id: String, message: String },
    #[error("cache: {0}")]
    Cache(String),
}

/// A result page plus anything worth reporting about how it was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub serp: Serp,
    pub warnings: Vec<String>,
}

fn compile(css: &str, engine_id: &str) -> Result<Selector, SearchError> {
    Selector::parse(css).map_err(|e| SearchError::Config {
        engine_id: engine_id.to_string(),
        message: format!("invalid selector {css:?}: {e}"),
    })
}

fn first_text(el: ElementRef<'_>, sel: &Selector) -> Option<String> {
    el.select(sel)
        .next()
        .map(|e| join_text([e.text().collect::<String>().as_str()]))
}

/// `mailto:`, `javascript:` and the like.
fn has_foreign_scheme(href: &str) -> bool {
    let head = href.trim_start();
    let end = head.find(['/', '?', '#']).unwrap_or(head.len());
    match head[..end].find(':') {
        Some(i) => !matches!(head[..i].to_ascii_lowercase().as_str(), "http" | "https"),
        None => false,
    }
}

/// Pulls at most `count` entries out of a result page. Results without a
/// resolvable link are skipped; ranks are assigned after skipping.
pub fn extract_entries(
    html: &str,
    base_url: &str,
    rules: &ExtractionRules,
    engine_id: &str,
    count: usize,
) -> Result<Vec<SerpEntry>, SearchError> {
    let result = compile(&rules.result, engine_id)?;
    let link = compile(&rules.link, engine_id)?;
    let title = compile(&rules.title, engine_id)?;
    let snippet = compile(&rules.snippet, engine_id)?;
    let doc = Html::parse_document(html);
    let mut entries = Vec::new();
    for r in doc.select(&result) {
        if entries.len() == count {
            break;
        }
        let Some(anchor) = r.select(&link).next() else {
            continue;
        };
        let Some(url) = anchor
            .attr("href")
            .filter(|h| !has_foreign_scheme(h))
            .and_then(|h| resolve(base_url, h).ok())
            .filter(|u| u.starts_with("http://") || u.starts_with("https://"))
        else {
            continue;
        };
        let title = first_text(r, &title)
            .unwrap_or_else(|| join_text([anchor.text().collect::<String>().as_str()]));
        entries.push(SerpEntry {
            rank: entries.len() as u32 + 1,
            url,
            title,
            snippet: first_text(r, &snippet).unwrap_or_default(),
        });
    }
    Ok(entries)
}

impl Client<'_> {
    /// Fixture engines, and every engine when offline, replay the cache.
    /// Live engines issue the templated request and record the result.
    pub fn search(
        &self,
        config: &EngineConfig,
        query_text: &str,
        query_id: &str,
        count: usize,
    ) -> Result<SearchResult, SearchError> {
        if !(1..=MAX_COUNT).contains(&count) {
            return Err(SearchError::CountOutOfRange(count));
        }
        if config.mode == EngineMode::Fixture || self.offline {
            return match self.cache.read_serp(&config.engine_id, query_id) {
                Ok(Some(serp)) => Ok(SearchResult {
                    serp,
                    warnings: Vec::new(),
                }),
                Ok(None) => Err(SearchError::MissingFixture {
                    engine_id: config.engine_id.clone(),
                    query_id: query_id.to_string(),
                }),
                Err(e) => Err(SearchError::Cache(e.to_string())),
            };
        }
        let config_err = |message: &str| SearchError::Config {
            engine_id: config.engine_id.clone(),
            message: message.to_string(),
        };
        let url = config
            .request_url(query_text, count)
            .ok_or_else(|| config_err("live mode requires url_template"))?;
        let rules = config
            .rules
            .as_ref()
            .ok_or_else(|| config_err("live mode requires rules"))?;
        let fetched = self
            .get(
                &url,
                &format!("engine:{}", config.engine_id),
                Politeness::from(config),
            )
            .map_err(|source| SearchError::Fetch {
                engine_id: config.engine_id.clone(),
                query_id: query_id.to_string(),
                source,
            })?;
        let html = String::from_utf8_lossy(&fetched.body);
        let entries = extract_entries(&html, &fetched.final_url, rules, &config.engine_id, count)?;
        let mut warnings = Vec::new();
        if entries.is_empty() {
            warnings.push(format!(
                "{}: {query_id}: no results extracted",
                config.engine_id
            ));
        }
        let serp = Serp {
            engine_id: config.engine_id.clone(),
            query_id: query_id.to_string(),
            requested_count: count as u32,
            retrieved_at: self.clock.timestamp(),
            entries,
        };
        self.cache
            .write_serp(&serp)
            .map_err(|e| SearchError::Cache(e.to_string()))?;
        Ok(SearchResult { serp, warnings })
    }

    /// Cached result page if present, otherwise [`Client::search`].
    pub fn obtain_serp(
        &self,
        config: &EngineConfig,
        query: &QuerySpec,
        count: usize,
    ) -> Result<SearchResult, SearchError> {
        match self.cache.read_serp(&config.engine_id, &query.query_id) {
            Ok(Some(serp)) => Ok(SearchResult {
                serp,
                warnings: Vec::new(),
            }),
            Ok(None) => self.search(config, &query.query_text, &query.query_id, count),
            Err(e) => Err(SearchError::Cache(e.to_string())),
        }
    }
}

/// Counts from one recording pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordSummary {
    /// Result pages stored by this pass.
    pub serps: usize,
    /// Documents stored by this pass.
    pub pages: usize,
    /// Items already cached and skipped.
    pub skipped: usize,
    /// One line per failed item.
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct QueryRecord {
    serp: bool,
    skipped: usize,
    urls: Vec<String>,
    failures: Vec<String>,
    warnings: Vec<String>,
}

/// Stores every query's result page and all pages it references, plus the
/// universal-set pages of the queries. Items already cached are skipped and
/// failures never stop the batch.
pub fn record_fixtures(
    client: &Client<'_>,
    engines: &[EngineConfig],
    queries: &[QuerySpec],
    count: usize,
) -> RecordSummary {
    let tasks: Vec<(&EngineConfig, &QuerySpec)> = engines
        .iter()
        .flat_map(|e| queries.iter().map(move |q| (e, q)))
        .collect();
    let records: Vec<QueryRecord> = tasks
        .par_iter()
        .map(|(engine, query)| {
            let mut rec = QueryRecord::default();
            if client.cache.has_serp(&engine.engine_id, &query.query_id) {
                rec.skipped += 1;
            } else {
                rec.serp = true;
            }
            match client.obtain_serp(engine, query, count) {
                Ok(r) => {
                    rec.urls = r.serp.entries.iter().map(|e| e.url.clone()).collect();
                    rec.warnings = r.warnings;
                }
                Err(e) => {
                    rec.serp = false;
                    rec.failures.push(e.to_string());
                }
            }
            rec
        })
        .collect();

    let mut summary = RecordSummary::default();
    let mut urls = BTreeSet::new();
    for rec in records {
        summary.serps += usize::from(rec.serp);
        summary.skipped += rec.skipped;
        summary.failures.extend(rec.failures);
        summary.warnings.extend(rec.warnings);
        urls.extend(rec.urls);
    }
    urls.extend(queries.iter().flat_map(|q| q.u_set.iter().cloned()));

    let outcomes: Vec<(String, bool, Option<FetchError>)> = urls
        .into_par_iter()
        .map(|url| {
            let cached = client.cache.has_page(&url);
            let result = client.fetch_page(&url).err();
            (url, cached, result)
        })
        .collect();
    for (url, cached, error) in outcomes {
        if cached {
            summary.skipped += 1;
        } else if error != Some(FetchError::Offline) {
            summary.pages += 1;
        }
        if let Some(e) = error {
            summary.failures.push(format!("{url}: {e}"));
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> ExtractionRules {
        ExtractionRules {
            result: "li.r".to_string(),
            link: "a".to_string(),
            title: "h3".to_string(),
            snippet: ".s".to_string(),
        }
    }

    #[test]
    fn extraction_follows_rules() {
        let html = r#"<ol>
            <li class="r"><a href="/one"><h3>One  result</h3></a><p class="s">first</p></li>
            <li class="r"><span>no link</span></li>
            <li class="r"><a href="https://two.example/x">Two</a></li>
            <li class="r"><a href="javascript:void(0)">bad</a></li>
            <li class="r"><a href="https://three.example/">Three</a></li>
        </ol>"#;
        let entries =
            extract_entries(html, "https://s.example/search?q=x", &rules(), "e", 2).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].url, "https://s.example/one");
        assert_eq!(entries[0].title, "One result");
        assert_eq!(entries[0].snippet, "first");
        assert_eq!(entries[1].rank, 2);
        assert_eq!(entries[1].title, "Two");
        assert_eq!(entries[1].snippet, "");
    }
}
