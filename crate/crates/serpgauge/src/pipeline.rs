//! The evaluation pipeline: obtain result pages, judge them, compute
//! metrics, aggregate, and write the report.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serpgauge_core::document::{Part, SegmentedDocument};
use serpgauge_core::metrics::{aggregate, JudgedEntry, JudgedSerp, Judgment, QueryOutcome};
use serpgauge_core::query::{QuerySet, QuerySpec, QueryType, Violation};
use serpgauge_core::sample::{required_sample_size, SampleSizeRequest};
use serpgauge_core::scoring::{
    build_network, feature_families, tune_lambda, url_matches, DecisionNetwork, LabeledCandidate,
    LinearScoreModel, NetworkConfig, QueryJudge, Thresholds, TuneResult,
};
use serpgauge_core::text::{count_term, normalize_text, Term};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engines::{Cache, Client, EngineConfig, Spacer};
use crate::engines::{Clock, OfflineTransport, Transport};
use crate::formats::{self, FormatError, LambdaFile};
use crate::html::segment_html;
use crate::report::{canonical_f64, emit_report, svg, ReportFormat, RunReport, Timing};

/// Share of failed (engine, query) tasks above which a live run fails.
pub const FAILURE_BUDGET: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub queryset: PathBuf,
    pub engines_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
    pub offline: bool,
    pub k: usize,
    /// Results requested per live search.
    pub count: usize,
    pub workers: usize,
    pub seed: u64,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("{0}")]
    Config(String),
    #[error("{} missing fixture(s)", .0.len())]
    MissingFixtures(Vec<String>),
    #[error("{0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::MissingFixtures(_) => 2,
            _ => 1,
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            RunError::Format(FormatError::Invalid { violations, .. }) => violations,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    /// A live run lost more than [`FAILURE_BUDGET`] of its tasks.
    pub budget_exceeded: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.budget_exceeded {
            3
        } else {
            0
        }
    }
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, RunError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Config(e.to_string()))
}

/// A segmented page and the warning its load produced, if any.
type LoadedPage = Arc<(SegmentedDocument, Option<String>)>;

/// Segmented pages, loaded once per run and shared between tasks.
struct PageStore<'a> {
    client: &'a Client<'a>,
    loaded: Mutex<HashMap<String, LoadedPage>>,
}

impl<'a> PageStore<'a> {
    fn new(client: &'a Client<'a>) -> Self {
        PageStore {
            client,
            loaded: Mutex::new(HashMap::new()),
        }
    }

    /// A failed page stands in as an empty document.
    fn get(&self, url: &str) -> LoadedPage {
        if let Some(hit) = self
            .loaded
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(url)
        {
            return hit.clone();
        }
        let entry = match self.client.fetch_page(url) {
            Ok(page) => (
                segment_html(&page.body, &page.meta.final_url, &page.meta.retrieved_at),
                None,
            ),
            Err(e) => (SegmentedDocument::empty(url, ""), Some(e.to_string())),
        };
        self.loaded
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry(url.to_string())
            .or_insert_with(|| Arc::new(entry))
            .clone()
    }

    fn doc(&self, url: &str) -> SegmentedDocument {
        self.get(url).0.clone()
    }

    /// (loaded, failed) counts and one warning per failed URL, sorted.
    fn summary(&self) -> (usize, usize, Vec<String>) {
        let loaded = self.loaded.lock().unwrap_or_else(|e| e.into_inner());
        let failures: BTreeMap<&str, &str> = loaded
            .iter()
            .filter_map(|(url, e)| e.1.as_deref().map(|m| (url.as_str(), m)))
            .collect();
        let warnings = failures
            .iter()
            .map(|(url, m)| format!("page {url}: {m}; scored as empty"))
            .collect();
        (loaded.len() - failures.len(), failures.len(), warnings)
    }
}

/// How the results of one query are judged.
enum Judge {
    Evidence(Vec<Term>),
    ExpectedUrls(Vec<String>),
    Network(Box<QueryJudge>),
    Unjudgeable,
}

fn evidence_found(terms: &[Term], doc: &SegmentedDocument, snippet: &str) -> bool {
    let snippet = normalize_text(snippet);
    terms.iter().any(|t| {
        count_term(doc.part(Part::Title), t)
            + count_term(doc.part(Part::Body), t)
            + count_term(&snippet, t)
            > 0
    })
}

fn network_config(set: &QuerySet) -> NetworkConfig {
    NetworkConfig::default().with_overrides(&set.v_overrides)
}

fn build_judge(
    spec: &QuerySpec,
    pages: &PageStore<'_>,
    config: &NetworkConfig,
    model: Option<&LinearScoreModel>,
    warnings: &mut Vec<String>,
) -> Judge {
    match spec.query_type {
        QueryType::AnalyzerProbe => Judge::Evidence(
            spec.evidence_terms
                .iter()
                .filter_map(|t| Term::parse(t).ok())
                .collect(),
        ),
        QueryType::Navigational | QueryType::TrendSingleUrl => {
            Judge::ExpectedUrls(spec.expected_urls.clone())
        }
        QueryType::KnownItem | QueryType::SemiInformational => {
            let u_docs: Vec<SegmentedDocument> = spec.u_set.iter().map(|u| pages.doc(u)).collect();
            match QueryJudge::new(&u_docs, spec, config, model, Thresholds::default()) {
                Ok(judge) => {
                    if judge.is_degenerate() {
                        warnings.push(format!(
                            "{}: universal-set baseline is zero, no result can be judged relevant",
                            spec.query_id
                        ));
                    }
                    Judge::Network(Box::new(judge))
                }
                Err(e) => {
                    warnings.push(format!("{}: {e}", spec.query_id));
                    Judge::Unjudgeable
                }
            }
        }
    }
}

struct TaskResult {
    outcome: Option<QueryOutcome>,
    warnings: Vec<String>,
    serp_loaded: bool,
}

fn run_task(
    client: &Client<'_>,
    pages: &PageStore<'_>,
    engine: &EngineConfig,
    spec: &QuerySpec,
    judge: &Judge,
    k: usize,
    count: usize,
) -> TaskResult {
    let mut warnings = Vec::new();
    let result = match client.obtain_serp(engine, spec, count) {
        Ok(r) => r,
        Err(e) => {
            return TaskResult {
                outcome: None,
                warnings: vec![format!("{}: {}: {e}", engine.engine_id, spec.query_id)],
                serp_loaded: false,
            }
        }
    };
    warnings.extend(result.warnings);
    let serp = result.serp;
    if !serp.is_well_formed() {
        warnings.push(format!(
            "{}: {}: result ranks are not contiguous",
            engine.engine_id, spec.query_id
        ));
    }
    if let Judge::Unjudgeable = judge {
        return TaskResult {
            outcome: None,
            warnings,
            serp_loaded: true,
        };
    }
    let entries = serp
        .entries
        .iter()
        .filter(|e| e.rank as usize <= k)
        .map(|e| {
            let judgment = match judge {
                Judge::Evidence(terms) => {
                    if evidence_found(terms, &pages.get(&e.url).0, &e.snippet) {
                        Judgment::Relevant
                    } else {
                        Judgment::Irrelevant
                    }
                }
                Judge::ExpectedUrls(expected) => {
                    if url_matches(&e.url, expected) {
                        Judgment::Relevant
                    } else {
                        Judgment::Irrelevant
                    }
                }
                Judge::Network(j) => j.judge(&pages.get(&e.url).0).0,
                Judge::Unjudgeable => unreachable!("handled above"),
            };
            JudgedEntry {
                rank: e.rank,
                url: e.url.clone(),
                judgment,
            }
        })
        .collect();
    let judged = JudgedSerp {
        query_id: spec.query_id.clone(),
        engine_id: engine.engine_id.clone(),
        entries,
    };
    TaskResult {
        outcome: Some(QueryOutcome::from_judged(&judged, spec, k)),
        warnings,
        serp_loaded: true,
    }
}

/// URLs whose pages an offline run will read for this query and result
/// page.
fn pages_needed<'q>(
    spec: &'q QuerySpec,
    serp: Option<&'q serpgauge_core::serp::Serp>,
    k: usize,
) -> Vec<&'q str> {
    let mut urls: Vec<&str> = Vec::new();
    if spec.query_type.uses_universal_set() {
        urls.extend(spec.u_set.iter().map(String::as_str));
    }
    if !spec.query_type.uses_expected_urls() {
        if let Some(serp) = serp {
            urls.extend(
                serp.entries
                    .iter()
                    .filter(|e| e.rank as usize <= k)
                    .map(|e| e.url.as_str()),
            );
        }
    }
    urls
}

/// Every fixture an offline run needs but the cache lacks.
pub fn preflight(
    cache: &Cache,
    engines: &[EngineConfig],
    queries: &QuerySet,
    k: usize,
) -> Result<Vec<String>, RunError> {
    let mut missing = Vec::new();
    let mut pages = BTreeSet::new();
    for engine in engines {
        for spec in &queries.queries {
            let serp = cache
                .read_serp(&engine.engine_id, &spec.query_id)
                .map_err(|e| RunError::Io(e.to_string()))?;
            if serp.is_none() {
                missing.push(format!("serp {}/{}", engine.engine_id, spec.query_id));
            }
            pages.extend(
                pages_needed(spec, serp.as_ref(), k)
                    .into_iter()
                    .map(str::to_string),
            );
        }
    }
    for url in pages {
        if !cache.has_page(&url) {
            missing.push(format!("page {url}"));
        }
    }
    Ok(missing)
}

fn run_id(
    queryset_hash: &str,
    engines: &[String],
    cfg: &RunConfig,
    model: Option<&LinearScoreModel>,
) -> String {
    let mut h = Sha256::new();
    h.update(queryset_hash.as_bytes());
    for e in engines {
        h.update(b"\0");
        h.update(e.as_bytes());
    }
    h.update(format!("\0k={}\0count={}\0seed={}", cfg.k, cfg.count, cfg.seed).as_bytes());
    if let Some(m) = model {
        h.update(serde_json::to_vec(m).expect("in-memory serialization"));
    }
    hex::encode(h.finalize())[..16].to_string()
}

/// Runs the whole evaluation and returns the report without writing it.
/// Offline runs use no transport at all and abort before evaluating when a
/// fixture is missing.
pub fn evaluate(
    cfg: &RunConfig,
    transport: &dyn Transport,
    clock: &dyn Clock,
) -> Result<RunOutcome, RunError> {
    if cfg.k == 0 {
        return Err(RunError::Config("k must be at least 1".to_string()));
    }
    let loaded = formats::read_queryset(&cfg.queryset)?;
    let engines = crate::engines::load_engine_dir(&cfg.engines_dir)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let model = cfg.model.as_deref().map(formats::read_model).transpose()?;
    let cache = Cache::new(&cfg.cache_dir);

    if cfg.offline {
        let missing = preflight(&cache, &engines, &loaded.set, cfg.k)?;
        if !missing.is_empty() {
            return Err(RunError::MissingFixtures(missing));
        }
    }

    let offline_transport = OfflineTransport;
    let transport: &dyn Transport = if cfg.offline {
        &offline_transport
    } else {
        transport
    };
    let spacer = Spacer::default();
    let client = Client::new(transport, clock, &spacer, &cache, cfg.offline);
    let pages = PageStore::new(&client);
    let net_config = network_config(&loaded.set);
    let pool = worker_pool(cfg.workers)?;

    let mut warnings = Vec::new();
    let queries = &loaded.set.queries;
    let tasks = pool.install(|| {
        let judged: Vec<(Judge, Vec<String>)> = queries
            .par_iter()
            .map(|spec| {
                let mut w = Vec::new();
                let judge = build_judge(spec, &pages, &net_config, model.as_ref(), &mut w);
                (judge, w)
            })
            .collect();
        let judges: Vec<Judge> = judged
            .into_iter()
            .map(|(j, w)| {
                warnings.extend(w);
                j
            })
            .collect();
        let tasks: Vec<(usize, usize)> = (0..engines.len())
            .flat_map(|e| (0..queries.len()).map(move |q| (e, q)))
            .collect();
        let results: Vec<TaskResult> = tasks
            .par_iter()
            .map(|&(e, q)| {
                run_task(
                    &client,
                    &pages,
                    &engines[e],
                    &queries[q],
                    &judges[q],
                    cfg.k,
                    cfg.count,
                )
            })
            .collect();
        results
    });

    let mut outcomes = Vec::new();
    let mut timing = Timing {
        tasks: tasks.len(),
        ..Timing::default()
    };
    for t in tasks {
        warnings.extend(t.warnings);
        timing.serps_loaded += usize::from(t.serp_loaded);
        timing.failed_tasks += usize::from(!t.serp_loaded);
        outcomes.extend(t.outcome);
    }
    let (pages_loaded, pages_failed, page_warnings) = pages.summary();
    timing.pages_loaded = pages_loaded;
    timing.pages_failed = pages_failed;
    warnings.extend(page_warnings);

    let engine_ids: Vec<String> = engines.iter().map(|e| e.engine_id.clone()).collect();
    let leaves: Vec<String> = queries
        .iter()
        .map(|q| q.domain_path.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let agg = aggregate(&outcomes, &engine_ids, &leaves);
    warnings.extend(agg.warnings);

    let budget_exceeded = !cfg.offline
        && timing.tasks > 0
        && timing.failed_tasks as f64 > FAILURE_BUDGET * timing.tasks as f64;
    if budget_exceeded {
        warnings.push(format!(
            "{} of {} tasks failed, over the {}% failure budget",
            timing.failed_tasks,
            timing.tasks,
            FAILURE_BUDGET * 100.0
        ));
    }

    let mut report = RunReport {
        run_id: run_id(&loaded.sha256, &engine_ids, cfg, model.as_ref()),
        queryset_hash: loaded.sha256,
        engines: engine_ids,
        k: cfg.k,
        domain_scores: agg.domains,
        components: agg.components,
        warnings,
        timing,
    };
    report.canonicalize();
    Ok(RunOutcome {
        report,
        budget_exceeded,
    })
}

/// Writes `report.json`, `report.csv` and `charts/*.svg` under `out_dir`.
pub fn write_report(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut written = Vec::new();
    let mut put = |rel: String, bytes: &[u8]| -> Result<(), RunError> {
        let path = out_dir.join(rel);
        formats::write_file(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    put(
        "report.json".to_string(),
        &emit_report(report, ReportFormat::Json),
    )?;
    put(
        "report.csv".to_string(),
        &emit_report(report, ReportFormat::Csv),
    )?;
    write_charts_into(report, out_dir, &mut put)?;
    Ok(written)
}

fn write_charts_into(
    report: &RunReport,
    out_dir: &Path,
    put: &mut impl FnMut(String, &[u8]) -> Result<(), RunError>,
) -> Result<(), RunError> {
    let charts = out_dir.join("charts");
    if charts.is_dir() {
        for entry in std::fs::read_dir(&charts).map_err(|e| RunError::Io(e.to_string()))? {
            let path = entry.map_err(|e| RunError::Io(e.to_string()))?.path();
            if path.extension().is_some_and(|x| x == "svg") {
                std::fs::remove_file(&path).map_err(|e| RunError::Io(e.to_string()))?;
            }
        }
    }
    for (name, svg) in svg::emit_charts(report) {
        put(format!("charts/{name}"), svg.as_bytes())?;
    }
    Ok(())
}

/// Writes only the charts of a report.
pub fn write_charts(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut written = Vec::new();
    write_charts_into(report, out_dir, &mut |rel, bytes| {
        let path = out_dir.join(rel);
        formats::write_file(&path, bytes)?;
        written.push(path);
        Ok(())
    })?;
    Ok(written)
}

/// [`evaluate`] followed by [`write_report`].
pub fn run_evaluate(
    cfg: &RunConfig,
    transport: &dyn Transport,
    clock: &dyn Clock,
) -> Result<RunOutcome, RunError> {
    let outcome = evaluate(cfg, transport, clock)?;
    write_report(&outcome.report, &cfg.out_dir)?;
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct TuneConfig {
    pub queryset: PathBuf,
    pub labels: PathBuf,
    pub cache_dir: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub file: LambdaFile,
    pub result: TuneResult,
    pub labeled_queries: usize,
    pub warnings: Vec<String>,
}

/// Fits Λ to the expert labels using cached pages only, then writes
/// `lambda.json`.
pub fn run_tune(cfg: &TuneConfig, clock: &dyn Clock) -> Result<TuneOutcome, RunError> {
    let loaded = formats::read_queryset(&cfg.queryset)?;
    let labels = formats::read_labels(&cfg.labels)?;
    let violations = serpgauge_core::query::validate_labels(&labels, &loaded.set);
    if !violations.is_empty() {
        return Err(RunError::Format(FormatError::Invalid {
            path: cfg.labels.display().to_string(),
            violations,
        }));
    }
    let cache = Cache::new(&cfg.cache_dir);
    let spacer = Spacer::default();
    let client = Client::new(&OfflineTransport, clock, &spacer, &cache, true);
    let pages = PageStore::new(&client);
    let net_config = network_config(&loaded.set);

    let mut by_query: BTreeMap<&str, Vec<&serpgauge_core::query::ExpertLabel>> = BTreeMap::new();
    for l in &labels {
        by_query.entry(l.query_id.as_str()).or_default().push(l);
    }
    let mut warnings = Vec::new();
    let mut data: Vec<Vec<LabeledCandidate>> = Vec::new();
    for spec in &loaded.set.queries {
        let Some(query_labels) = by_query.get(spec.query_id.as_str()) else {
            continue;
        };
        let network = if spec.query_type.uses_universal_set() {
            let u_docs: Vec<SegmentedDocument> = spec.u_set.iter().map(|u| pages.doc(u)).collect();
            match build_network(&u_docs, spec, &net_config) {
                Ok(n) => n,
                Err(e) => {
                    warnings.push(format!("{}: {e}; query skipped", spec.query_id));
                    continue;
                }
            }
        } else {
            DecisionNetwork::from_parts(net_config.v, Vec::new())
                .map_err(|e| RunError::Config(e.to_string()))?
        };
        data.push(
            query_labels
                .iter()
                .map(|l| {
                    let doc = pages.doc(&l.url);
                    (
                        feature_families(&network, &doc, &spec.expected_urls),
                        l.grade,
                    )
                })
                .collect(),
        );
    }
    let (_, _, page_warnings) = pages.summary();
    warnings.extend(page_warnings);

    let required = required_sample_size(
        &SampleSizeRequest::with_default_proportion(0.95, 0.05).expect("valid constants"),
    );
    if (data.len() as u64) < required {
        warnings.push(format!(
            "{} labeled queries; {required} are needed for 95% confidence at a 5% margin",
            data.len()
        ));
    }
    let result = tune_lambda(&data, &LinearScoreModel::network_equivalent(), cfg.seed)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let file = LambdaFile {
        lambda: result
            .model
            .lambda
            .iter()
            .map(|(k, v)| (k.clone(), canonical_f64(*v)))
            .collect(),
        z: canonical_f64(result.model.z),
        e_train: canonical_f64(result.e),
        seed: cfg.seed,
    };
    formats::write_file(&cfg.out, &crate::report::to_canonical_json(&file))?;
    Ok(TuneOutcome {
        file,
        result,
        labeled_queries: data.len(),
        warnings,
    })
}
