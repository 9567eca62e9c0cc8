//! Rank-quality metrics over judged result lists, and their aggregation to
//! domain leaves and components.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::query::QuerySpec;
use crate::taxonomy::{Component, DomainTaxonomy};

pub use crate::scoring::Decision as Judgment;

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgedEntry {
    pub rank: u32,
    pub url: String,
    pub judgment: Judgment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgedSerp {
    pub query_id: String,
    pub engine_id: String,
    pub entries: Vec<JudgedEntry>,
}

impl JudgedSerp {
    fn first_relevant(&self) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.judgment == Judgment::Relevant)
    }
}

pub fn reciprocal_rank(serp: &JudgedSerp) -> f64 {
    serp.first_relevant()
        .map_or(0.0, |i| 1.0 / f64::from(serp.entries[i].rank))
}

/// Like [`reciprocal_rank`], but −1 when a result judged irrelevant is
/// ranked above the first relevant one. Uncertain results are neutral.
pub fn signed_reciprocal_rank(serp: &JudgedSerp) -> f64 {
    let Some(first) = serp.first_relevant() else {
        return 0.0;
    };
    if serp.entries[..first]
        .iter()
        .any(|e| e.judgment == Judgment::Irrelevant)
    {
        -1.0
    } else {
        reciprocal_rank(serp)
    }
}

/// 1 when a relevant result appears within the top `k`, else 0.
pub fn accuracy_at_k(serp: &JudgedSerp, k: usize) -> f64 {
    let hit = serp
        .entries
        .iter()
        .any(|e| e.rank as usize <= k && e.judgment == Judgment::Relevant);
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Share of the top `k` results judged relevant. Short lists are scored
/// over the results actually returned.
pub fn probe_pass_rate(serp: &JudgedSerp, k: usize) -> f64 {
    let top: Vec<_> = serp
        .entries
        .iter()
        .filter(|e| e.rank as usize <= k)
        .collect();
    if top.is_empty() {
        return 0.0;
    }
    let relevant = top
        .iter()
        .filter(|e| e.judgment == Judgment::Relevant)
        .count();
    relevant as f64 / top.len() as f64
}

/// Per-(engine, query) metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub query_id: String,
    pub engine_id: String,
    pub domain_path: String,
    pub component: Component,
    pub rr: f64,
    pub srr: f64,
    pub accuracy: f64,
    /// Present for analyzer probes only.
    pub pass_rate: Option<f64>,
}

impl QueryOutcome {
    pub fn from_judged(serp: &JudgedSerp, spec: &QuerySpec, k: usize) -> QueryOutcome {
        QueryOutcome {
            query_id: spec.query_id.clone(),
            engine_id: serp.engine_id.clone(),
            domain_path: spec.domain_path.clone(),
            component: spec.component,
            rr: reciprocal_rank(serp),
            srr: signed_reciprocal_rank(serp),
            accuracy: accuracy_at_k(serp, k),
            pass_rate: spec
                .component
                .is_analyzer()
                .then(|| probe_pass_rate(serp, k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainScore {
    pub domain_path: String,
    pub engine_id: String,
    pub n_queries: usize,
    pub accuracy: f64,
    pub mrr: f64,
    pub signed_mrr: f64,
    pub pass_rate: Option<f64>,
}

impl DomainScore {
    /// The value a leaf contributes to its component: pass rate for
    /// analyzer probes, MRR for ranked lists.
    pub fn headline(&self) -> f64 {
        self.pass_rate.unwrap_or(self.mrr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRollup {
    pub component: Component,
    pub engine_id: String,
    pub n_leaves: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Aggregate {
    pub domains: Vec<DomainScore>,
    pub components: Vec<ComponentRollup>,
    pub warnings: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Leaf score = mean over its queries; component score = mean over its
/// leaves. `engines` × `leaves` lists what was expected so that empty leaves
/// can be reported.
pub fn aggregate(outcomes: &[QueryOutcome], engines: &[String], leaves: &[String]) -> Aggregate {
    let taxonomy = DomainTaxonomy::builtin();
    let mut grouped: BTreeMap<(&str, &str), Vec<&QueryOutcome>> = BTreeMap::new();
    for o in outcomes {
        grouped
            .entry((o.engine_id.as_str(), o.domain_path.as_str()))
            .or_default()
            .push(o);
    }
    let mut out = Aggregate::default();

    let mut engines: Vec<&str> = engines.iter().map(String::as_str).collect();
    engines.extend(outcomes.iter().map(|o| o.engine_id.as_str()));
    engines.sort_unstable();
    engines.dedup();
    let mut leaves: Vec<&str> = leaves.iter().map(String::as_str).collect();
    leaves.extend(outcomes.iter().map(|o| o.domain_path.as_str()));
    leaves.sort_unstable();
    leaves.dedup();

    for engine in &engines {
        for leaf in &leaves {
            let Some(group) = grouped.get_mut(&(*engine, *leaf)) else {
                out.warnings
                    .push(format!("{engine}: {leaf}: no scored queries, leaf omitted"));
                continue;
            };
            // Fixed summation order keeps results independent of input order.
            group.sort_by(|a, b| a.query_id.cmp(&b.query_id));
            let analyzer = group.iter().all(|o| o.pass_rate.is_some());
            out.domains.push(DomainScore {
                domain_path: leaf.to_string(),
                engine_id: engine.to_string(),
                n_queries: group.len(),
                accuracy: mean(group.iter().map(|o| o.accuracy)),
                mrr: mean(group.iter().map(|o| o.rr)),
                signed_mrr: mean(group.iter().map(|o| o.srr)),
                pass_rate: analyzer.then(|| mean(group.iter().filter_map(|o| o.pass_rate))),
            });
        }
    }

    for engine in &engines {
        for component in Component::ALL {
            let scores: Vec<f64> = out
                .domains
                .iter()
                .filter(|d| d.engine_id == *engine)
                .filter(|d| taxonomy.leaf(&d.domain_path).map(|l| l.component) == Some(component))
                .map(DomainScore::headline)
                .collect();
            if scores.is_empty() {
                continue;
            }
            out.components.push(ComponentRollup {
                component,
                engine_id: engine.to_string(),
                n_leaves: scores.len(),
                score: mean(scores.into_iter()),
            });
        }
    }
    out
}
