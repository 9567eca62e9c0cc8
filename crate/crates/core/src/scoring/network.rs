//! The per-query decision network: document → parts → feature nodes.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::document::{has_marker, readability, Part, SegmentedDocument};
use crate::query::{enrich_bigrams, QuerySpec, MIN_U_SET};
use crate::text::{count_term, Term};
use crate::CoreError;

/// Default importance of each part, indexed by [`Part::index`].
pub const DEFAULT_V: [f64; 6] = [2.0, 3.0, 1.0, 2.0, 1.0, 1.5];

/// Below this universal-set size the band is [min, max]; from it on the
/// band is the 10th..90th percentile.
pub const PERCENTILE_BAND_MIN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XMode {
    /// 1 when the value occurs and lies inside the expected band.
    BinaryBand,
    /// The value itself.
    RawCount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureKind {
    DescriptiveTerm(Term),
    ExclusiveTerm(Term),
    DocLength,
    UrlDepth,
    Readability,
    ShallowMarker(String),
}

impl FeatureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::DescriptiveTerm(_) => "descriptive_term",
            FeatureKind::ExclusiveTerm(_) => "exclusive_term",
            FeatureKind::DocLength => "doc_length",
            FeatureKind::UrlDepth => "url_depth",
            FeatureKind::Readability => "readability",
            FeatureKind::ShallowMarker(_) => "shallow_marker",
        }
    }

    /// Metric parameter: the term text or marker string.
    pub fn metric(&self) -> Option<String> {
        match self {
            FeatureKind::DescriptiveTerm(t) | FeatureKind::ExclusiveTerm(t) => Some(t.text()),
            FeatureKind::ShallowMarker(m) => Some(m.clone()),
            _ => None,
        }
    }

    /// Measured value of this feature on one part of `doc`.
    pub fn measure(&self, doc: &SegmentedDocument, part: Part) -> f64 {
        match self {
            FeatureKind::DescriptiveTerm(t) | FeatureKind::ExclusiveTerm(t) => {
                count_term(doc.part(part), t) as f64
            }
            FeatureKind::DocLength => doc.body_length as f64,
            FeatureKind::UrlDepth => doc.url_depth as f64,
            FeatureKind::Readability => readability(doc),
            FeatureKind::ShallowMarker(m) => {
                if has_marker(doc, m) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Distribution of one feature's value over the universal set.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEntry {
    pub samples: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    pub total: f64,
}

fn nearest_rank(sorted: &[f64], pct: usize) -> f64 {
    let rank = (pct * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

impl ThetaEntry {
    pub fn from_samples(samples: Vec<f64>) -> ThetaEntry {
        let total = samples.iter().sum();
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = match sorted.len() {
            0 => (0.0, 0.0),
            n if n >= PERCENTILE_BAND_MIN => (nearest_rank(&sorted, 10), nearest_rank(&sorted, 90)),
            n => (sorted[0], sorted[n - 1]),
        };
        ThetaEntry {
            samples,
            lo,
            hi,
            total,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureNode {
    pub kind: FeatureKind,
    pub part: Part,
    pub mode: XMode,
    pub theta: ThetaEntry,
}

impl FeatureNode {
    /// X_i for `doc`.
    pub fn value(&self, doc: &SegmentedDocument) -> f64 {
        self.value_of(self.kind.measure(doc, self.part))
    }

    pub fn value_of(&self, measured: f64) -> f64 {
        match self.mode {
            XMode::RawCount => measured,
            XMode::BinaryBand => {
                if measured > 0.0 && self.theta.contains(measured) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// W_i for `doc`: its share of the universal-set total.
    pub fn weight(&self, doc: &SegmentedDocument) -> f64 {
        self.weight_of(self.kind.measure(doc, self.part))
    }

    pub fn weight_of(&self, measured: f64) -> f64 {
        if self.theta.total > 0.0 {
            measured / self.theta.total
        } else {
            0.0
        }
    }
}

/// Construction options for a decision network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub v: [f64; 6],
    pub descriptive_mode: XMode,
    pub exclusive_mode: XMode,
    pub shallow_mode: XMode,
    /// Script markers that become shallow marker features.
    pub markers: Vec<String>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            v: DEFAULT_V,
            descriptive_mode: XMode::BinaryBand,
            exclusive_mode: XMode::RawCount,
            shallow_mode: XMode::BinaryBand,
            markers: Vec::new(),
        }
    }
}

impl NetworkConfig {
    pub fn with_overrides(mut self, overrides: &BTreeMap<Part, f64>) -> Self {
        for (part, v) in overrides {
            self.v[part.index()] = *v;
        }
        self
    }
}

/// One evaluated feature: X, W and the importance of its part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureEval {
    pub part: Part,
    pub x: f64,
    pub w: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionNetwork {
    v: [f64; 6],
    features: Vec<FeatureNode>,
}

impl DecisionNetwork {
    /// Assembles a network from explicit nodes. Importances must be finite
    /// and non-negative.
    pub fn from_parts(v: [f64; 6], features: Vec<FeatureNode>) -> Result<Self, CoreError> {
        if let Some(bad) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(CoreError::OutOfRange {
                field: "part importance",
                value: bad.to_string(),
            });
        }
        Ok(DecisionNetwork { v, features })
    }

    pub fn importance(&self, part: Part) -> f64 {
        self.v[part.index()]
    }

    pub fn features(&self) -> &[FeatureNode] {
        &self.features
    }

    pub fn evaluate(&self, doc: &SegmentedDocument) -> Vec<FeatureEval> {
        self.features
            .iter()
            .map(|f| {
                let measured = f.kind.measure(doc, f.part);
                FeatureEval {
                    part: f.part,
                    x: f.value_of(measured),
                    w: f.weight_of(measured),
                    v: self.importance(f.part),
                }
            })
            .collect()
    }

    /// Σ X·W·V over every feature node.
    pub fn score(&self, doc: &SegmentedDocument) -> f64 {
        combine(&self.evaluate(doc))
    }

    /// The score split by part; the entries sum to [`Self::score`].
    pub fn part_contributions(&self, doc: &SegmentedDocument) -> [f64; 6] {
        let mut out = [0.0; 6];
        for e in self.evaluate(doc) {
            out[e.part.index()] += e.x * e.w * e.v;
        }
        out
    }
}

pub fn combine(evals: &[FeatureEval]) -> f64 {
    evals.iter().map(|e| e.x * e.w * e.v).sum()
}

pub fn doc_relevancy_score(network: &DecisionNetwork, doc: &SegmentedDocument) -> f64 {
    network.score(doc)
}

fn dedup_terms(raw: &[String]) -> Vec<Term> {
    let mut terms: Vec<Term> = Vec::new();
    for t in raw {
        if let Ok(term) = Term::parse(t) {
            if !terms.contains(&term) {
                terms.push(term);
            }
        }
    }
    terms
}

fn node(
    kind: FeatureKind,
    part: Part,
    mode: XMode,
    u_docs: &[SegmentedDocument],
) -> Option<FeatureNode> {
    let samples: Vec<f64> = u_docs.iter().map(|d| kind.measure(d, part)).collect();
    let theta = ThetaEntry::from_samples(samples);
    (theta.total > 0.0).then_some(FeatureNode {
        kind,
        part,
        mode,
        theta,
    })
}

/// Builds the network without the universal-set size check. Used for
/// leave-one-out baselines.
pub(crate) fn build_unchecked(
    u_docs: &[SegmentedDocument],
    spec: &QuerySpec,
    config: &NetworkConfig,
) -> DecisionNetwork {
    let spec = enrich_bigrams(spec);
    let mut features = Vec::new();
    for (terms, mode, exclusive) in [
        (&spec.descriptive_terms, config.descriptive_mode, false),
        (&spec.exclusive_terms, config.exclusive_mode, true),
    ] {
        for term in dedup_terms(terms) {
            for part in Part::ALL {
                let kind = if exclusive {
                    FeatureKind::ExclusiveTerm(term.clone())
                } else {
                    FeatureKind::DescriptiveTerm(term.clone())
                };
                features.extend(node(kind, part, mode, u_docs));
            }
        }
    }
    let mode = config.shallow_mode;
    features.extend(node(FeatureKind::DocLength, Part::Body, mode, u_docs));
    features.extend(node(FeatureKind::UrlDepth, Part::Url, mode, u_docs));
    features.extend(node(FeatureKind::Readability, Part::Body, mode, u_docs));
    for marker in &config.markers {
        features.extend(node(
            FeatureKind::ShallowMarker(marker.clone()),
            Part::Body,
            mode,
            u_docs,
        ));
    }
    DecisionNetwork {
        v: config.v,
        features,
    }
}

/// Extracts Θ from the universal set and instantiates one feature node per
/// (part, metric) that occurs somewhere in it.
pub fn build_network(
    u_docs: &[SegmentedDocument],
    spec: &QuerySpec,
    config: &NetworkConfig,
) -> Result<DecisionNetwork, CoreError> {
    if u_docs.len() < MIN_U_SET {
        return Err(CoreError::UniversalSetTooSmall {
            query_id: spec.query_id.clone(),
            size: u_docs.len(),
        });
    }
    DecisionNetwork::from_parts(config.v, Vec::new())?;
    Ok(build_unchecked(u_docs, spec, config))
}
