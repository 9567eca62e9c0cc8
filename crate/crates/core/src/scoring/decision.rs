//! Turning a relevancy score into a relevance decision.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::document::SegmentedDocument;
use crate::query::QuerySpec;
use crate::scoring::linear::{feature_families, linear_score, LinearScoreModel};
use crate::scoring::network::{build_network, build_unchecked, DecisionNetwork, NetworkConfig};
use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Relevant,
    Uncertain,
    Irrelevant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub hi: f64,
    pub lo: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { hi: 0.5, lo: 0.2 }
    }
}

/// Relevant at or above `hi·B`, irrelevant below `lo·B`. A zero baseline
/// can only yield uncertain (positive score) or irrelevant.
pub fn relevance_decision(score: f64, baseline: f64, t: Thresholds) -> Decision {
    if baseline <= 0.0 {
        return if score > 0.0 {
            Decision::Uncertain
        } else {
            Decision::Irrelevant
        };
    }
    if score >= t.hi * baseline {
        Decision::Relevant
    } else if score < t.lo * baseline {
        Decision::Irrelevant
    } else {
        Decision::Uncertain
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Everything needed to judge candidates of one inference-judged query.
#[derive(Debug, Clone)]
pub struct QueryJudge {
    network: DecisionNetwork,
    model: Option<LinearScoreModel>,
    expected_urls: Vec<alloc::string::String>,
    thresholds: Thresholds,
    self_scores: Vec<f64>,
    baseline: f64,
}

impl QueryJudge {
    /// Builds the network from the universal set and derives the baseline
    /// from leave-one-out self-scores of its members.
    pub fn new(
        u_docs: &[SegmentedDocument],
        spec: &QuerySpec,
        config: &NetworkConfig,
        model: Option<&LinearScoreModel>,
        thresholds: Thresholds,
    ) -> Result<QueryJudge, CoreError> {
        let network = build_network(u_docs, spec, config)?;
        let mut judge = QueryJudge {
            network,
            model: model.cloned(),
            expected_urls: spec.expected_urls.clone(),
            thresholds,
            self_scores: Vec::new(),
            baseline: 0.0,
        };
        let self_scores: Vec<f64> = (0..u_docs.len())
            .map(|i| {
                let rest: Vec<SegmentedDocument> = u_docs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, d)| d.clone())
                    .collect();
                let loo = build_unchecked(&rest, spec, config);
                judge.score_with(&loo, &u_docs[i])
            })
            .collect();
        judge.baseline = median(&self_scores);
        judge.self_scores = self_scores;
        Ok(judge)
    }

    fn score_with(&self, network: &DecisionNetwork, doc: &SegmentedDocument) -> f64 {
        match &self.model {
            None => network.score(doc),
            Some(m) => linear_score(m, &feature_families(network, doc, &self.expected_urls)),
        }
    }

    pub fn score(&self, doc: &SegmentedDocument) -> f64 {
        self.score_with(&self.network, doc)
    }

    pub fn judge(&self, doc: &SegmentedDocument) -> (Decision, f64) {
        let s = self.score(doc);
        (relevance_decision(s, self.baseline, self.thresholds), s)
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn self_scores(&self) -> &[f64] {
        &self.self_scores
    }

    /// The baseline is zero, so no candidate can be judged relevant.
    pub fn is_degenerate(&self) -> bool {
        self.baseline <= 0.0
    }

    pub fn network(&self) -> &DecisionNetwork {
        &self.network
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::PartTexts;
    use crate::query::QueryType;
    use crate::rng::SeededRng;
    use crate::taxonomy::Component;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn threshold_rule() {
        let t = Thresholds::default();
        assert_eq!(relevance_decision(6.0, 10.0, t), Decision::Relevant);
        assert_eq!(relevance_decision(1.0, 10.0, t), Decision::Irrelevant);
        assert_eq!(relevance_decision(3.0, 10.0, t), Decision::Uncertain);
        assert_eq!(relevance_decision(5.0, 10.0, t), Decision::Relevant);
        assert_eq!(relevance_decision(2.0, 10.0, t), Decision::Uncertain);
    }

    #[test]
    fn zero_baseline_fallback() {
        let t = Thresholds::default();
        assert_eq!(relevance_decision(0.3, 0.0, t), Decision::Uncertain);
        assert_eq!(relevance_decision(0.0, 0.0, t), Decision::Irrelevant);
    }

    #[test]
    fn higher_score_never_flips_to_irrelevant() {
        let rank = |d| match d {
            Decision::Irrelevant => 0,
            Decision::Uncertain => 1,
            Decision::Relevant => 2,
        };
        let mut rng = SeededRng::new(1);
        for _ in 0..2000 {
            let b = if rng.below(5) == 0 {
                0.0
            } else {
                rng.unit() * 10.0
            };
            let s = rng.unit() * 10.0;
            let s2 = s + rng.unit() * 5.0;
            let t = Thresholds::default();
            assert!(rank(relevance_decision(s2, b, t)) >= rank(relevance_decision(s, b, t)));
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    fn spec() -> QuerySpec {
        QuerySpec {
            query_id: "q".to_string(),
            component: Component::Ranking,
            domain_path: "ranking/known_items".to_string(),
            query_text: "q".to_string(),
            query_type: QueryType::KnownItem,
            descriptive_terms: vec!["river delta".to_string()],
            exclusive_terms: vec!["sediment".to_string()],
            evidence_terms: vec![],
            expected_urls: vec![],
            u_set: vec![],
        }
    }

    fn doc(i: usize, title: &str, body: &str) -> SegmentedDocument {
        SegmentedDocument::new(
            &format!("https://site{i}.org/x"),
            "t",
            &PartTexts {
                title: title.to_string(),
                body: body.to_string(),
                ..PartTexts::default()
            },
        )
    }

    #[test]
    fn judge_separates_on_topic_from_off_topic() {
        let u: Vec<_> = (0..4)
            .map(|i| {
                doc(
                    i,
                    "river delta",
                    "the river delta carries sediment sediment. river delta.",
                )
            })
            .collect();
        let judge = QueryJudge::new(
            &u,
            &spec(),
            &NetworkConfig::default(),
            None,
            Thresholds::default(),
        )
        .unwrap();
        assert_eq!(judge.self_scores().len(), 4);
        assert!(judge.baseline() > 0.0);
        let on = doc(
            9,
            "river delta",
            "the river delta carries sediment sediment. river delta.",
        );
        let off = doc(10, "cooking", "pasta recipes.");
        assert_eq!(judge.judge(&on).0, Decision::Relevant);
        assert_eq!(judge.judge(&off).0, Decision::Irrelevant);
    }

    #[test]
    fn network_equivalent_model_matches_network_score() {
        let u: Vec<_> = (0..3)
            .map(|i| doc(i, "river delta", &"river delta sediment. ".repeat(i + 1)))
            .collect();
        let plain = QueryJudge::new(
            &u,
            &spec(),
            &NetworkConfig::default(),
            None,
            Thresholds::default(),
        )
        .unwrap();
        let m = LinearScoreModel::network_equivalent();
        let modelled = QueryJudge::new(
            &u,
            &spec(),
            &NetworkConfig::default(),
            Some(&m),
            Thresholds::default(),
        )
        .unwrap();
        let cand = doc(7, "river delta", "river delta sediment.");
        assert!((plain.score(&cand) - modelled.score(&cand)).abs() < 1e-12);
        assert!((plain.baseline() - modelled.baseline()).abs() < 1e-12);
    }
}
