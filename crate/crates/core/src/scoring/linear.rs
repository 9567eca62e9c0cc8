//! Linear feature model S = Σ λ_j f_j + Z.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::document::{readability, Part, SegmentedDocument, BODY_LENGTH, READABILITY, URL_DEPTH};
use crate::scoring::network::DecisionNetwork;
use crate::url::normalize_url;
use crate::CoreError;

pub const EXPECTED_URL_MATCH: &str = "expected_url_match";

/// Every registered feature-family id, in canonical order.
pub const FAMILIES: [&str; 10] = [
    "part:url",
    "part:title",
    "part:meta",
    "part:headings",
    "part:body",
    "part:anchors",
    BODY_LENGTH,
    URL_DEPTH,
    READABILITY,
    EXPECTED_URL_MATCH,
];

pub fn part_family(part: Part) -> &'static str {
    FAMILIES[part.index()]
}

pub fn is_registered(id: &str) -> bool {
    FAMILIES.contains(&id)
}

pub type FamilyValues = BTreeMap<String, f64>;

/// Evaluates every feature family of `doc` for one query.
pub fn feature_families(
    network: &DecisionNetwork,
    doc: &SegmentedDocument,
    expected_urls: &[String],
) -> FamilyValues {
    let mut f = FamilyValues::new();
    for (part, value) in Part::ALL.into_iter().zip(network.part_contributions(doc)) {
        f.insert(part_family(part).to_string(), value);
    }
    f.insert(BODY_LENGTH.to_string(), doc.body_length as f64);
    f.insert(URL_DEPTH.to_string(), doc.url_depth as f64);
    f.insert(READABILITY.to_string(), readability(doc));
    f.insert(
        EXPECTED_URL_MATCH.to_string(),
        if url_matches(&doc.url, expected_urls) {
            1.0
        } else {
            0.0
        },
    );
    f
}

/// Whether `url` equals any of `candidates` after normalization.
pub fn url_matches(url: &str, candidates: &[String]) -> bool {
    let Ok(url) = normalize_url(url) else {
        return false;
    };
    candidates
        .iter()
        .any(|c| normalize_url(c).is_ok_and(|c| c == url))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScoreModel {
    pub lambda: BTreeMap<String, f64>,
    pub z: f64,
}

impl LinearScoreModel {
    pub fn new(lambda: BTreeMap<String, f64>, z: f64) -> Result<Self, CoreError> {
        let model = LinearScoreModel { lambda, z };
        model.check()?;
        Ok(model)
    }

    /// Checks ids against the registry and that every value is finite.
    pub fn check(&self) -> Result<(), CoreError> {
        if let Some(id) = self.lambda.keys().find(|id| !is_registered(id)) {
            return Err(CoreError::UnknownFamily(id.clone()));
        }
        if let Some(v) = self
            .lambda
            .values()
            .chain(core::iter::once(&self.z))
            .find(|v| !v.is_finite())
        {
            return Err(CoreError::OutOfRange {
                field: "model coefficient",
                value: v.to_string(),
            });
        }
        Ok(())
    }

    /// Unit weight on each part contribution, so S equals the decision
    /// network's relevancy score.
    pub fn network_equivalent() -> Self {
        LinearScoreModel {
            lambda: Part::ALL
                .into_iter()
                .map(|p| (part_family(p).to_string(), 1.0))
                .collect(),
            z: 0.0,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        LinearScoreModel {
            lambda: self
                .lambda
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
            z: self.z * c,
        }
    }
}

pub fn linear_score(model: &LinearScoreModel, f: &FamilyValues) -> f64 {
    model
        .lambda
        .iter()
        .map(|(id, l)| l * f.get(id).copied().unwrap_or(0.0))
        .sum::<f64>()
        + model.z
}

/// Model families absent from `f`; they score as zero.
pub fn missing_families<'a>(model: &'a LinearScoreModel, f: &FamilyValues) -> Vec<&'a str> {
    model
        .lambda
        .keys()
        .filter(|id| !f.contains_key(*id))
        .map(String::as_str)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::PartTexts;
    use crate::rng::SeededRng;
    use alloc::vec;

    fn values(pairs: &[(&str, f64)]) -> FamilyValues {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn dot_product_plus_intercept() {
        let m =
            LinearScoreModel::new(values(&[("part:title", 2.0), ("part:body", 1.0)]), 0.1).unwrap();
        let f = values(&[("part:title", 0.5), ("part:body", 1.0)]);
        assert!((linear_score(&m, &f) - 2.1).abs() < 1e-15);
    }

    #[test]
    fn zero_lambda_gives_intercept() {
        let m = LinearScoreModel::new(values(&[("part:title", 0.0)]), 0.7).unwrap();
        assert_eq!(linear_score(&m, &values(&[("part:title", 123.0)])), 0.7);
    }

    #[test]
    fn missing_family_counts_as_zero() {
        let m =
            LinearScoreModel::new(values(&[("part:title", 2.0), ("url_depth", 1.0)]), 0.0).unwrap();
        let f = values(&[("part:title", 1.0)]);
        assert_eq!(linear_score(&m, &f), 2.0);
        assert_eq!(missing_families(&m, &f), vec!["url_depth"]);
    }

    #[test]
    fn unknown_family_rejected() {
        assert_eq!(
            LinearScoreModel::new(values(&[("pagerank", 1.0)]), 0.0),
            Err(CoreError::UnknownFamily("pagerank".to_string()))
        );
        assert!(LinearScoreModel::new(values(&[]), f64::INFINITY).is_err());
    }

    #[test]
    fn scaling_preserves_ordering() {
        let mut rng = SeededRng::new(3);
        for _ in 0..200 {
            let m = LinearScoreModel {
                lambda: FAMILIES
                    .iter()
                    .map(|id| (id.to_string(), rng.unit() * 4.0 - 2.0))
                    .collect(),
                z: 0.0,
            };
            let c = 0.01 + rng.unit() * 50.0;
            let scaled = m.scaled(c);
            let docs: Vec<FamilyValues> = (0..8)
                .map(|_| {
                    FAMILIES
                        .iter()
                        .map(|id| (id.to_string(), rng.unit()))
                        .collect()
                })
                .collect();
            let order = |model: &LinearScoreModel| {
                let mut idx: Vec<usize> = (0..docs.len()).collect();
                idx.sort_by(|a, b| {
                    linear_score(model, &docs[*b]).total_cmp(&linear_score(model, &docs[*a]))
                });
                idx
            };
            assert_eq!(order(&m), order(&scaled));
        }
    }

    #[test]
    fn families_cover_registry() {
        let net = DecisionNetwork::from_parts([1.0; 6], vec![]).unwrap();
        let doc = SegmentedDocument::new("https://www.ex.org/a/", "t", &PartTexts::default());
        let f = feature_families(&net, &doc, &["https://ex.org/a".to_string()]);
        assert_eq!(f.len(), FAMILIES.len());
        assert!(f.keys().all(|k| is_registered(k)));
        assert_eq!(f[EXPECTED_URL_MATCH], 1.0);
        assert_eq!(f[URL_DEPTH], 1.0);
    }
}
