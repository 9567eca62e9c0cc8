//! Relevancy scoring: the decision network, the linear feature model, its
//! tuning against expert grades, and the relevance decision.

pub mod decision;
pub mod linear;
pub mod network;
pub mod tune;

pub use decision::{median, relevance_decision, Decision, QueryJudge, Thresholds};
pub use linear::{
    feature_families, linear_score, missing_families, url_matches, FamilyValues, LinearScoreModel,
    FAMILIES,
};
pub use network::{
    build_network, combine, doc_relevancy_score, DecisionNetwork, FeatureEval, FeatureKind,
    FeatureNode, NetworkConfig, ThetaEntry, XMode, DEFAULT_V,
};
pub use tune::{lambda_grid, rank_agreement, tune_lambda, LabeledCandidate, TuneResult};
