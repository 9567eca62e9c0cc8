//! On-disk formats: the query-set JSON, the expert-label TSV, and the fitted
//! model file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serpgauge_core::query::{validate_queryset, ExpertLabel, QuerySet, RawQuerySet, Violation};
use serpgauge_core::scoring::LinearScoreModel;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engines::cache::to_stable_json;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {} violation(s)", .violations.len())]
    Invalid {
        path: String,
        violations: Vec<Violation>,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io = |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, bytes).map_err(io)
}

fn parse_err(path: &Path, message: impl ToString) -> FormatError {
    FormatError::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// A validated query set together with the hash of its file bytes.
#[derive(Debug, Clone)]
pub struct LoadedQuerySet {
    pub set: QuerySet,
    pub sha256: String,
}

pub fn parse_queryset(bytes: &[u8], path: &Path) -> Result<QuerySet, FormatError> {
    let raw: RawQuerySet = serde_json::from_slice(bytes).map_err(|e| parse_err(path, e))?;
    validate_queryset(&raw).map_err(|violations| FormatError::Invalid {
        path: path.display().to_string(),
        violations,
    })
}

pub fn read_queryset(path: &Path) -> Result<LoadedQuerySet, FormatError> {
    let bytes = read(path)?;
    let set = parse_queryset(&bytes, path)?;
    Ok(LoadedQuerySet {
        set,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

pub fn queryset_bytes(set: &QuerySet) -> Vec<u8> {
    to_stable_json(&set.to_raw())
}

/// `query_id<TAB>url<TAB>grade` per line, no header. Blank lines are
/// ignored.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<ExpertLabel>, FormatError> {
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [query_id, url, grade] = fields[..] else {
            return Err(parse_err(
                path,
                format!(
                    "line {}: expected 3 tab-separated fields, found {}",
                    i + 1,
                    fields.len()
                ),
            ));
        };
        let grade: u8 = grade.trim().parse().map_err(|_| {
            parse_err(
                path,
                format!("line {}: grade {grade:?} is not an integer", i + 1),
            )
        })?;
        labels.push(ExpertLabel {
            query_id: query_id.to_string(),
            url: url.to_string(),
            grade,
        });
    }
    Ok(labels)
}

pub fn read_labels(path: &Path) -> Result<Vec<ExpertLabel>, FormatError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| parse_err(path, e))?;
    parse_labels(&text, path)
}

pub fn labels_text(labels: &[ExpertLabel]) -> String {
    let mut out = String::new();
    for l in labels {
        let _ = writeln!(out, "{}\t{}\t{}", l.query_id, l.url, l.grade);
    }
    out
}

/// Contents of `lambda.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaFile {
    pub lambda: BTreeMap<String, f64>,
    pub z: f64,
    pub e_train: f64,
    pub seed: u64,
}

impl LambdaFile {
    pub fn model(&self) -> LinearScoreModel {
        LinearScoreModel {
            lambda: self.lambda.clone(),
            z: self.z,
        }
    }
}

pub fn read_model(path: &Path) -> Result<LinearScoreModel, FormatError> {
    let file: LambdaFile = serde_json::from_slice(&read(path)?).map_err(|e| parse_err(path, e))?;
    let model = file.model();
    model.check().map_err(|e| parse_err(path, e))?;
    Ok(model)
}
