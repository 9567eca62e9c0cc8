//! Run reports: canonical JSON, CSV, and SVG charts.

mod canonical;
pub mod svg;

use serde::{Deserialize, Serialize};
use serpgauge_core::metrics::{ComponentRollup, DomainScore};
use serpgauge_core::taxonomy::DomainTaxonomy;

pub use canonical::{canonical_f64, format_float, to_canonical_json};

/// Work performed by a run. Counts only, so reports stay reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub tasks: usize,
    pub failed_tasks: usize,
    pub serps_loaded: usize,
    pub pages_loaded: usize,
    pub pages_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    /// SHA-256 of the query-set file bytes.
    pub queryset_hash: String,
    pub engines: Vec<String>,
    pub k: usize,
    pub domain_scores: Vec<DomainScore>,
    pub components: Vec<ComponentRollup>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

impl RunReport {
    /// Rounds every float to its serialized precision so that parsing the
    /// emitted JSON gives back exactly this report.
    pub fn canonicalize(&mut self) {
        for d in &mut self.domain_scores {
            d.accuracy = canonical_f64(d.accuracy);
            d.mrr = canonical_f64(d.mrr);
            d.signed_mrr = canonical_f64(d.signed_mrr);
            d.pass_rate = d.pass_rate.map(canonical_f64);
        }
        for c in &mut self.components {
            c.score = canonical_f64(c.score);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub const CSV_COLUMNS: [&str; 8] = [
    "engine_id",
    "component",
    "domain_path",
    "n_queries",
    "accuracy",
    "mrr",
    "signed_mrr",
    "pass_rate",
];

fn to_csv(report: &RunReport) -> Vec<u8> {
    let taxonomy = DomainTaxonomy::builtin();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let row_err = "writing to memory";
    w.write_record(CSV_COLUMNS).expect(row_err);
    for d in &report.domain_scores {
        let component = taxonomy
            .leaf(&d.domain_path)
            .map(|l| l.component.as_str())
            .unwrap_or("");
        w.write_record([
            d.engine_id.as_str(),
            component,
            d.domain_path.as_str(),
            &d.n_queries.to_string(),
            &format_float(d.accuracy),
            &format_float(d.mrr),
            &format_float(d.signed_mrr),
            &d.pass_rate.map(format_float).unwrap_or_default(),
        ])
        .expect(row_err);
    }
    w.into_inner().expect(row_err)
}

pub fn emit_report(report: &RunReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => to_canonical_json(report),
        ReportFormat::Csv => to_csv(report),
    }
}

pub fn parse_report(bytes: &[u8]) -> serde_json::Result<RunReport> {
    serde_json::from_slice(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serpgauge_core::taxonomy::Component;

    pub(crate) fn sample() -> RunReport {
        let mut domain_scores = Vec::new();
        for engine in ["a", "b"] {
            for (leaf, pass) in [
                ("normalizer/numbers/cardinal", Some(2.0 / 3.0)),
                ("normalizer/numbers/ordinal", Some(0.1)),
                ("ranking/navigational", None),
            ] {
                domain_scores.push(DomainScore {
                    domain_path: leaf.to_string(),
                    engine_id: engine.to_string(),
                    n_queries: 3,
                    accuracy: 1.0 / 3.0,
                    mrr: 0.583333333333,
                    signed_mrr: -1.0 / 7.0,
                    pass_rate: pass,
                });
            }
        }
        let mut r = RunReport {
            run_id: "r".to_string(),
            queryset_hash: "h".to_string(),
            engines: vec!["a".to_string(), "b".to_string()],
            k: 10,
            domain_scores,
            components: vec![ComponentRollup {
                component: Component::Normalizer,
                engine_id: "a".to_string(),
                n_leaves: 2,
                score: 1e-12 + 0.383333333,
            }],
            warnings: Vec::new(),
            timing: Timing::default(),
        };
        r.canonicalize();
        r
    }

    #[test]
    fn json_round_trips_exactly() {
        let r = sample();
        let bytes = emit_report(&r, ReportFormat::Json);
        assert_eq!(parse_report(&bytes).unwrap(), r);
        assert_eq!(emit_report(&r, ReportFormat::Json), bytes);
    }

    #[test]
    fn empty_warnings_are_kept() {
        let text = String::from_utf8(emit_report(&sample(), ReportFormat::Json)).unwrap();
        assert!(text.contains("\"warnings\": []"), "{text}");
        assert!(text.contains("\"pass_rate\": null"));
        assert!(text.contains("0.666666667"));
    }

    #[test]
    fn csv_has_one_row_per_engine_and_leaf() {
        let text = String::from_utf8(emit_report(&sample(), ReportFormat::Csv)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(
            lines[1],
            "a,normalizer,normalizer/numbers/cardinal,3,0.333333333,0.583333333,-0.142857143,0.666666667"
        );
        assert!(lines[3].ends_with(','));
    }
}
