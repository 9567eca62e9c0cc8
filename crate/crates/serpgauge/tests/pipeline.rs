use std::path::Path;

use serpgauge::engines::{Cache, OfflineTransport, SystemClock};
use serpgauge::html::segment_html;
use serpgauge::mockgen::{write_mock, MockLayout, MockOptions};
use serpgauge::pipeline::{evaluate, run_evaluate, run_tune, RunConfig, RunError, TuneConfig};
use serpgauge::report::{emit_report, parse_report, ReportFormat};
use serpgauge_core::mock::{Defect, DefectSet, MockCorpus, MOCK_RETRIEVED_AT};

fn mock(dir: &Path, engines: Vec<DefectSet>) {
    let opts = MockOptions {
        seed: 11,
        size: 150,
        queries: Some(20),
        engines,
        count: 10,
    };
    write_mock(dir, &opts).unwrap();
}

fn config(dir: &Path, workers: usize) -> RunConfig {
    let layout = MockLayout::new(dir);
    RunConfig {
        queryset: layout.queryset,
        engines_dir: layout.engines,
        cache_dir: layout.cache,
        out_dir: dir.join(format!("out{workers}")),
        offline: true,
        k: 10,
        count: 10,
        workers,
        seed: 0,
        model: None,
    }
}

#[test]
fn rendered_mock_pages_segment_back_to_their_parts() {
    let corpus = MockCorpus::build(3, 120).unwrap();
    for doc in &corpus.documents {
        let html = doc.render_html();
        let parsed = segment_html(html.as_bytes(), &doc.url, MOCK_RETRIEVED_AT);
        assert_eq!(parsed, doc.segmented(MOCK_RETRIEVED_AT), "{}", doc.url);
    }
}

#[test]
fn report_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    mock(dir.path(), vec![DefectSet::only(Defect::ShuffledRank)]);
    let one = evaluate(
        &config(dir.path(), 1),
        &OfflineTransport,
        &SystemClock::default(),
    )
    .unwrap();
    let many = evaluate(
        &config(dir.path(), 8),
        &OfflineTransport,
        &SystemClock::default(),
    )
    .unwrap();
    assert!(!one.budget_exceeded);
    for format in [ReportFormat::Json, ReportFormat::Csv] {
        assert_eq!(
            emit_report(&one.report, format),
            emit_report(&many.report, format)
        );
    }
    assert_eq!(one.report.engines.len(), 2);
}

#[test]
fn written_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    mock(dir.path(), vec![]);
    let cfg = config(dir.path(), 2);
    let outcome = run_evaluate(&cfg, &OfflineTransport, &SystemClock::default()).unwrap();
    let bytes = std::fs::read(cfg.out_dir.join("report.json")).unwrap();
    let parsed = parse_report(&bytes).unwrap();
    assert_eq!(parsed, outcome.report);
    assert_eq!(emit_report(&parsed, ReportFormat::Json), bytes);

    let csv = std::fs::read_to_string(cfg.out_dir.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + parsed.domain_scores.len());
    assert!(cfg.out_dir.join("charts/summary.svg").is_file());
}

#[test]
fn missing_fixtures_abort_before_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    mock(dir.path(), vec![]);
    let cfg = config(dir.path(), 2);
    let serp = Cache::new(&cfg.cache_dir).serp_path("mock-clean", "q001");
    assert!(serp.is_file(), "{}", serp.display());
    std::fs::remove_file(&serp).unwrap();
    match run_evaluate(&cfg, &OfflineTransport, &SystemClock::default()) {
        Err(e @ RunError::MissingFixtures(_)) => {
            assert_eq!(e.exit_code(), 2);
            let RunError::MissingFixtures(missing) = e else {
                unreachable!()
            };
            assert_eq!(missing, vec!["serp mock-clean/q001".to_string()]);
        }
        other => panic!("{:?}", other.map(|o| o.report.run_id)),
    }
    assert!(!cfg.out_dir.exists());
}

#[test]
fn tuning_on_mock_labels_does_not_lose_agreement() {
    let dir = tempfile::tempdir().unwrap();
    mock(dir.path(), vec![]);
    let layout = MockLayout::new(dir.path());
    let out = dir.path().join("lambda.json");
    let cfg = TuneConfig {
        queryset: layout.queryset.clone(),
        labels: layout.labels,
        cache_dir: layout.cache.clone(),
        seed: 3,
        out: out.clone(),
    };
    let tuned = run_tune(&cfg, &SystemClock::default()).unwrap();
    assert!(tuned.result.e >= tuned.result.e_initial);
    assert!(tuned.labeled_queries > 0);
    assert!(tuned.warnings.iter().any(|w| w.contains("385")));
    let again = run_tune(&cfg, &SystemClock::default()).unwrap();
    assert_eq!(again.file, tuned.file);

    let mut run = config(dir.path(), 2);
    run.model = Some(out);
    let with_model = evaluate(&run, &OfflineTransport, &SystemClock::default()).unwrap();
    let plain = evaluate(
        &config(dir.path(), 2),
        &OfflineTransport,
        &SystemClock::default(),
    )
    .unwrap();
    assert_ne!(with_model.report.run_id, plain.report.run_id);
}
