//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serpgauge::engines::{OfflineTransport, SystemClock};
use serpgauge::mockgen::{write_mock, MockLayout, MockOptions};
use serpgauge::pipeline::{evaluate, RunConfig};
use serpgauge_core::document::{Part, PartTexts, SegmentedDocument};
use serpgauge_core::metrics::{
    accuracy_at_k, reciprocal_rank, signed_reciprocal_rank, JudgedEntry, JudgedSerp, Judgment,
};
use serpgauge_core::mock::{Defect, DefectSet};
use serpgauge_core::sample::{required_sample_size, SampleSizeRequest};
use serpgauge_core::scoring::linear::{FamilyValues, LinearScoreModel};
use serpgauge_core::scoring::network::{
    doc_relevancy_score, DecisionNetwork, FeatureKind, FeatureNode, ThetaEntry, XMode, DEFAULT_V,
};
use serpgauge_core::scoring::tune::tune_lambda;
use serpgauge_core::taxonomy::Component;
use serpgauge_core::text::{count_occurrences, normalize_text, Term};
use serpgauge_core::SeededRng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

// 1

const VOCAB: [&str; 6] = ["alpha", "beta", "gamma", "delta", "eps", "zeta"];

fn random_text(rng: &mut SeededRng, max_words: usize) -> String {
    let n = rng.below(max_words + 1);
    (0..n)
        .map(|_| VOCAB[rng.below(VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

fn brute_count(tokens: &[String], needle: &[&str]) -> f64 {
    let mut c = 0;
    for start in 0..tokens.len() {
        if start + needle.len() <= tokens.len()
            && needle
                .iter()
                .enumerate()
                .all(|(i, w)| tokens[start + i] == *w)
        {
            c += 1;
        }
    }
    c as f64
}

fn network_oracle() -> Result<String, String> {
    let started = Instant::now();
    let mut rng = SeededRng::new(20_240_101);
    let mut nonzero = 0;
    for case in 0..1000 {
        let mut v = [0.0; 6];
        for x in v.iter_mut() {
            *x = rng.unit() * 5.0;
        }
        let n_parts = 1 + rng.below(6);
        let parts: Vec<Part> = Part::ALL[..n_parts].to_vec();
        let n_features = 1 + rng.below(8);
        let mut spec = Vec::new();
        let mut nodes = Vec::new();
        for _ in 0..n_features {
            let words: Vec<&str> = (0..1 + rng.below(2))
                .map(|_| VOCAB[rng.below(VOCAB.len())])
                .collect();
            let part = parts[rng.below(parts.len())];
            let mode = if rng.below(2) == 0 {
                XMode::BinaryBand
            } else {
                XMode::RawCount
            };
            let samples: Vec<f64> = (0..1 + rng.below(8)).map(|_| rng.below(6) as f64).collect();
            let term = Term::parse(&words.join(" ")).map_err(|e| e.to_string())?;
            nodes.push(FeatureNode {
                kind: FeatureKind::DescriptiveTerm(term),
                part,
                mode,
                theta: ThetaEntry::from_samples(samples.clone()),
            });
            spec.push((words, part, mode, samples));
        }
        let network = DecisionNetwork::from_parts(v, nodes).map_err(|e| e.to_string())?;
        let texts = PartTexts {
            title: random_text(&mut rng, 6),
            meta: random_text(&mut rng, 6),
            headings: random_text(&mut rng, 6),
            body: random_text(&mut rng, 20),
            anchors: random_text(&mut rng, 6),
        };
        let doc = SegmentedDocument::new("https://alpha.example/beta/gamma", "t", &texts);

        let mut expected = 0.0;
        for (words, part, mode, samples) in &spec {
            let count = brute_count(&doc.part(*part).tokens, words);
            let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = samples.iter().sum();
            let x = match mode {
                XMode::RawCount => count,
                XMode::BinaryBand => f64::from(u8::from(count > 0.0 && lo <= count && count <= hi)),
            };
            let w = if total > 0.0 { count / total } else { 0.0 };
            expected += x * w * v[part.index()];
        }
        let got = doc_relevancy_score(&network, &doc);
        let err = (got - expected).abs();
        ensure(err <= 1e-12 * expected.abs().max(f64::MIN_POSITIVE), || {
            format!("case {case}: score {got}, oracle {expected}")
        })?;
        if expected > 0.0 {
            nonzero += 1;
        }
    }
    ensure(nonzero > 100, || format!("only {nonzero} non-zero cases"))?;
    within(started.elapsed(), Duration::from_secs(5))?;
    Ok(format!("1000 networks, {nonzero} with non-zero score"))
}

// 2

fn node(part: Part, mode: XMode, samples: &[f64]) -> FeatureNode {
    FeatureNode {
        kind: FeatureKind::DescriptiveTerm(Term::parse("alpha").unwrap()),
        part,
        mode,
        theta: ThetaEntry::from_samples(samples.to_vec()),
    }
}

fn hand_cases() -> Result<String, String> {
    let band = ThetaEntry::from_samples(vec![10.0, 12.0, 15.0]);
    ensure((band.lo, band.hi, band.total) == (10.0, 15.0, 37.0), || {
        format!("{band:?}")
    })?;
    let binary = node(Part::Body, XMode::BinaryBand, &[10.0, 12.0, 15.0]);
    ensure(binary.value_of(12.0) == 1.0, || {
        "count 12 outside [10,15]".into()
    })?;
    ensure(binary.value_of(3.0) == 0.0, || {
        "count 3 inside [10,15]".into()
    })?;
    let raw = node(Part::Title, XMode::RawCount, &[1.0, 2.0, 3.0]);
    ensure(raw.value_of(3.0) == 3.0, || "raw count".into())?;
    ensure(
        raw.value_of(0.0) == 0.0 && binary.value_of(0.0) == 0.0,
        || "absent term".into(),
    )?;

    let w = node(Part::Body, XMode::RawCount, &[2.0, 3.0, 5.0]);
    ensure(w.weight_of(2.0) == 0.2, || {
        format!("W = {}", w.weight_of(2.0))
    })?;
    let zero = node(Part::Body, XMode::RawCount, &[0.0, 0.0, 0.0]);
    ensure(zero.weight_of(4.0) == 0.0, || "zero total".into())?;
    let single = node(Part::Body, XMode::RawCount, &[7.0]);
    ensure(single.weight_of(7.0) == 1.0, || "singleton U".into())?;

    let network = DecisionNetwork::from_parts(
        DEFAULT_V,
        vec![
            node(Part::Title, XMode::BinaryBand, &[1.0, 1.0]),
            node(Part::Body, XMode::BinaryBand, &[2.0, 3.0, 5.0]),
        ],
    )
    .map_err(|e| e.to_string())?;
    let doc = SegmentedDocument::new(
        "https://x.example/",
        "t",
        &PartTexts {
            title: "alpha".into(),
            body: "alpha beta alpha".into(),
            ..PartTexts::default()
        },
    );
    let s = doc_relevancy_score(&network, &doc);
    ensure(s == 1.7, || format!("X=(1,1), W=(0.5,0.2) gave {s}"))?;
    Ok("band, W, zero-total, singleton and Σ XWV cases exact".into())
}

// 3

fn kendall(scores: &[f64], grades: &[u8]) -> Option<f64> {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if grades[i] > grades[j] {
                pairs += 1.0;
                num +=
                    (scores[i] - scores[j]).signum() * f64::from(u8::from(scores[i] != scores[j]));
            }
        }
    }
    (pairs > 0.0).then(|| num / pairs)
}

fn lambda_recovery() -> Result<String, String> {
    let started = Instant::now();
    let families = [
        "part:title",
        "part:body",
        "body_length",
        "url_depth",
        "readability",
    ];
    let planted = [3.0, 1.5, 0.7, 0.3, 2.0];
    let mut rng = SeededRng::new(42);
    let mut rows = Vec::new();
    for _ in 0..200 {
        let f: Vec<f64> = families.iter().map(|_| rng.unit()).collect();
        let s: f64 = f.iter().zip(planted).map(|(x, l)| x * l).sum::<f64>() + 0.01 * rng.normal();
        rows.push((f, s));
    }
    let mut sorted: Vec<f64> = rows.iter().map(|r| r.1).collect();
    sorted.sort_by(f64::total_cmp);
    let q = |p: usize| sorted[p * sorted.len() / 4];
    let cuts = [q(1), q(2), q(3)];
    let grade = |s: f64| cuts.iter().filter(|c| s >= **c).count() as u8;

    let queries: Vec<Vec<(FamilyValues, u8)>> = rows
        .chunks(10)
        .map(|chunk| {
            chunk
                .iter()
                .map(|(f, s)| {
                    let map: FamilyValues = families
                        .iter()
                        .map(|id| id.to_string())
                        .zip(f.iter().copied())
                        .collect();
                    (map, grade(*s))
                })
                .collect()
        })
        .collect();
    let (train, held_out) = queries.split_at(16);
    let initial = LinearScoreModel::new(
        families
            .iter()
            .map(|id| (id.to_string(), 1.0))
            .collect::<BTreeMap<_, _>>(),
        0.0,
    )
    .map_err(|e| e.to_string())?;
    let fit = tune_lambda(train, &initial, 9).map_err(|e| e.to_string())?;
    let again = tune_lambda(train, &initial, 9).map_err(|e| e.to_string())?;
    ensure(fit == again, || {
        "tuning is not deterministic for a fixed seed".into()
    })?;
    ensure(fit.e >= fit.e_initial, || {
        format!("E {} below initial {}", fit.e, fit.e_initial)
    })?;

    let mut agreements = Vec::new();
    for q in held_out {
        let scores: Vec<f64> = q
            .iter()
            .map(|(f, _)| {
                f.iter()
                    .map(|(id, v)| v * fit.model.lambda.get(id).copied().unwrap_or(0.0))
                    .sum()
            })
            .collect();
        let grades: Vec<u8> = q.iter().map(|c| c.1).collect();
        agreements.extend(kendall(&scores, &grades));
    }
    let e = agreements.iter().sum::<f64>() / agreements.len() as f64;
    ensure(e >= 0.95, || format!("held-out E = {e:.4}"))?;
    within(started.elapsed(), Duration::from_secs(10))?;
    Ok(format!("held-out E = {e:.4}, training E = {:.4}", fit.e))
}

// 4

fn judged(pattern: &str) -> JudgedSerp {
    JudgedSerp {
        query_id: "q".into(),
        engine_id: "e".into(),
        entries: pattern
            .chars()
            .enumerate()
            .map(|(i, c)| JudgedEntry {
                rank: i as u32 + 1,
                url: format!("https://r.example/{i}"),
                judgment: match c {
                    'R' => Judgment::Relevant,
                    'U' => Judgment::Uncertain,
                    _ => Judgment::Irrelevant,
                },
            })
            .collect(),
    }
}

fn metric_table() -> Result<String, String> {
    // pattern, k, accuracy, MRR, signed MRR
    let table: [(&str, usize, f64, f64, f64); 14] = [
        ("R", 10, 1.0, 1.0, 1.0),
        ("IR", 10, 1.0, 0.5, -1.0),
        ("UR", 10, 1.0, 0.5, 0.5),
        ("III", 10, 0.0, 0.0, 0.0),
        ("", 10, 0.0, 0.0, 0.0),
        ("UUUR", 10, 1.0, 0.25, 0.25),
        ("UIUR", 10, 1.0, 0.25, -1.0),
        ("RIR", 10, 1.0, 1.0, 1.0),
        ("UUUUR", 3, 0.0, 0.2, 0.2),
        ("URI", 10, 1.0, 0.5, 0.5),
        ("UUU", 10, 0.0, 0.0, 0.0),
        ("IUR", 10, 1.0, 1.0 / 3.0, -1.0),
        ("RR", 1, 1.0, 1.0, 1.0),
        ("UUIUUR", 10, 1.0, 1.0 / 6.0, -1.0),
    ];
    for (pattern, k, acc, mrr, smrr) in table {
        let s = judged(pattern);
        let got = (
            accuracy_at_k(&s, k),
            reciprocal_rank(&s),
            signed_reciprocal_rank(&s),
        );
        ensure(got == (acc, mrr, smrr), || {
            format!(
                "{pattern:?}@{k}: got {got:?}, expected {:?}",
                (acc, mrr, smrr)
            )
        })?;
    }
    Ok(format!("{} judged lists exact", table.len()))
}

// 5

fn phi(x: f64) -> f64 {
    // Composite Simpson over [0, x] of the standard normal density.
    let n = 20_000;
    let h = x / n as f64;
    let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(0.0) + f(x);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

fn z_two_sided(confidence: f64) -> f64 {
    let target = 1.0 - (1.0 - confidence) / 2.0;
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..80 {
        let mid = (lo + hi) / 2.0;
        if phi(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

fn oracle_n(c: f64, e: f64, p: f64) -> u64 {
    let z = z_two_sided(c);
    (z * z * p * (1.0 - p) / (e * e)).ceil() as u64
}

fn n(c: f64, e: f64, p: f64) -> Result<u64, String> {
    SampleSizeRequest::new(c, e, p)
        .map(|r| required_sample_size(&r))
        .map_err(|err| format!("({c}, {e}, {p}): {err}"))
}

fn sample_size() -> Result<String, String> {
    ensure(n(0.95, 0.05, 0.5)? == 385, || {
        "(0.95, 0.05, 0.5) is not 385".into()
    })?;
    let mut rng = SeededRng::new(5);
    for _ in 0..100 {
        let c = 0.80 + rng.unit() * 0.19;
        let e = 0.01 + rng.unit() * 0.19;
        let p = 0.01 + rng.unit() * 0.98;
        let got = n(c, e, p)?;
        let want = oracle_n(c, e, p);
        ensure(got == want, || {
            format!("({c}, {e}, {p}): {got}, oracle {want}")
        })?;
        let wider = e * (1.0 + rng.unit());
        ensure(n(c, wider, p)? <= got, || {
            format!("not monotone in margin at ({c}, {e}, {p})")
        })?;
        ensure(n(c, e, 0.5)? >= got, || {
            format!("p = 0.5 not maximal at ({c}, {e}, {p})")
        })?;
    }
    Ok("385, plus 100 random triples against an independent quantile".into())
}

// 6

fn localization() -> Result<String, String> {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = MockOptions {
        seed: 7,
        size: 500,
        queries: Some(50),
        engines: Defect::ALL.into_iter().map(DefectSet::only).collect(),
        count: 10,
    };
    let summary = write_mock(dir.path(), &opts).map_err(|e| e.to_string())?;
    ensure(summary.queries == 50, || {
        format!("{} queries", summary.queries)
    })?;
    let layout = MockLayout::new(dir.path());
    let cfg = RunConfig {
        queryset: layout.queryset,
        engines_dir: layout.engines,
        cache_dir: layout.cache,
        out_dir: dir.path().join("report"),
        offline: true,
        k: 10,
        count: 10,
        workers: 4,
        seed: 0,
        model: None,
    };
    let outcome =
        evaluate(&cfg, &OfflineTransport, &SystemClock::default()).map_err(|e| e.to_string())?;
    let scores: BTreeMap<(String, Component), f64> = outcome
        .report
        .components
        .iter()
        .map(|c| ((c.engine_id.clone(), c.component), c.score))
        .collect();
    let clean = DefectSet::none().engine_id();
    let mut gaps = Vec::new();
    for defect in Defect::ALL {
        let id = DefectSet::only(defect).engine_id();
        for component in Component::ALL {
            let (Some(a), Some(b)) = (
                scores.get(&(clean.clone(), component)),
                scores.get(&(id.clone(), component)),
            ) else {
                continue;
            };
            if component == defect.component() {
                ensure(a - b >= 0.2, || {
                    format!("{id}: {component:?} gap {:.3}", a - b)
                })?;
                gaps.push(format!("{}={:.2}", defect.as_str(), a - b));
            } else {
                ensure(a == b, || format!("{id}: {component:?} moved {a} -> {b}"))?;
            }
        }
        ensure(
            scores.contains_key(&(id.clone(), defect.component())),
            || format!("{id}: no score for its own component"),
        )?;
    }
    within(started.elapsed(), Duration::from_secs(60))?;
    Ok(format!("gaps {}", gaps.join(" ")))
}

// 7

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/bundled")
}

fn run_offline(out: &Path) -> Result<(), String> {
    let b = bundled();
    let status = Command::new(env!("CARGO_BIN_EXE_serpgauge"))
        .args(["evaluate", "--offline", "--queryset"])
        .arg(b.join("queryset.json"))
        .arg("--engines")
        .arg(b.join("engines"))
        .arg("--cache")
        .arg(b.join("cache"))
        .arg("--out")
        .arg(out)
        .stdout(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || {
        format!("evaluate exited with {status}")
    })
}

fn tree(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                files.insert(path.strip_prefix(root).unwrap().to_path_buf(), bytes);
            }
        }
    }
    Ok(files)
}

fn determinism() -> Result<String, String> {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_offline(&a)?;
    run_offline(&b)?;
    let (ta, tb) = (tree(&a)?, tree(&b)?);
    for name in ["report.json", "report.csv", "charts/summary.svg"] {
        ensure(ta.contains_key(Path::new(name)), || {
            format!("{name} not written")
        })?;
    }
    ensure(ta.keys().eq(tb.keys()), || "different file sets".into())?;
    for (name, bytes) in &ta {
        ensure(tb[name] == *bytes, || format!("{} differs", name.display()))?;
    }
    within(started.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{} files byte-identical", ta.len()))
}

// 8

fn text_strategy() -> impl Strategy<Value = String> {
    let pieces = prop::sample::select(vec![
        "کتاب", "كتاب", "ي", "ی", "ك", "ۀ", "ة", "أ", "إ", "ؤ", "ء", "\u{200C}", "\u{200D}", "۱۲",
        "١٢", "42", "Ab", "ÉCOLE", "e\u{301}", "ß", " ", "  ", "\t", "\n", "-", ".", "،", "؟", "!",
        "x", "می", "\u{64B}", "\u{670}", "İ", "ﻻ", "ﮎ", "٫", "a b",
    ]);
    prop::collection::vec(
        prop_oneof![3 => pieces.prop_map(str::to_string), 1 => any::<char>().prop_map(|c| c.to_string())],
        0..24,
    )
    .prop_map(|v| v.concat())
}

fn text_properties() -> Result<String, String> {
    const CASES: u32 = 10_000;
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&text_strategy(), |raw| {
            let first = normalize_text(&raw);
            let again = normalize_text(&first.tokens.join(" "));
            prop_assert_eq!(&again.tokens, &first.tokens);
            for t in &first.tokens {
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
            Ok(())
        })
        .map_err(|e| format!("idempotence: {e}"))?;

    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(
            &(
                text_strategy(),
                any::<prop::sample::Index>(),
                any::<prop::sample::Index>(),
                text_strategy(),
            ),
            |(raw, i, j, extra)| {
                let part = normalize_text(&raw);
                let mut pool = part.tokens.clone();
                pool.extend(normalize_text(&extra).tokens);
                if pool.is_empty() {
                    return Ok(());
                }
                let (a, b) = (i.get(&pool).clone(), j.get(&pool).clone());
                let both = count_occurrences(&part, &format!("{a} {b}")).unwrap();
                let ca = count_occurrences(&part, &a).unwrap();
                let cb = count_occurrences(&part, &b).unwrap();
                prop_assert!(both <= ca.min(cb), "{a:?} {b:?}: {both} > min({ca}, {cb})");
                Ok(())
            },
        )
        .map_err(|e| format!("bigram inequality: {e}"))?;
    Ok(format!("{CASES} inputs per property, no violations"))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("network score matches brute-force oracle", network_oracle),
        ("scoring hand cases", hand_cases),
        ("planted coefficient recovery", lambda_recovery),
        ("metric exactness", metric_table),
        ("sample size", sample_size),
        ("component localization", localization),
        ("end-to-end determinism", determinism),
        ("normalization and counting properties", text_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
