//! Grouped bar charts: one file per component with a panel per domain group
//! and a final sum-up panel, plus a summary over components.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serpgauge_core::metrics::DomainScore;
use serpgauge_core::taxonomy::{Component, DomainTaxonomy};

use super::RunReport;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];
const BAR: f64 = 16.0;
const BAR_GAP: f64 = 2.0;
const GROUP_GAP: f64 = 24.0;
const PLOT_H: f64 = 160.0;
const PANEL_H: f64 = 250.0;
const LEFT: f64 = 48.0;
const TOP: f64 = 56.0;
const LEGEND_W: f64 = 130.0;

/// One panel: labelled categories, each with an optional value per engine.
struct Panel {
    title: String,
    categories: Vec<(String, Vec<Option<f64>>)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn category_width(engines: usize) -> f64 {
    engines.max(1) as f64 * (BAR + BAR_GAP) + GROUP_GAP
}

fn panel_width(panel: &Panel, engines: usize) -> f64 {
    LEFT + panel.categories.len().max(1) as f64 * category_width(engines) + 16.0
}

fn render_panel(out: &mut String, panel: &Panel, engines: usize, y0: f64) {
    let base = 28.0 + PLOT_H;
    let width = panel_width(panel, engines);
    let _ = writeln!(out, r#"<g class="panel" transform="translate(0,{y0:.1})">"#);
    let _ = writeln!(
        out,
        r#"<text x="{LEFT:.1}" y="16" font-size="13" font-weight="bold">{}</text>"#,
        escape(&panel.title)
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = 28.0 + PLOT_H * (1.0 - tick);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/><text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">{tick:.2}</text>"##,
            width - 8.0,
            LEFT - 4.0,
            y + 3.0
        );
    }
    for (i, (label, values)) in panel.categories.iter().enumerate() {
        let x0 = LEFT + GROUP_GAP / 2.0 + i as f64 * category_width(engines);
        for (e, value) in values.iter().enumerate() {
            let Some(v) = value else { continue };
            let h = PLOT_H * v.clamp(0.0, 1.0);
            let x = x0 + e as f64 * (BAR + BAR_GAP);
            let _ = writeln!(
                out,
                r#"<rect x="{x:.1}" y="{:.1}" width="{BAR:.1}" height="{h:.1}" fill="{}"/><text x="{:.1}" y="{:.1}" font-size="8" text-anchor="middle">{v:.2}</text>"#,
                base - h,
                PALETTE[e % PALETTE.len()],
                x + BAR / 2.0,
                base - h - 3.0
            );
        }
        let cx = x0 + values.len() as f64 * (BAR + BAR_GAP) / 2.0;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{:.1}" font-size="9" text-anchor="middle">{}</text>"#,
            base + 14.0,
            escape(label)
        );
    }
    let _ = writeln!(out, "</g>");
}

fn render(title: &str, engines: &[String], panels: &[Panel]) -> String {
    let width = panels
        .iter()
        .map(|p| panel_width(p, engines.len()))
        .fold(16.0 + engines.len() as f64 * LEGEND_W, f64::max)
        .max(320.0);
    let height = TOP + panels.len() as f64 * PANEL_H;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="8" y="20" font-size="15" font-weight="bold">{}</text>"#,
        escape(title)
    );
    for (e, engine) in engines.iter().enumerate() {
        let x = 8.0 + e as f64 * LEGEND_W;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="32" width="10" height="10" fill="{}"/><text x="{:.1}" y="41" font-size="10">{}</text>"#,
            PALETTE[e % PALETTE.len()],
            x + 14.0,
            escape(engine)
        );
    }
    for (i, panel) in panels.iter().enumerate() {
        let y0 = TOP + i as f64 * PANEL_H;
        render_panel(&mut out, panel, engines.len(), y0);
    }
    out.push_str("</svg>\n");
    out
}

fn headlines(report: &RunReport) -> BTreeMap<(&str, &str), f64> {
    report
        .domain_scores
        .iter()
        .map(|d: &DomainScore| ((d.engine_id.as_str(), d.domain_path.as_str()), d.headline()))
        .collect()
}

fn component_scores(report: &RunReport) -> BTreeMap<(Component, &str), f64> {
    report
        .components
        .iter()
        .map(|c| ((c.component, c.engine_id.as_str()), c.score))
        .collect()
}

/// One chart per component that has scores, keyed by component id.
pub fn component_charts(report: &RunReport) -> Vec<(Component, String)> {
    let taxonomy = DomainTaxonomy::builtin();
    let scores = headlines(report);
    let rollups = component_scores(report);
    let mut charts = Vec::new();
    for component in Component::ALL {
        let mut panels = Vec::new();
        for group in taxonomy.groups(component) {
            let categories: Vec<(String, Vec<Option<f64>>)> = taxonomy
                .leaves_in(component)
                .filter(|l| l.group == group.path)
                .filter_map(|leaf| {
                    let values: Vec<Option<f64>> = report
                        .engines
                        .iter()
                        .map(|e| scores.get(&(e.as_str(), leaf.path)).copied())
                        .collect();
                    values
                        .iter()
                        .any(Option::is_some)
                        .then(|| (leaf.label.to_string(), values))
                })
                .collect();
            if !categories.is_empty() {
                panels.push(Panel {
                    title: group.label.to_string(),
                    categories,
                });
            }
        }
        if panels.is_empty() {
            continue;
        }
        let sum_up: Vec<Option<f64>> = report
            .engines
            .iter()
            .map(|e| rollups.get(&(component, e.as_str())).copied())
            .collect();
        panels.push(Panel {
            title: "Sum up".to_string(),
            categories: vec![(component.label().to_string(), sum_up)],
        });
        charts.push((
            component,
            render(component.label(), &report.engines, &panels),
        ));
    }
    charts
}

/// Component scores of every engine side by side.
pub fn summary_chart(report: &RunReport) -> String {
    let rollups = component_scores(report);
    let categories = Component::ALL
        .into_iter()
        .filter_map(|c| {
            let values: Vec<Option<f64>> = report
                .engines
                .iter()
                .map(|e| rollups.get(&(c, e.as_str())).copied())
                .collect();
            values
                .iter()
                .any(Option::is_some)
                .then(|| (c.label().to_string(), values))
        })
        .collect();
    render(
        "Summary",
        &report.engines,
        &[Panel {
            title: "Component scores".to_string(),
            categories,
        }],
    )
}

/// Every chart as (file name, contents), in a fixed order.
pub fn emit_charts(report: &RunReport) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = component_charts(report)
        .into_iter()
        .map(|(c, svg)| (format!("{}.svg", c.as_str()), svg))
        .collect();
    files.push(("summary.svg".to_string(), summary_chart(report)));
    files
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Timing;
    use serpgauge_core::metrics::ComponentRollup;

    fn report(engines: &[&str]) -> RunReport {
        let leaves = [
            "normalizer/numbers/cardinal",
            "normalizer/multi_form/hamzeh",
            "normalizer/homophones/all_live",
        ];
        let mut domain_scores = Vec::new();
        let mut components = Vec::new();
        for (i, e) in engines.iter().enumerate() {
            for leaf in leaves {
                domain_scores.push(DomainScore {
                    domain_path: leaf.to_string(),
                    engine_id: e.to_string(),
                    n_queries: 1,
                    accuracy: 1.0,
                    mrr: 1.0,
                    signed_mrr: 1.0,
                    pass_rate: Some(0.2 * i as f64),
                });
            }
            components.push(ComponentRollup {
                component: Component::Normalizer,
                engine_id: e.to_string(),
                n_leaves: 3,
                score: 0.2 * i as f64,
            });
        }
        RunReport {
            run_id: "r".to_string(),
            queryset_hash: "h".to_string(),
            engines: engines.iter().map(|e| e.to_string()).collect(),
            k: 10,
            domain_scores,
            components,
            warnings: Vec::new(),
            timing: Timing::default(),
        }
    }

    #[test]
    fn three_groups_plus_sum_up() {
        let charts = component_charts(&report(&["g", "b", "y", "p"]));
        assert_eq!(charts.len(), 1);
        let (component, svg) = &charts[0];
        assert_eq!(*component, Component::Normalizer);
        assert_eq!(svg.matches(r#"class="panel""#).count(), 4);
        assert_eq!(svg.matches("<rect x=").count(), 4 * 3 + 4 + 4);
        assert!(svg.contains(">0.60</text>"));
    }

    #[test]
    fn single_engine_renders() {
        let files = emit_charts(&report(&["only"]));
        assert_eq!(files.len(), 2);
        assert!(files.iter().all(|(_, svg)| svg.ends_with("</svg>\n")));
        assert_eq!(files, emit_charts(&report(&["only"])));
    }
}
