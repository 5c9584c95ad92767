//! Self-contained SVG rendering: radial shell diagrams and Venn diagrams.
//!
//! Output is SVG 1.1 with no external resources and fully deterministic
//! byte content for identical inputs. Geometry constants are documented in
//! a header comment inside each file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cascade::{NodeStatus, RunResult};
use crate::graph::{ConceptGraph, TagSet};
use crate::viz::{RadialLayout, VizError, CANVAS_MARGIN, NODE_RADIUS, RING_SPACING};

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn status_label(run: &RunResult, id: &str) -> String {
    match run.outcomes.get(id) {
        Some(outcome) => match outcome.status {
            NodeStatus::Success => format!(
                "success (model {})",
                outcome.answering_model_idx.unwrap_or(0)
            ),
            NodeStatus::Fail => "fail".to_string(),
            NodeStatus::FailedAll => "failed_all".to_string(),
            NodeStatus::Skipped => "skipped".to_string(),
        },
        None => "unknown".to_string(),
    }
}

/// Renders the radial shell diagram for a run.
pub fn render_svg(
    layout: &RadialLayout,
    graph: &ConceptGraph,
    run: &RunResult,
) -> Result<String, VizError> {
    for node in graph.nodes() {
        if !layout.positions.contains_key(&node.id) {
            return Err(VizError::MissingOutcome {
                node_id: node.id.to_string(),
            });
        }
    }
    let max_radius = layout.max_radius();
    let size = 2.0 * (max_radius + CANVAS_MARGIN);
    let center = size / 2.0;
    let max_shell = layout.shell_of.values().copied().max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        "<!-- radial shell diagram: ring spacing {RING_SPACING}px, node radius {NODE_RADIUS}px, margin {CANVAS_MARGIN}px -->"
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:.2}" height="{size:.2}" viewBox="0 0 {size:.2} {size:.2}">"#
    );
    let _ = writeln!(
        out,
        r##"  <rect x="0" y="0" width="{size:.2}" height="{size:.2}" fill="#ffffff"/>"##
    );

    // Shell guides.
    for shell in 1..=max_shell {
        let _ = writeln!(
            out,
            r##"  <circle cx="{center:.2}" cy="{center:.2}" r="{:.2}" fill="none" stroke="#e0e0e0" stroke-width="1"/>"##,
            shell as f64 * RING_SPACING
        );
    }

    let point = |id: &str| -> (f64, f64) {
        let (radius, angle) = layout.positions[id];
        (center + radius * angle.cos(), center + radius * angle.sin())
    };

    // Edges first so nodes paint over them.
    for node in graph.nodes() {
        let (x1, y1) = point(node.id.as_str());
        for child in graph.children(node.id.as_str()) {
            let (x2, y2) = point(child.as_str());
            let _ = writeln!(
                out,
                r##"  <line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#9a9a9a" stroke-width="1.5"/>"##
            );
        }
    }

    for node in graph.nodes() {
        let (x, y) = point(node.id.as_str());
        let class = layout.color_of[&node.id];
        let _ = writeln!(
            out,
            r#"  <g class="{}"><title>{}: {}</title>"#,
            class.css_class(),
            escape(node.id.as_str()),
            status_label(run, node.id.as_str()),
        );
        let _ = writeln!(
            out,
            r##"    <circle cx="{x:.2}" cy="{y:.2}" r="{NODE_RADIUS:.2}" fill="{}" stroke="#333333" stroke-width="1"/>"##,
            class.fill()
        );
        let _ = writeln!(
            out,
            r##"    <text x="{x:.2}" y="{:.2}" text-anchor="middle" font-family="Helvetica,sans-serif" font-size="9" fill="#111111">{}</text>"##,
            y + 3.0,
            escape(node.id.as_str())
        );
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

// ---------------------------------------------------------------------------
// Venn diagrams
// ---------------------------------------------------------------------------

const VENN_RADIUS: f64 = 130.0;
const VENN_FILLS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];
const LEGEND_LINE_HEIGHT: f64 = 16.0;
const LEGEND_WRAP: usize = 88;

/// A Venn diagram over 2 or 3 labeled sets: region label anchors show tag
/// counts, and a legend lists the tags of every region.
pub fn render_venn_svg(
    regions: &BTreeMap<String, TagSet>,
    set_labels: &[String],
) -> Result<String, VizError> {
    let count = set_labels.len();
    if !(2..=3).contains(&count) {
        return Err(VizError::UnsupportedSetCount { count });
    }

    // Circle centers and per-region label anchors, fixed per diagram arity.
    struct Geometry {
        width: f64,
        base_height: f64,
        centers: Vec<(f64, f64)>,
        anchors: Vec<(&'static str, f64, f64)>,
    }
    let geometry = if count == 2 {
        Geometry {
            width: 560.0,
            base_height: 400.0,
            centers: vec![(210.0, 200.0), (350.0, 200.0)],
            anchors: vec![
                ("A", 140.0, 205.0),
                ("B", 420.0, 205.0),
                ("AB", 280.0, 205.0),
            ],
        }
    } else {
        Geometry {
            width: 560.0,
            base_height: 500.0,
            centers: vec![(280.0, 180.0), (205.0, 310.0), (355.0, 310.0)],
            anchors: vec![
                ("A", 280.0, 120.0),
                ("B", 135.0, 360.0),
                ("C", 425.0, 360.0),
                ("AB", 210.0, 245.0),
                ("AC", 350.0, 245.0),
                ("BC", 280.0, 370.0),
                ("ABC", 280.0, 265.0),
            ],
        }
    };
    let Geometry {
        width,
        base_height,
        centers,
        anchors,
    } = geometry;

    // Legend lines: set letters first, then one entry per region.
    let mut legend: Vec<String> = Vec::new();
    for (i, label) in set_labels.iter().enumerate() {
        legend.push(format!("{} = {}", char::from(b'A' + i as u8), label));
    }
    for (label, _, _) in &anchors {
        let set = regions.get(*label).cloned().unwrap_or_default();
        let tags = if set.is_empty() {
            "(none)".to_string()
        } else {
            set.iter().collect::<Vec<_>>().join(", ")
        };
        for (i, line) in wrap_text(&format!("{label} ({}): {tags}", set.len()), LEGEND_WRAP)
            .into_iter()
            .enumerate()
        {
            legend.push(if i == 0 { line } else { format!("    {line}") });
        }
    }

    let height = base_height + legend.len() as f64 * LEGEND_LINE_HEIGHT + 20.0;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        "<!-- venn diagram: circle radius {VENN_RADIUS}px, region labels show tag counts -->"
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(
        out,
        r##"  <rect x="0" y="0" width="{width:.2}" height="{height:.2}" fill="#ffffff"/>"##
    );

    for (i, (cx, cy)) in centers.iter().enumerate() {
        let _ = writeln!(
            out,
            r##"  <circle cx="{cx:.2}" cy="{cy:.2}" r="{VENN_RADIUS:.2}" fill="{}" fill-opacity="0.35" stroke="#333333" stroke-width="1.5"/>"##,
            VENN_FILLS[i]
        );
    }
    for (label, x, y) in &anchors {
        let venn_count = regions.get(*label).map(TagSet::len).unwrap_or(0);
        let _ = writeln!(
            out,
            r##"  <text x="{x:.2}" y="{y:.2}" text-anchor="middle" font-family="Helvetica,sans-serif" font-size="16" fill="#111111">{venn_count}</text>"##
        );
    }

    let mut y = base_height;
    for line in &legend {
        let _ = writeln!(
            out,
            r##"  <text x="20.00" y="{y:.2}" font-family="Helvetica,sans-serif" font-size="12" fill="#111111">{}</text>"##,
            escape(line)
        );
        y += LEGEND_LINE_HEIGHT;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn wrap_text(text: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current = String::new();
    for word in text.split(' ') {
        if !current.is_empty() && current.len() + 1 + word.len() > width {
            lines.push(std::mem::take(&mut current));
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(word);
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::venn_regions;
    use crate::backend::{ModelSpec, ScriptedOracle};
    use crate::cascade::{evaluate_graph, CascadeConfig};
    use crate::graph::{ConceptNode, McqTask, TaskSet};
    use crate::viz::radial_layout;

    fn tags(labels: &[&str]) -> TagSet {
        labels.iter().copied().collect()
    }

    #[test]
    fn empty_graph_renders_a_valid_empty_document() {
        let graph = ConceptGraph::empty();
        let tasks = TaskSet::new();
        let cascade = CascadeConfig::new(vec![ModelSpec::scripted("m")], 0);
        let run = evaluate_graph(&graph, &tasks, &cascade, &ScriptedOracle::new(), 0).unwrap();
        let layout = radial_layout(&graph, &run).unwrap();
        let svg = render_svg(&layout, &graph, &run).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<circle cx")); // no shells, no nodes
    }

    #[test]
    fn failed_root_is_red_in_svg() {
        let graph = ConceptGraph::new(vec![
            ConceptNode::new("a", None, "", tags(&["T"])),
            ConceptNode::new("b", Some("a".into()), "", tags(&["T", "U"])),
            ConceptNode::new("c", Some("b".into()), "", tags(&["T", "U", "V"])),
        ])
        .unwrap();
        let tasks = TaskSet::from_tasks(
            ["a", "b", "c"]
                .iter()
                .map(|id| McqTask::new(*id, "q", ["w", "x", "y", "z"], 0))
                .collect(),
        )
        .unwrap();
        let mut oracle = ScriptedOracle::new();
        oracle.set("m", "a", 1); // wrong
        let cascade = CascadeConfig::new(vec![ModelSpec::scripted("m")], 5);
        let run = evaluate_graph(&graph, &tasks, &cascade, &oracle, 0).unwrap();
        let layout = radial_layout(&graph, &run).unwrap();
        let svg = render_svg(&layout, &graph, &run).unwrap();
        assert!(svg.contains(crate::viz::FAILED_ALL_FILL));
        assert!(svg.contains("class=\"failed-all\""));
        // Every node appears exactly once.
        for id in ["a", "b", "c"] {
            assert_eq!(svg.matches(&format!("<title>{id}:")).count(), 1);
        }
        // Deterministic bytes.
        assert_eq!(svg, render_svg(&layout, &graph, &run).unwrap());
    }

    #[test]
    fn venn_labels_match_region_cardinalities() {
        let a = tags(&["x", "y", "z"]);
        let b = tags(&["y", "z", "w"]);
        let c = tags(&["z", "q"]);
        let regions = venn_regions(&[a, b, c]).unwrap();
        let by_label: BTreeMap<String, TagSet> = regions
            .iter()
            .map(|(sig, set)| (sig.label(), set.clone()))
            .collect();
        let svg = render_venn_svg(
            &by_label,
            &["ma".to_string(), "mb".to_string(), "mc".to_string()],
        )
        .unwrap();
        for (label, set) in &by_label {
            assert!(
                svg.contains(&format!("{label} ({}):", set.len())),
                "legend missing {label}"
            );
        }
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn identical_sets_show_zero_exclusive_regions() {
        let a = tags(&["x", "y"]);
        let regions = venn_regions(&[a.clone(), a]).unwrap();
        let by_label: BTreeMap<String, TagSet> = regions
            .iter()
            .map(|(sig, set)| (sig.label(), set.clone()))
            .collect();
        let svg = render_venn_svg(&by_label, &["p".to_string(), "q".to_string()]).unwrap();
        assert!(svg.contains("A (0): (none)"));
        assert!(svg.contains("B (0): (none)"));
        assert!(svg.contains("AB (2):"));
    }

    #[test]
    fn venn_rejects_wrong_arity() {
        let by_label = BTreeMap::new();
        assert!(render_venn_svg(&by_label, &["only".to_string()]).is_err());
    }
}
