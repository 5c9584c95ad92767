//! DOT export with pinned radial positions.
//!
//! Positions are emitted in inches with the `!` pin suffix, so
//! `neato -n -Tsvg` (or any pos-respecting renderer) reproduces the radial
//! arrangement exactly. Node fill encodes the outcome class.

use std::fmt::Write as _;

use crate::graph::ConceptGraph;
use crate::viz::{RadialLayout, RING_SPACING};

const DOT_INCHES_PER_SHELL: f64 = 1.6;

/// Renders the layout as a deterministic DOT document.
pub fn render_dot(layout: &RadialLayout, graph: &ConceptGraph) -> String {
    let scale = DOT_INCHES_PER_SHELL / RING_SPACING;
    let mut out = String::new();
    out.push_str("digraph prerequisite_graph {\n");
    let _ = writeln!(
        out,
        "  // radial layout: {DOT_INCHES_PER_SHELL} in per shell, positions pinned (use neato -n)"
    );
    out.push_str("  graph [outputorder=\"edgesfirst\"];\n");
    out.push_str(
        "  node [shape=\"circle\", style=\"filled\", fixedsize=\"true\", width=\"0.55\", fontsize=\"10\"];\n",
    );

    for node in graph.nodes() {
        let (radius, angle) = layout.positions[&node.id];
        let x = radius * scale * angle.cos();
        let y = radius * scale * angle.sin();
        let class = layout.color_of[&node.id];
        let _ = writeln!(
            out,
            "  \"{}\" [pos=\"{:.4},{:.4}!\", fillcolor=\"{}\", class=\"{}\", tooltip=\"{}\"];",
            node.id,
            x,
            y,
            class.fill(),
            class.css_class(),
            escape(&node.description),
        );
    }
    for node in graph.nodes() {
        for child in graph.children(node.id.as_str()) {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", node.id, child);
        }
    }
    out.push_str("}\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}
