//! Graphviz DOT rendering.
//!
//! Enhanced activities render as HTML-like tables: a header row with the
//! activity name and its frequency, then one `attribute | function | value`
//! row per aggregation. Activities without aggregations render as plain
//! rounded boxes. Output is deterministic: nodes are sorted by name and
//! aggregation rows keep their insertion order.

use std::fmt::Write;

use crate::discovery::Node;
use crate::enhancement::DataEnhancedProcessModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankDirection {
    #[default]
    TopBottom,
    LeftRight,
}

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    pub rank_direction: RankDirection,
    /// Append the number of aggregated values to every value cell.
    pub show_support: bool,
}

const ABSENT_COLOR: &str = "gray60";

pub fn to_dot(dep: &DataEnhancedProcessModel, options: &RenderOptions) -> String {
    let mut out = String::new();
    let rankdir = match options.rank_direction {
        RankDirection::TopBottom => "TB",
        RankDirection::LeftRight => "LR",
    };
    out.push_str("digraph dep {\n");
    let _ = writeln!(
        out,
        "  graph [rankdir={rankdir}, labelloc=t, fontname=\"Helvetica\", label={}];",
        quoted(&dep.provenance.to_string())
    );
    out.push_str("  node [fontname=\"Helvetica\", fontsize=10];\n");
    out.push_str("  edge [fontname=\"Helvetica\", fontsize=9];\n");
    out.push_str(
        "  start [shape=circle, label=\"\", style=filled, fillcolor=\"#66bb6a\", width=0.3];\n",
    );
    out.push_str(
        "  end [shape=doublecircle, label=\"\", style=filled, fillcolor=\"#ef5350\", width=0.3];\n",
    );

    let names: Vec<&String> = dep.model.activities.keys().collect();
    let id = |node: &Node| match node {
        Node::Start => "start".to_owned(),
        Node::End => "end".to_owned(),
        Node::Activity(name) => match names.binary_search(&name) {
            Ok(i) => format!("a{i}"),
            Err(_) => format!("x{}", quoted(name)),
        },
    };

    for (i, (name, node)) in dep.model.activities.iter().enumerate() {
        let absent = dep.is_absent(name);
        let aggregations = dep.enhancements.get(name).map_or(&[][..], Vec::as_slice);
        if aggregations.is_empty() {
            let mut attrs = format!(
                "shape=box, style=rounded, label={}",
                quoted(&format!("{name}\n{}", node.absolute_frequency))
            );
            if absent {
                let _ = write!(attrs, ", color={ABSENT_COLOR}, fontcolor={ABSENT_COLOR}");
            }
            let _ = writeln!(out, "  a{i} [{attrs}];");
            continue;
        }

        let color = if absent { ABSENT_COLOR } else { "black" };
        let mut table = format!(
            "<TABLE BORDER=\"1\" CELLBORDER=\"1\" CELLSPACING=\"0\" CELLPADDING=\"4\" COLOR=\"{color}\">"
        );
        let _ = write!(
            table,
            "<TR><TD COLSPAN=\"3\" BGCOLOR=\"#e3f2fd\"><FONT COLOR=\"{color}\"><B>{}</B> ({})</FONT></TD></TR>",
            html(name),
            node.absolute_frequency
        );
        for aggregation in aggregations {
            let mut value = aggregation.result.display().to_owned();
            if options.show_support {
                let support = aggregation.result.value().map_or(0, |v| v.support);
                let _ = write!(value, " (n={support})");
            }
            let _ = write!(
                table,
                "<TR><TD ALIGN=\"LEFT\"><FONT COLOR=\"{color}\">{}</FONT></TD><TD><FONT COLOR=\"{color}\">{}</FONT></TD><TD ALIGN=\"RIGHT\"><FONT COLOR=\"{color}\">{}</FONT></TD></TR>",
                html(&aggregation.attribute),
                html(&aggregation.function.to_string()),
                html(&value)
            );
        }
        table.push_str("</TABLE>");
        let _ = writeln!(out, "  a{i} [shape=plaintext, margin=0, label=<{table}>];");
    }

    for edge in &dep.model.edges {
        let style = if edge.repaired { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"{style}];",
            id(&edge.source),
            id(&edge.target),
            edge.count
        );
    }
    out.push_str("}\n");
    out
}

/// DOT double-quoted string; newlines become centred line breaks.
fn quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' | '\r' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}
