//! Text serializations of trees and dendrograms: DOT, GraphML and Newick.
//! Every writer is byte-deterministic for a given input.

use std::fmt::Write;

use crate::mst::SpanningTree;
use crate::ultrametric::Dendrogram;

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Undirected DOT graph: nodes sorted by label, edges in acceptance order,
/// weights as 4-decimal edge labels.
pub fn export_dot(t: &SpanningTree) -> String {
    let mut out = String::from("graph mst {\n");
    let mut nodes: Vec<&String> = t.labels().iter().collect();
    nodes.sort();
    for n in nodes {
        let _ = writeln!(out, "  {};", dot_quote(n));
    }
    for e in t.edges() {
        let (a, b) = t.edge_labels(e);
        let _ = writeln!(
            out,
            "  {} -- {} [label=\"{:.4}\"];",
            dot_quote(a),
            dot_quote(b),
            e.weight
        );
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// GraphML document with a double-typed `weight` and an int `order` per edge.
pub fn export_graphml(t: &SpanningTree) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str(
        "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n",
    );
    out.push_str("  <key id=\"order\" for=\"edge\" attr.name=\"order\" attr.type=\"int\"/>\n");
    out.push_str("  <graph id=\"mst\" edgedefault=\"undirected\">\n");
    let mut nodes: Vec<&String> = t.labels().iter().collect();
    nodes.sort();
    for n in nodes {
        let _ = writeln!(out, "    <node id=\"{}\"/>", xml_escape(n));
    }
    for (k, e) in t.edges().iter().enumerate() {
        let (a, b) = t.edge_labels(e);
        let _ = writeln!(
            out,
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\">",
            xml_escape(a),
            xml_escape(b)
        );
        let _ = writeln!(out, "      <data key=\"weight\">{}</data>", e.weight);
        let _ = writeln!(out, "      <data key=\"order\">{}</data>", e.order);
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn newick_label(s: &str) -> String {
    let plain = !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || "()[]':;,".contains(c));
    if plain {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', "''"))
    }
}

/// Newick string of the dendrogram. A node merged at height `h` sits at depth
/// `h / 2`, so the leaf-to-leaf path length equals the merge height. Children
/// are written left then right, giving the dendrogram's leaf order.
pub fn export_newick(dg: &Dendrogram) -> String {
    fn node(dg: &Dendrogram, c: usize, parent_h: f64, out: &mut String) {
        let n = dg.leaves().len();
        let h = if c < n {
            out.push_str(&newick_label(&dg.leaves()[c]));
            0.0
        } else {
            let m = dg.merges()[c - n];
            out.push('(');
            node(dg, m.left, m.height, out);
            out.push(',');
            node(dg, m.right, m.height, out);
            out.push(')');
            m.height
        };
        let _ = write!(out, ":{:?}", (parent_h - h) / 2.0);
    }
    let mut out = String::new();
    let root = dg.root();
    let root_h = dg.merges()[root - dg.leaves().len()].height;
    node(dg, root, root_h, &mut out);
    out.push(';');
    out
}
