//! Graphviz rendering of the three program graphs, one digraph per graph in
//! a single text stream. Debug aid behind the `--dot` flag.

use super::{CallGraph, Icfg, IccGraph};
use crate::graphs::IcfgNode;
use std::fmt::Write;

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn render_dot(cg: &CallGraph, icfg: &Icfg, icc: &IccGraph) -> String {
    let mut out = String::new();

    let _ = writeln!(out, "digraph cg {{");
    for entry in &cg.entries {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [style=dashed, label=\"{}\"];",
            esc(&entry.component),
            esc(&entry.method),
            entry.kind
        );
    }
    for edge in &cg.edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            esc(&edge.caller),
            esc(&edge.callee),
            esc(&edge.site.to_string())
        );
    }
    let _ = writeln!(out, "}}");

    let _ = writeln!(out, "digraph icfg {{");
    for (i, node) in icfg.nodes.iter().enumerate() {
        let label = match node {
            IcfgNode::Root => "root".to_string(),
            IcfgNode::Stmt(site) => site.to_string(),
            IcfgNode::Term { method, block } => format!("{method}:{block}:term"),
            IcfgNode::BranchTrue { method, block } => format!("{method}:{block}:T"),
            IcfgNode::BranchFalse { method, block } => format!("{method}:{block}:F"),
        };
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", esc(&label));
    }
    for (u, outs) in icfg.succs.iter().enumerate() {
        for v in outs {
            let _ = writeln!(out, "  n{u} -> n{v};");
        }
    }
    let _ = writeln!(out, "}}");

    let _ = writeln!(out, "digraph icc {{");
    for edge in &icc.edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            esc(&edge.source),
            esc(&edge.target),
            esc(&edge.site.to_string())
        );
    }
    let _ = writeln!(out, "}}");
    out
}
