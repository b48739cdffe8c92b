//! Program graphs over an app model: call graph with callback entries,
//! per-method CFGs with dominator trees, a statement-level interprocedural
//! CFG, the inter-component launch graph, and the callback precedence order.

pub mod dominators;
mod dot;
mod icfg;

pub use dominators::{compute_idoms, DomTree};
pub use dot::render_dot;
pub use icfg::{Icfg, IcfgNode};

use crate::air::{
    AppModel, CallbackKind, Component, Method, SiteId, Statement, Terminator,
};
use std::collections::{BTreeSet, VecDeque};

/// An analysis entry point: a callback binding on a component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Entry {
    pub component: String,
    pub kind: CallbackKind,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CgEdge {
    pub caller: String,
    pub site: SiteId,
    pub callee: String,
}

#[derive(Debug, Clone)]
pub struct CallGraph {
    pub edges: Vec<CgEdge>,
    pub entries: Vec<Entry>,
}

pub fn build_call_graph(app: &AppModel) -> CallGraph {
    let mut edges = Vec::new();
    for method in &app.methods {
        for site in method.sites() {
            if let Statement::Call { target, .. } = site.stmt {
                edges.push(CgEdge {
                    caller: method.name.clone(),
                    site: site.site,
                    callee: target.clone(),
                });
            }
        }
    }
    let mut entries = Vec::new();
    for comp in &app.components {
        for (kind, method) in &comp.callbacks {
            entries.push(Entry {
                component: comp.name.clone(),
                kind: *kind,
                method: method.clone(),
            });
        }
    }
    entries.sort();
    CallGraph { edges, entries }
}

impl CallGraph {
    pub fn callees<'a>(&'a self, caller: &'a str) -> impl Iterator<Item = &'a CgEdge> + 'a {
        self.edges.iter().filter(move |e| e.caller == caller)
    }

    /// Methods reachable from `from` by call edges, `from` included.
    pub fn reachable_methods(&self, from: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([from.to_string()]);
        let mut queue = VecDeque::from([from.to_string()]);
        while let Some(cur) = queue.pop_front() {
            for edge in self.callees(&cur) {
                if seen.insert(edge.callee.clone()) {
                    queue.push_back(edge.callee.clone());
                }
            }
        }
        seen
    }

    /// Methods reachable from any callback of `component`.
    pub fn component_region(&self, component: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for entry in self.entries.iter().filter(|e| e.component == component) {
            out.extend(self.reachable_methods(&entry.method));
        }
        out
    }
}

/// Block-level control-flow graph of one method, with its dominator tree.
#[derive(Debug, Clone)]
pub struct MethodCfg {
    pub succs: Vec<Vec<usize>>,
    pub doms: DomTree,
}

pub fn block_successors(method: &Method) -> Vec<Vec<usize>> {
    method
        .blocks
        .iter()
        .map(|b| match &b.term {
            Terminator::Goto(t) => vec![method.block_index(t).expect("validated target")],
            Terminator::Branch { on_true, on_false, .. } => {
                let t = method.block_index(on_true).expect("validated target");
                let f = method.block_index(on_false).expect("validated target");
                if t == f {
                    vec![t]
                } else {
                    vec![t, f]
                }
            }
            Terminator::Return => vec![],
        })
        .collect()
}

/// Dominator analysis over the method's basic blocks; block 0 is the entry.
pub fn dominators(method: &Method) -> MethodCfg {
    let succs = block_successors(method);
    let doms = compute_idoms(&succs, 0);
    MethodCfg { succs, doms }
}

/// One component launching another, at a specific statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IccEdge {
    pub source: String,
    pub site: SiteId,
    pub target: String,
}

#[derive(Debug, Clone)]
pub struct IccGraph {
    pub edges: Vec<IccEdge>,
}

/// One edge per launch statement per component whose call-graph region
/// contains the launch site's method.
pub fn build_icc(app: &AppModel, cg: &CallGraph) -> IccGraph {
    let components: Vec<&Component> = app.components.iter().collect();
    let regions: Vec<BTreeSet<String>> =
        components.iter().map(|c| cg.component_region(&c.name)).collect();
    let mut edges = Vec::new();
    for method in &app.methods {
        for site in method.sites() {
            let Statement::Launch { component: target } = site.stmt else { continue };
            for (comp, region) in components.iter().zip(&regions) {
                if region.contains(&method.name) {
                    edges.push(IccEdge {
                        source: comp.name.clone(),
                        site: site.site.clone(),
                        target: target.clone(),
                    });
                }
            }
        }
    }
    IccGraph { edges }
}

impl IccGraph {
    /// Whether two components are linked by a launch in either direction.
    pub fn connected(&self, a: &str, b: &str) -> bool {
        self.edges.iter().any(|e| {
            (e.source == a && e.target == b) || (e.source == b && e.target == a)
        })
    }

    pub fn launches_from<'a>(&'a self, source: &'a str) -> impl Iterator<Item = &'a IccEdge> + 'a {
        self.edges.iter().filter(move |e| e.source == source)
    }
}

/// Transitive closure of the configured happens-before edges between
/// callback kinds. Must be a strict partial order.
#[derive(Debug, Clone)]
pub struct PrecedenceTable {
    before: BTreeSet<(CallbackKind, CallbackKind)>,
}

impl PrecedenceTable {
    pub fn from_edges(
        edges: &[(CallbackKind, CallbackKind)],
    ) -> Result<PrecedenceTable, String> {
        let mut before: BTreeSet<(CallbackKind, CallbackKind)> = edges.iter().copied().collect();
        // Closure by repeated joining; nine kinds keep this tiny.
        loop {
            let mut added = Vec::new();
            for &(a, b) in &before {
                for &(c, d) in &before {
                    if b == c && !before.contains(&(a, d)) {
                        added.push((a, d));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            before.extend(added);
        }
        for &(a, b) in &before {
            if a == b {
                return Err(format!("precedence edges form a cycle through {a}"));
            }
        }
        Ok(PrecedenceTable { before })
    }

    pub fn default_table() -> PrecedenceTable {
        PrecedenceTable::from_edges(&crate::config::default_precedence_edges())
            .expect("default edges are acyclic")
    }

    /// True iff `a` must complete before `b` can first run.
    pub fn precedes(&self, a: CallbackKind, b: CallbackKind) -> bool {
        self.before.contains(&(a, b))
    }
}

/// Happens-before between callback kinds under the default table.
pub fn callback_precedes(a: CallbackKind, b: CallbackKind) -> bool {
    PrecedenceTable::default_table().precedes(a, b)
}
