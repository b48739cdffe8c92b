//! Statement-level interprocedural CFG. Every statement is a node; branch
//! outcomes get their own edge nodes so that edge dominance questions reduce
//! to node dominance. Call statements connect to the callee entry with no
//! fall-through — flow returns through the callee's single exit back to the
//! continuation — and dangerous/check/request/explain statements are leaves.

use super::dominators::{compute_idoms, DomTree};
use super::CallGraph;
use crate::air::{AppModel, SiteId, Statement, Terminator};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IcfgNode {
    /// Virtual root feeding every entry method.
    Root,
    Stmt(SiteId),
    Term { method: String, block: String },
    BranchTrue { method: String, block: String },
    BranchFalse { method: String, block: String },
}

#[derive(Debug, Clone)]
pub struct Icfg {
    pub nodes: Vec<IcfgNode>,
    pub succs: Vec<Vec<usize>>,
    pub preds: Vec<Vec<usize>>,
    pub doms: DomTree,
    site_index: BTreeMap<SiteId, usize>,
    true_edge: BTreeMap<(String, String), usize>,
    false_edge: BTreeMap<(String, String), usize>,
    method_entry: BTreeMap<String, usize>,
    method_exit: BTreeMap<String, usize>,
}

pub const ROOT: usize = 0;

impl Icfg {
    pub fn build(app: &AppModel, cg: &CallGraph) -> Icfg {
        let mut nodes = vec![IcfgNode::Root];
        let mut site_index = BTreeMap::new();
        let mut true_edge = BTreeMap::new();
        let mut false_edge = BTreeMap::new();
        let mut method_entry = BTreeMap::new();
        let mut method_exit = BTreeMap::new();
        // (method, block) -> chain of statement nodes, then its term node.
        let mut block_chain: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
        let mut term_index: BTreeMap<(String, String), usize> = BTreeMap::new();

        for method in &app.methods {
            for (bi, block) in method.blocks.iter().enumerate() {
                let key = (method.name.clone(), block.name.clone());
                let mut chain = Vec::new();
                for site in method.block_sites(block) {
                    let id = nodes.len();
                    nodes.push(IcfgNode::Stmt(site.site.clone()));
                    site_index.insert(site.site, id);
                    chain.push(id);
                }
                let term = nodes.len();
                nodes.push(IcfgNode::Term {
                    method: method.name.clone(),
                    block: block.name.clone(),
                });
                term_index.insert(key.clone(), term);
                if let Terminator::Branch { .. } = block.term {
                    let t = nodes.len();
                    nodes.push(IcfgNode::BranchTrue {
                        method: method.name.clone(),
                        block: block.name.clone(),
                    });
                    true_edge.insert(key.clone(), t);
                    let f = nodes.len();
                    nodes.push(IcfgNode::BranchFalse {
                        method: method.name.clone(),
                        block: block.name.clone(),
                    });
                    false_edge.insert(key.clone(), f);
                }
                let first = chain.first().copied().unwrap_or(term);
                if bi == 0 {
                    method_entry.insert(method.name.clone(), first);
                }
                if matches!(block.term, Terminator::Return) {
                    method_exit.insert(method.name.clone(), term);
                }
                block_chain.insert(key, chain);
            }
        }

        let block_entry = |method: &str, block: &str| -> usize {
            let key = (method.to_string(), block.to_string());
            block_chain[&key].first().copied().unwrap_or(term_index[&key])
        };

        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        let edge = |from: usize, to: usize, succs: &mut Vec<Vec<usize>>| {
            if !succs[from].contains(&to) {
                succs[from].push(to);
            }
        };

        let mut entry_methods: Vec<&str> = cg.entries.iter().map(|e| e.method.as_str()).collect();
        entry_methods.dedup();
        for m in entry_methods {
            edge(ROOT, method_entry[m], &mut succs);
        }

        for method in &app.methods {
            for block in &method.blocks {
                let key = (method.name.clone(), block.name.clone());
                let chain = &block_chain[&key];
                let term = term_index[&key];
                let sites = method.block_sites(block);
                for (i, &node) in chain.iter().enumerate() {
                    let next = chain.get(i + 1).copied().unwrap_or(term);
                    if let Statement::Call { target, .. } = sites[i].stmt {
                        edge(node, method_entry[target.as_str()], &mut succs);
                        edge(method_exit[target.as_str()], next, &mut succs);
                    } else {
                        edge(node, next, &mut succs);
                    }
                }
                match &block.term {
                    Terminator::Goto(t) => {
                        edge(term, block_entry(&method.name, t), &mut succs);
                    }
                    Terminator::Branch { on_true, on_false, .. } => {
                        let tn = true_edge[&key];
                        let fn_ = false_edge[&key];
                        edge(term, tn, &mut succs);
                        edge(term, fn_, &mut succs);
                        edge(tn, block_entry(&method.name, on_true), &mut succs);
                        edge(fn_, block_entry(&method.name, on_false), &mut succs);
                    }
                    Terminator::Return => {}
                }
            }
        }

        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (u, outs) in succs.iter().enumerate() {
            for &v in outs {
                preds[v].push(u);
            }
        }
        let doms = compute_idoms(&succs, ROOT);
        Icfg {
            nodes,
            succs,
            preds,
            doms,
            site_index,
            true_edge,
            false_edge,
            method_entry,
            method_exit,
        }
    }

    pub fn site_node(&self, site: &SiteId) -> Option<usize> {
        self.site_index.get(site).copied()
    }

    pub fn true_edge_node(&self, method: &str, block: &str) -> Option<usize> {
        self.true_edge.get(&(method.to_string(), block.to_string())).copied()
    }

    pub fn false_edge_node(&self, method: &str, block: &str) -> Option<usize> {
        self.false_edge.get(&(method.to_string(), block.to_string())).copied()
    }

    pub fn entry_of(&self, method: &str) -> Option<usize> {
        self.method_entry.get(method).copied()
    }

    pub fn exit_of(&self, method: &str) -> Option<usize> {
        self.method_exit.get(method).copied()
    }

    /// Method owning a node, for scoping transfer functions; `Root` has none.
    pub fn method_of(&self, node: usize) -> Option<&str> {
        match &self.nodes[node] {
            IcfgNode::Root => None,
            IcfgNode::Stmt(site) => Some(&site.method),
            IcfgNode::Term { method, .. }
            | IcfgNode::BranchTrue { method, .. }
            | IcfgNode::BranchFalse { method, .. } => Some(method),
        }
    }
}
