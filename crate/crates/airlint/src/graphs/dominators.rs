//! Dominator trees by the iterative reverse-post-order algorithm. Works for
//! any directed graph given as an adjacency list; unreachable nodes carry no
//! immediate dominator and dominate nothing.

#[derive(Debug, Clone)]
pub struct DomTree {
    pub entry: usize,
    /// Immediate dominator per node; `idom[entry] == entry`, unreachable
    /// nodes are `None`.
    pub idom: Vec<Option<usize>>,
}

impl DomTree {
    pub fn is_reachable(&self, n: usize) -> bool {
        self.idom[n].is_some()
    }

    /// Reflexive dominance: does `d` lie on every entry path to `n`?
    pub fn dominates(&self, d: usize, n: usize) -> bool {
        if self.idom[n].is_none() || self.idom[d].is_none() {
            return false;
        }
        let mut cur = n;
        loop {
            if cur == d {
                return true;
            }
            let up = self.idom[cur].expect("reachable chain");
            if up == cur {
                return false;
            }
            cur = up;
        }
    }

    /// Strict dominators of `n`, nearest first.
    pub fn strict_dominators(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if self.idom[n].is_none() {
            return out;
        }
        let mut cur = n;
        while let Some(up) = self.idom[cur] {
            if up == cur {
                break;
            }
            out.push(up);
            cur = up;
        }
        out
    }

    /// Full dominator set of `n` (reflexive), as a sorted vec.
    pub fn dominators(&self, n: usize) -> Vec<usize> {
        if self.idom[n].is_none() {
            return Vec::new();
        }
        let mut out = self.strict_dominators(n);
        out.push(n);
        out.sort_unstable();
        out
    }
}

/// Compute immediate dominators over `succs` from `entry`.
pub fn compute_idoms(succs: &[Vec<usize>], entry: usize) -> DomTree {
    let n = succs.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, outs) in succs.iter().enumerate() {
        for &v in outs {
            preds[v].push(u);
        }
    }

    // Reverse post-order from the entry.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![(entry, 0usize)];
    seen[entry] = true;
    while let Some(&mut (node, ref mut next)) = stack.last_mut() {
        if *next < succs[node].len() {
            let child = succs[node][*next];
            *next += 1;
            if !seen[child] {
                seen[child] = true;
                stack.push((child, 0));
            }
        } else {
            order.push(node);
            stack.pop();
        }
    }
    order.reverse();

    let mut rpo_num = vec![usize::MAX; n];
    for (i, &node) in order.iter().enumerate() {
        rpo_num[node] = i;
    }

    let mut idom: Vec<Option<usize>> = vec![None; n];
    idom[entry] = Some(entry);
    let intersect = |idom: &[Option<usize>], mut a: usize, mut b: usize| {
        while a != b {
            while rpo_num[a] > rpo_num[b] {
                a = idom[a].expect("processed node");
            }
            while rpo_num[b] > rpo_num[a] {
                b = idom[b].expect("processed node");
            }
        }
        a
    };

    let mut changed = true;
    while changed {
        changed = false;
        for &node in order.iter().skip(1) {
            let mut new_idom = None;
            for &p in &preds[node] {
                if idom[p].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p,
                    Some(cur) => intersect(&idom, p, cur),
                });
            }
            if new_idom.is_some() && idom[node] != new_idom {
                idom[node] = new_idom;
                changed = true;
            }
        }
    }
    DomTree { entry, idom }
}
