use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{LineGraphMap, SimpleGraph};
use crate::{Error, Result};

/// Rooted tree of bags. Node `i` has bag `bags[i]` and parent `parent[i]`;
/// exactly one node (the root) has no parent when the tree is nonempty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<usize>>,
    pub parent: Vec<Option<usize>>,
}

impl TreeDecomposition {
    /// Largest bag size minus one; 0 for an empty decomposition.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    fn tree_adjacency(&self) -> Result<Vec<BTreeSet<usize>>> {
        let n = self.bags.len();
        if self.parent.len() != n {
            return Err(Error::InvalidDecomposition("parent list length differs from bag count".into()));
        }
        let mut adj = vec![BTreeSet::new(); n];
        let mut roots = 0;
        for (i, p) in self.parent.iter().enumerate() {
            match *p {
                None => roots += 1,
                Some(p) if p >= n || p == i => {
                    return Err(Error::InvalidDecomposition(format!("bad parent of node {i}")))
                }
                Some(p) => {
                    adj[i].insert(p);
                    adj[p].insert(i);
                }
            }
        }
        if n > 0 && roots != 1 {
            return Err(Error::InvalidDecomposition(format!("{roots} roots")));
        }
        // n - 1 parent links and one root: a tree iff everything is reachable
        if n > 0 {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidDecomposition("tree is disconnected or cyclic".into()));
            }
        }
        Ok(adj)
    }

    /// Checks vertex cover, edge cover and the running-intersection property.
    pub fn validate(&self, g: &SimpleGraph) -> Result<()> {
        let adj = self.tree_adjacency()?;
        let mut holders: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if !g.contains(v) {
                    return Err(Error::InvalidDecomposition(format!("bag {i} holds unknown vertex {v}")));
                }
                holders.entry(v).or_default().push(i);
            }
        }
        for v in g.vertices() {
            let Some(h) = holders.get(&v) else {
                return Err(Error::InvalidDecomposition(format!("vertex {v} in no bag")));
            };
            // the bags holding v must induce a connected subtree
            let inside: BTreeSet<usize> = h.iter().copied().collect();
            let mut seen = BTreeSet::from([h[0]]);
            let mut stack = vec![h[0]];
            while let Some(t) = stack.pop() {
                for &s in &adj[t] {
                    if inside.contains(&s) && seen.insert(s) {
                        stack.push(s);
                    }
                }
            }
            if seen.len() != inside.len() {
                return Err(Error::InvalidDecomposition(format!("bags of vertex {v} are not connected")));
            }
        }
        for (a, b) in g.edges() {
            if !self.bags.iter().any(|bag| bag.contains(&a) && bag.contains(&b)) {
                return Err(Error::InvalidDecomposition(format!("edge {a}-{b} uncovered")));
            }
        }
        Ok(())
    }
}

fn fill_in(adj: &BTreeMap<usize, BTreeSet<usize>>, v: usize) -> usize {
    let n: Vec<usize> = adj[&v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in n.iter().enumerate() {
        let na = &adj[&a];
        missing += n[i + 1..].iter().filter(|b| !na.contains(b)).count();
    }
    missing
}

/// Greedy min-fill elimination order, ties to the lowest vertex id.
pub fn min_fill_order(g: &SimpleGraph) -> Vec<usize> {
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = g.vertices().map(|v| (v, g.neighbors(v).clone())).collect();
    let mut fill: BTreeMap<usize, usize> = adj.keys().map(|&v| (v, fill_in(&adj, v))).collect();
    let mut queue: BTreeSet<(usize, usize)> = fill.iter().map(|(&v, &f)| (f, v)).collect();
    let mut order = Vec::with_capacity(adj.len());
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nb = adj.remove(&v).unwrap();
        fill.remove(&v);
        for &a in &nb {
            adj.get_mut(&a).unwrap().remove(&v);
        }
        for &a in &nb {
            for &b in &nb {
                if a != b {
                    adj.get_mut(&a).unwrap().insert(b);
                }
            }
        }
        let mut touched: BTreeSet<usize> = nb.clone();
        for &a in &nb {
            touched.extend(adj[&a].iter().copied());
        }
        for w in touched {
            let f = fill_in(&adj, w);
            let old = fill.insert(w, f).unwrap();
            if old != f {
                queue.remove(&(old, w));
                queue.insert((f, w));
            }
        }
    }
    order
}

/// Decomposition induced by an elimination order: node `i` carries the bag
/// `{order[i]} ∪ (later neighbours at elimination time)` and hangs below the
/// node of the earliest-eliminated vertex of that set. Roots of separate
/// components are chained so the result is one tree.
pub fn tree_decomposition_from_order(g: &SimpleGraph, order: &[usize]) -> Result<TreeDecomposition> {
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if pos.len() != order.len() || pos.len() != g.num_vertices() || order.iter().any(|&v| !g.contains(v)) {
        return Err(Error::InvalidArgument("elimination order is not a permutation of the vertices".into()));
    }
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = g.vertices().map(|v| (v, g.neighbors(v).clone())).collect();
    let mut bags = Vec::with_capacity(order.len());
    let mut parent = Vec::with_capacity(order.len());
    for &v in order {
        let nb = adj.remove(&v).unwrap();
        for &a in &nb {
            let s = adj.get_mut(&a).unwrap();
            s.remove(&v);
            s.extend(nb.iter().copied().filter(|&b| b != a));
        }
        parent.push(nb.iter().map(|w| pos[w]).min());
        let mut bag = nb;
        bag.insert(v);
        bags.push(bag);
    }
    let roots: Vec<usize> = (0..parent.len()).filter(|&i| parent[i].is_none()).collect();
    for w in roots.windows(2) {
        parent[w[0]] = Some(w[1]);
    }
    Ok(TreeDecomposition { bags, parent })
}

/// Tree decomposition from the min-fill elimination order.
pub fn treewidth_min_fill(g: &SimpleGraph) -> TreeDecomposition {
    tree_decomposition_from_order(g, &min_fill_order(g)).expect("min-fill order is a permutation")
}

/// Contraction order of network edges read off a decomposition of the line
/// graph by repeated leaf pruning. A non-final leaf whose bag fits inside
/// its neighbour's bag is dropped; otherwise the smallest vertex it holds
/// alone is emitted and erased from every bag. The last node emits what is
/// left of its bag in ascending order. Leaves are taken smallest id first.
pub fn td_to_order(t: &TreeDecomposition, m: &LineGraphMap) -> Result<Vec<usize>> {
    let mut adj = t.tree_adjacency()?;
    let mut bags = t.bags.clone();
    let mut holders: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, bag) in bags.iter().enumerate() {
        for &v in bag {
            if m.edge(v).is_none() {
                return Err(Error::InvalidDecomposition(format!("bag {i} holds unknown vertex {v}")));
            }
            holders.entry(v).or_default().insert(i);
        }
    }
    if holders.len() != m.len() {
        return Err(Error::InvalidDecomposition("some line-graph vertex is in no bag".into()));
    }
    let mut out = Vec::with_capacity(m.len());
    let mut alive = bags.len();
    let mut leaves: BTreeSet<usize> = (0..adj.len()).filter(|&i| adj[i].len() <= 1).collect();
    while alive > 0 {
        let l = *leaves.first().unwrap();
        if alive == 1 {
            out.extend(bags[l].iter().copied());
            break;
        }
        let p = *adj[l].first().unwrap();
        match bags[l].difference(&bags[p]).next().copied() {
            None => {
                leaves.remove(&l);
                adj[p].remove(&l);
                adj[l].clear();
                alive -= 1;
                if adj[p].len() <= 1 {
                    leaves.insert(p);
                }
            }
            Some(e) => {
                out.push(e);
                for &b in &holders[&e] {
                    bags[b].remove(&e);
                }
            }
        }
    }
    Ok(out.into_iter().map(|v| m.edge(v).unwrap()).collect())
}
