//! Graph utilities for contraction planning: network multigraphs, line
//! graphs, tree decompositions, elimination heuristics, pre-contraction and
//! the `quick_tw` cost proxy.

mod bb;
mod decomposition;
mod precontract;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

pub use bb::{treewidth_bb, ExpansionLimit, SearchBudget, Unlimited};
pub use decomposition::{
    min_fill_order, td_to_order, tree_decomposition_from_order, treewidth_min_fill, TreeDecomposition,
};
pub use precontract::{precontract, quick_tw, Precontracted, QUICK_TW_EXPANSIONS};

/// Undirected multigraph of a tensor network: nodes are tensors, every edge
/// is one bond index with a stable id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetGraph {
    nodes: BTreeSet<usize>,
    edges: BTreeMap<usize, (usize, usize)>,
    incident: BTreeMap<usize, BTreeSet<usize>>,
}

impl NetGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, v: usize) {
        self.nodes.insert(v);
        self.incident.entry(v).or_default();
    }

    /// Adds edge `id` between distinct nodes `a` and `b`, creating them if
    /// needed. Re-using an id replaces the old edge.
    pub fn add_edge(&mut self, id: usize, a: usize, b: usize) {
        assert_ne!(a, b, "network graphs carry no self-loops");
        self.remove_edge(id);
        self.add_node(a);
        self.add_node(b);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.insert(id, (a, b));
        self.incident.get_mut(&a).unwrap().insert(id);
        self.incident.get_mut(&b).unwrap().insert(id);
    }

    pub fn remove_edge(&mut self, id: usize) -> Option<(usize, usize)> {
        let (a, b) = self.edges.remove(&id)?;
        self.incident.get_mut(&a).unwrap().remove(&id);
        self.incident.get_mut(&b).unwrap().remove(&id);
        Some((a, b))
    }

    pub fn remove_node(&mut self, v: usize) {
        for e in self.incident(v).iter().copied().collect::<Vec<_>>() {
            self.remove_edge(e);
        }
        self.nodes.remove(&v);
        self.incident.remove(&v);
    }

    pub fn contains_node(&self, v: usize) -> bool {
        self.nodes.contains(&v)
    }

    pub fn nodes(&self) -> &BTreeSet<usize> {
        &self.nodes
    }

    /// Edges as `id -> (a, b)` with `a < b`.
    pub fn edges(&self) -> &BTreeMap<usize, (usize, usize)> {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> Option<(usize, usize)> {
        self.edges.get(&e).copied()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn incident(&self, v: usize) -> &BTreeSet<usize> {
        static EMPTY: BTreeSet<usize> = BTreeSet::new();
        self.incident.get(&v).unwrap_or(&EMPTY)
    }

    /// Number of incident edges, counting parallel edges separately.
    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).len()
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[&e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Distinct neighbours of `v`.
    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.incident(v).iter().map(|&e| self.other_end(e, v)).collect()
    }

    /// Edges joining `a` and `b`, ascending.
    pub fn edges_between(&self, a: usize, b: usize) -> Vec<usize> {
        self.incident(a).iter().copied().filter(|&e| self.other_end(e, a) == b).collect()
    }

    /// Merges node `from` into `into`: the edges between them disappear
    /// (returned ascending) and the remaining edges of `from` move to `into`.
    pub fn merge(&mut self, into: usize, from: usize) -> Vec<usize> {
        let shared = self.edges_between(into, from);
        for &e in &shared {
            self.remove_edge(e);
        }
        for e in self.incident(from).iter().copied().collect::<Vec<_>>() {
            let w = self.other_end(e, from);
            self.add_edge(e, into, w);
        }
        self.remove_node(from);
        shared
    }

    /// Connected components as node sets, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &s in &self.nodes {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = BTreeSet::from([s]);
            let mut stack = alloc::vec![s];
            while let Some(v) = stack.pop() {
                for w in self.neighbors(v) {
                    if seen.insert(w) {
                        comp.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Subgraph induced by `keep`, edge ids preserved.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> NetGraph {
        let mut g = NetGraph::new();
        for &v in keep {
            if self.contains_node(v) {
                g.add_node(v);
            }
        }
        for (&e, &(a, b)) in &self.edges {
            if keep.contains(&a) && keep.contains(&b) {
                g.add_edge(e, a, b);
            }
        }
        g
    }
}

/// Simple undirected graph on `usize` vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: BTreeMap<usize, BTreeSet<usize>>,
}

impl SimpleGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: usize) {
        self.adj.entry(v).or_default();
    }

    /// Adds `a - b`; self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.add_vertex(a);
        self.add_vertex(b);
        if a != b {
            self.adj.get_mut(&a).unwrap().insert(b);
            self.adj.get_mut(&b).unwrap().insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn contains(&self, v: usize) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.adj.keys().copied()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        static EMPTY: BTreeSet<usize> = BTreeSet::new();
        self.adj.get(&v).unwrap_or(&EMPTY)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.values().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (&a, n) in &self.adj {
            out.extend(n.range(a + 1..).map(|&b| (a, b)));
        }
        out
    }

    /// The underlying simple graph of a network (parallel edges collapse).
    pub fn from_net(g: &NetGraph) -> Self {
        let mut s = SimpleGraph::new();
        for &v in g.nodes() {
            s.add_vertex(v);
        }
        for &(a, b) in g.edges().values() {
            s.add_edge(a, b);
        }
        s
    }
}

/// Bijection between line-graph vertices `0..m` and network edge ids, the
/// vertices following ascending edge id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineGraphMap {
    to_edge: Vec<usize>,
    to_vertex: BTreeMap<usize, usize>,
}

impl LineGraphMap {
    pub fn edge(&self, vertex: usize) -> Option<usize> {
        self.to_edge.get(vertex).copied()
    }

    pub fn vertex(&self, edge: usize) -> Option<usize> {
        self.to_vertex.get(&edge).copied()
    }

    pub fn len(&self) -> usize {
        self.to_edge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_edge.is_empty()
    }
}

/// Line graph: one vertex per edge of `g`, adjacent when the edges share an
/// endpoint. Parallel edges become distinct, mutually adjacent vertices.
pub fn line_graph(g: &NetGraph) -> (SimpleGraph, LineGraphMap) {
    let mut map = LineGraphMap::default();
    for (i, &e) in g.edges().keys().enumerate() {
        map.to_edge.push(e);
        map.to_vertex.insert(e, i);
    }
    let mut lg = SimpleGraph::new();
    for i in 0..map.len() {
        lg.add_vertex(i);
    }
    for &v in g.nodes() {
        let inc: Vec<usize> = g.incident(v).iter().map(|e| map.to_vertex[e]).collect();
        for (k, &a) in inc.iter().enumerate() {
            for &b in &inc[k + 1..] {
                lg.add_edge(a, b);
            }
        }
    }
    (lg, map)
}
