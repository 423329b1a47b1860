use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::bb::{treewidth_bb, ExpansionLimit};
use super::{line_graph, NetGraph};

/// Result of [`precontract`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precontracted {
    pub graph: NetGraph,
    /// Surviving node -> every original node it absorbed, itself included.
    pub groups: BTreeMap<usize, BTreeSet<usize>>,
    /// Original edge ids in the order they were contracted.
    pub merge_edges: Vec<usize>,
}

/// Merges leaves into their neighbour until none is left, then contracts
/// edges whose two endpoints both have degree 2 and no common neighbour.
///
/// A leaf is a node with exactly one distinct neighbour; parallel edges to
/// that neighbour are contracted together. Candidates are processed in
/// ascending id order and the surviving node keeps the smaller id in a chain
/// contraction.
pub fn precontract(g: &NetGraph) -> Precontracted {
    let mut graph = g.clone();
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = g.nodes().iter().map(|&v| (v, BTreeSet::from([v]))).collect();
    let mut merge_edges = Vec::new();
    let mut absorb = |graph: &mut NetGraph, merge_edges: &mut Vec<usize>, into: usize, from: usize| {
        merge_edges.extend(graph.merge(into, from));
        let moved = groups.remove(&from).unwrap();
        groups.get_mut(&into).unwrap().extend(moved);
    };

    let mut leaves: BTreeSet<usize> = graph.nodes().clone();
    while let Some(v) = leaves.pop_first() {
        if !graph.contains_node(v) {
            continue;
        }
        let nb = graph.neighbors(v);
        if nb.len() != 1 {
            continue;
        }
        let p = *nb.first().unwrap();
        absorb(&mut graph, &mut merge_edges, p, v);
        leaves.insert(p);
    }

    let mut candidates: BTreeSet<usize> = graph.edges().keys().copied().collect();
    while let Some(e) = candidates.pop_first() {
        let Some((a, b)) = graph.endpoints(e) else { continue };
        if graph.degree(a) != 2 || graph.degree(b) != 2 {
            continue;
        }
        let na = graph.neighbors(a);
        let nb = graph.neighbors(b);
        if na.len() != 2 || nb.len() != 2 || na.intersection(&nb).next().is_some() {
            continue;
        }
        absorb(&mut graph, &mut merge_edges, a, b);
        candidates.extend(graph.incident(a).iter().copied());
    }

    Precontracted { graph, groups, merge_edges }
}

/// Expansion budget of the branch and bound inside [`quick_tw`].
pub const QUICK_TW_EXPANSIONS: u64 = 64;

/// Fast treewidth proxy of a network: pre-contract, take the line graph and
/// run a short branch and bound. A network that collapses to isolated nodes
/// scores 0.
pub fn quick_tw(g: &NetGraph) -> usize {
    let pre = precontract(g);
    let (lg, _) = line_graph(&pre.graph);
    if lg.num_vertices() == 0 {
        return 0;
    }
    treewidth_bb(&lg, &mut ExpansionLimit::new(QUICK_TW_EXPANSIONS)).width()
}
