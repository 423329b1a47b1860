//! Branch and bound over elimination orders, seeded with min-fill.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::decomposition::{min_fill_order, tree_decomposition_from_order, TreeDecomposition};
use super::SimpleGraph;

/// Stops an anytime search. Called once per node expansion.
pub trait SearchBudget {
    fn exhausted(&mut self) -> bool;
}

/// Runs the search to completion.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unlimited;

impl SearchBudget for Unlimited {
    fn exhausted(&mut self) -> bool {
        false
    }
}

/// Allows a fixed number of expansions. Results depend only on the graph
/// and the limit.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionLimit {
    remaining: u64,
}

impl ExpansionLimit {
    pub fn new(expansions: u64) -> Self {
        ExpansionLimit { remaining: expansions }
    }
}

impl SearchBudget for ExpansionLimit {
    fn exhausted(&mut self) -> bool {
        if self.remaining == 0 {
            return true;
        }
        self.remaining -= 1;
        false
    }
}

const MEMO_CAP: usize = 1 << 18;
/// Above this many remaining vertices the per-node bound falls back from
/// minor-min-width to the minimum degree.
const MMW_LIMIT: usize = 64;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn or_assign(&mut self, o: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a |= b;
        }
    }
    /// `self \ {skip} ⊆ o`
    fn subset_except(&self, o: &Bits, skip: usize) -> bool {
        self.0.iter().zip(&o.0).enumerate().all(|(k, (a, b))| {
            let mut a = *a;
            if skip / 64 == k {
                a &= !(1 << (skip % 64));
            }
            a & !b == 0
        })
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }
}

struct Search<'a> {
    best_width: usize,
    best_order: Vec<usize>,
    memo: BTreeMap<Bits, usize>,
    budget: &'a mut dyn SearchBudget,
    stopped: bool,
}

fn fill(adj: &[Bits], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        missing += nb[i + 1..].iter().filter(|&&b| !adj[a].get(b)).count();
    }
    missing
}

fn is_clique_except(adj: &[Bits], v: usize, skip: Option<usize>) -> bool {
    adj[v].iter().filter(|&a| Some(a) != skip).all(|a| {
        let mut rest = adj[v].clone();
        if let Some(s) = skip {
            rest.clear(s);
        }
        rest.subset_except(&adj[a], a)
    })
}

fn minor_min_width(adj: &[Bits], alive: &Bits) -> usize {
    let mut adj = adj.to_vec();
    let mut alive = alive.clone();
    let mut lb = 0;
    loop {
        let mut pick: Option<(usize, usize)> = None;
        for v in alive.iter() {
            let d = adj[v].count();
            if pick.is_none_or(|(pd, _)| d < pd) {
                pick = Some((d, v));
            }
        }
        let Some((d, v)) = pick else { return lb };
        if alive.count() <= 1 {
            return lb;
        }
        lb = lb.max(d);
        alive.clear(v);
        let nb = adj[v].clone();
        if d == 0 {
            continue;
        }
        let u = nb.iter().min_by_key(|&u| (adj[u].count(), u)).unwrap();
        for w in nb.iter() {
            adj[w].clear(v);
        }
        let mut merged = adj[u].clone();
        merged.or_assign(&nb);
        merged.clear(u);
        merged.clear(v);
        for w in merged.iter() {
            adj[w].set(u);
        }
        adj[u] = merged;
    }
}

fn eliminate(adj: &[Bits], v: usize) -> Vec<Bits> {
    let mut out = adj.to_vec();
    let nb = adj[v].clone();
    for a in nb.iter() {
        out[a].or_assign(&nb);
        out[a].clear(a);
        out[a].clear(v);
    }
    out[v] = Bits::new(adj.len());
    out
}

impl Search<'_> {
    fn dfs(&mut self, adj: &[Bits], alive: &Bits, elim: &Bits, order: &mut Vec<usize>, gw: usize) {
        if self.stopped || self.budget.exhausted() {
            self.stopped = true;
            return;
        }
        let rem = alive.count();
        let finish = gw.max(rem.saturating_sub(1));
        if finish < self.best_width {
            self.best_width = finish;
            self.best_order = order.iter().copied().chain(alive.iter()).collect();
        }
        if finish <= gw {
            return;
        }
        let lb = if rem <= MMW_LIMIT {
            minor_min_width(adj, alive)
        } else {
            alive.iter().map(|v| adj[v].count()).min().unwrap_or(0)
        };
        let low = gw.max(lb);
        if low >= self.best_width {
            return;
        }
        match self.memo.get(elim) {
            Some(&w) if w <= gw => return,
            _ => {
                if self.memo.len() < MEMO_CAP || self.memo.contains_key(elim) {
                    self.memo.insert(elim.clone(), gw);
                }
            }
        }
        // a simplicial vertex, or an almost simplicial one of degree at most
        // the lower bound, can be eliminated first without branching
        let forced = alive.iter().find(|&v| {
            is_clique_except(adj, v, None)
                || (adj[v].count() <= low && adj[v].iter().any(|a| is_clique_except(adj, v, Some(a))))
        });
        let children: Vec<usize> = match forced {
            Some(v) => vec![v],
            None => {
                let mut c: Vec<(usize, usize)> = alive.iter().map(|v| (fill(adj, v), v)).collect();
                c.sort_unstable();
                c.into_iter().map(|(_, v)| v).collect()
            }
        };
        for v in children {
            let ngw = gw.max(adj[v].count());
            if ngw >= self.best_width {
                continue;
            }
            let next = eliminate(adj, v);
            let mut nalive = alive.clone();
            nalive.clear(v);
            let mut nelim = elim.clone();
            nelim.set(v);
            order.push(v);
            self.dfs(&next, &nalive, &nelim, order, ngw);
            order.pop();
            if self.stopped {
                return;
            }
        }
    }
}

/// Anytime branch and bound over elimination orders. Starts from the
/// min-fill order and returns the best decomposition found before the
/// budget runs out, so its width never exceeds the min-fill width.
pub fn treewidth_bb(g: &SimpleGraph, budget: &mut dyn SearchBudget) -> TreeDecomposition {
    let verts: Vec<usize> = g.vertices().collect();
    let seed = min_fill_order(g);
    let seed_td = tree_decomposition_from_order(g, &seed).expect("min-fill order is a permutation");
    let n = verts.len();
    if n <= 2 {
        return seed_td;
    }
    let index: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![Bits::new(n); n];
    for (a, b) in g.edges() {
        adj[index[&a]].set(index[&b]);
        adj[index[&b]].set(index[&a]);
    }
    let mut alive = Bits::new(n);
    for i in 0..n {
        alive.set(i);
    }
    let seed_width = seed_td.width();
    if minor_min_width(&adj, &alive) >= seed_width {
        return seed_td;
    }
    let mut search =
        Search { best_width: seed_width, best_order: Vec::new(), memo: BTreeMap::new(), budget, stopped: false };
    search.dfs(&adj, &alive, &Bits::new(n), &mut Vec::new(), 0);
    if search.best_order.is_empty() {
        return seed_td;
    }
    let order: Vec<usize> = search.best_order.iter().map(|&i| verts[i]).collect();
    tree_decomposition_from_order(g, &order).expect("search order is a permutation")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SimpleGraph {
        let mut g = SimpleGraph::new();
        for v in 0..n {
            g.add_vertex(v);
        }
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    #[test]
    fn k4_minus_edge() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        let td = treewidth_bb(&g, &mut Unlimited);
        td.validate(&g).unwrap();
        assert_eq!(td.width(), 2);
    }

    #[test]
    fn zero_budget_returns_seed() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]);
        let td = treewidth_bb(&g, &mut ExpansionLimit::new(0));
        assert_eq!(td, super::super::treewidth_min_fill(&g));
    }

    #[test]
    fn mmw_is_a_lower_bound_on_grid() {
        let mut edges = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                if c < 3 {
                    edges.push((r * 4 + c, r * 4 + c + 1));
                }
                if r < 3 {
                    edges.push((r * 4 + c, r * 4 + c + 4));
                }
            }
        }
        let g = graph(16, &edges);
        let td = treewidth_bb(&g, &mut Unlimited);
        td.validate(&g).unwrap();
        assert_eq!(td.width(), 4);
    }
}
