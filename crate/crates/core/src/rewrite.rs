//! Rewrites on [`ClosedGraphLike`]: local complementation, pivoting and
//! unfusion, each keeping the diagram value exactly (forms and scalar are
//! updated alongside the graph).
//!
//! All operations work in place; callers that need the old graph clone it.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt::Write;

use num_complex::Complex64;

use crate::zxgraph::{ClosedGraphLike, Mat2, NodeId};
use crate::{Error, Result};

/// `Z(a) = diag(1, e^{ia})`.
pub fn z_phase(a: f64) -> Mat2 {
    let o = Complex64::new(0.0, 0.0);
    [[Complex64::new(1.0, 0.0), o], [o, Complex64::from_polar(1.0, a)]]
}

/// `X(a) = H Z(a) H`.
pub fn x_phase(a: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, a);
    let p = (Complex64::new(1.0, 0.0) + e) * 0.5;
    let m = (Complex64::new(1.0, 0.0) - e) * 0.5;
    [[p, m], [m, p]]
}

/// `sqrt(2)^k`, exact for even `k`.
fn sqrt2_pow(k: i64) -> f64 {
    let half = libm::ldexp(1.0, (k.div_euclid(2)) as i32);
    if k.rem_euclid(2) == 1 {
        half * core::f64::consts::SQRT_2
    } else {
        half
    }
}

/// Toggles `a - b` and returns the change in edge count.
fn toggle(g: &mut ClosedGraphLike, a: NodeId, b: NodeId) -> i64 {
    let had = g.has_edge(a, b);
    g.toggle_edge(a, b);
    if had {
        -1
    } else {
        1
    }
}

/// Local complementation at `u`: complements the edges inside `N(u)`,
/// rotates `L_u` by `X(-π/2)` and each neighbour form by `Z(π/2)`. The
/// scalar picks up `sqrt(2)` per net added edge.
pub fn local_complement(g: &mut ClosedGraphLike, u: NodeId) -> Result<()> {
    let n: Vec<NodeId> = g.neighbors(u)?.iter().copied().collect();
    let mut delta = 0;
    for (i, &a) in n.iter().enumerate() {
        for &b in &n[i + 1..] {
            delta += toggle(g, a, b);
        }
    }
    let (x, z) = (x_phase(-FRAC_PI_2), z_phase(FRAC_PI_2));
    let f = g.form_mut(u);
    *f = f.apply(&x);
    for &a in &n {
        let f = g.form_mut(a);
        *f = f.apply(&z);
    }
    g.scalar *= sqrt2_pow(delta);
    Ok(())
}

/// Pivot along the edge `uv`, equal to local complementation at `u`, `v`,
/// `u`. With `A` the common neighbours and `B`, `C` the exclusive ones of
/// `u` and `v`, the edges between distinct classes are toggled and `u`, `v`
/// trade neighbourhoods while keeping their ids.
pub fn pivot(g: &mut ClosedGraphLike, u: NodeId, v: NodeId) -> Result<()> {
    g.check(u)?;
    g.check(v)?;
    if u == v || !g.has_edge(u, v) {
        return Err(Error::NotAnEdge(u, v));
    }
    let nu: BTreeSet<NodeId> = g.neighbors(u)?.iter().copied().filter(|&w| w != v).collect();
    let nv: BTreeSet<NodeId> = g.neighbors(v)?.iter().copied().filter(|&w| w != u).collect();
    let a: Vec<NodeId> = nu.intersection(&nv).copied().collect();
    let b: Vec<NodeId> = nu.difference(&nv).copied().collect();
    let c: Vec<NodeId> = nv.difference(&nu).copied().collect();
    let mut delta = 0;
    for (p, q) in [(&a, &b), (&a, &c), (&b, &c)] {
        for &x in p {
            for &y in q {
                delta += toggle(g, x, y);
            }
        }
    }
    for &w in &b {
        g.toggle_edge(u, w);
        g.toggle_edge(v, w);
    }
    for &w in &c {
        g.toggle_edge(u, w);
        g.toggle_edge(v, w);
    }
    let (x, z) = (x_phase(-FRAC_PI_2), z_phase(FRAC_PI_2));
    let zz = z_phase(core::f64::consts::PI);
    let fu = g.form_mut(u);
    *fu = fu.apply(&x).apply(&z).apply(&x);
    let fv = g.form_mut(v);
    *fv = fv.apply(&z).apply(&x).apply(&z);
    for &w in a.iter().chain(&b).chain(&c) {
        let f = g.form_mut(w);
        *f = f.apply(&zz);
    }
    g.scalar *= sqrt2_pow(delta);
    Ok(())
}

/// Unfuses `u`: the neighbours outside `keep` move to a fresh node `u'`,
/// joined to `u` through a fresh mediator `u''`. Both new nodes carry the
/// form `(1, 1)`; the value is unchanged without any scalar correction.
/// Returns `(u', u'')`.
pub fn unfuse(g: &mut ClosedGraphLike, u: NodeId, keep: &BTreeSet<NodeId>) -> Result<(NodeId, NodeId)> {
    let n = g.neighbors(u)?.clone();
    if keep.is_empty() || !keep.is_subset(&n) || keep.len() == n.len() {
        return Err(Error::InvalidArgument(format!(
            "unfusion of {u} needs a nonempty strict subset of its neighbours"
        )));
    }
    let moved = g.add_node(crate::LinearForm::PLUS);
    let mediator = g.add_node(crate::LinearForm::PLUS);
    for &w in n.difference(keep) {
        g.toggle_edge(u, w);
        g.toggle_edge(moved, w);
    }
    g.toggle_edge(u, mediator);
    g.toggle_edge(mediator, moved);
    Ok((moved, mediator))
}

/// Above this many neighbours the matching falls back from exact dynamic
/// programming to a greedy choice.
pub const EXACT_MATCHING_LIMIT: usize = 20;

/// Pair weights on `N(u)`: for every fundamental cycle through `u` (spanning
/// tree by breadth-first search from `u`), the two neighbours of `u` on it.
pub fn cycle_pair_weights(g: &ClosedGraphLike, u: NodeId) -> Result<BTreeMap<(NodeId, NodeId), usize>> {
    let mut branch: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut tree_parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &a in g.neighbors(u)? {
        branch.insert(a, a);
        tree_parent.insert(a, u);
        queue.push_back(a);
    }
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x)? {
            if y != u && !branch.contains_key(&y) {
                branch.insert(y, branch[&x]);
                tree_parent.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    let mut weights = BTreeMap::new();
    for (&x, &bx) in &branch {
        for &y in g.neighbors(x)? {
            if y <= x || y == u || tree_parent[&x] == y || tree_parent[&y] == x {
                continue;
            }
            let by = branch[&y];
            if bx != by {
                *weights.entry((bx.min(by), bx.max(by))).or_insert(0) += 1;
            }
        }
    }
    Ok(weights)
}

fn best_matching(nodes: &[NodeId], w: &BTreeMap<(NodeId, NodeId), usize>) -> Vec<(NodeId, NodeId)> {
    let n = nodes.len();
    if n > EXACT_MATCHING_LIMIT {
        let mut edges: Vec<(usize, NodeId, NodeId)> = w.iter().map(|(&(a, b), &k)| (k, a, b)).collect();
        edges.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut used = BTreeSet::new();
        let mut out = Vec::new();
        for (_, a, b) in edges {
            if !used.contains(&a) && !used.contains(&b) {
                used.insert(a);
                used.insert(b);
                out.push((a, b));
            }
        }
        out.sort();
        return out;
    }
    let mut wm = vec![vec![0usize; n]; n];
    for (&(a, b), &k) in w {
        let i = nodes.binary_search(&a).unwrap();
        let j = nodes.binary_search(&b).unwrap();
        wm[i][j] = k;
        wm[j][i] = k;
    }
    let mut memo: BTreeMap<u32, usize> = BTreeMap::new();
    fn best(mask: u32, wm: &[Vec<usize>], memo: &mut BTreeMap<u32, usize>) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&mask) {
            return v;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut v = best(rest, wm, memo);
        let mut m = rest;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            if wm[i][j] > 0 {
                v = v.max(wm[i][j] + best(rest & !(1 << j), wm, memo));
            }
        }
        memo.insert(mask, v);
        v
    }
    let mut mask: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut out = Vec::new();
    while mask != 0 {
        let target = best(mask, &wm, &mut memo);
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut m = rest;
        let mut paired = false;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            if wm[i][j] > 0 && wm[i][j] + best(rest & !(1 << j), &wm, &mut memo) == target {
                out.push((nodes[i], nodes[j]));
                mask = rest & !(1 << j);
                paired = true;
                break;
            }
        }
        if !paired {
            mask = rest;
        }
    }
    out
}

/// Maximum-weight matching of the neighbours of `u` under
/// [`cycle_pair_weights`], pairs sorted; zero-weight pairs are never used.
/// Exact up to [`EXACT_MATCHING_LIMIT`] neighbours, greedy beyond.
pub fn matching_unfusion(g: &ClosedGraphLike, u: NodeId) -> Result<Vec<(NodeId, NodeId)>> {
    let nodes: Vec<NodeId> = g.neighbors(u)?.iter().copied().collect();
    if nodes.len() < 2 {
        return Err(Error::InvalidArgument(format!("node {u} has degree {} < 2", nodes.len())));
    }
    let w = cycle_pair_weights(g, u)?;
    Ok(best_matching(&nodes, &w))
}

/// Lowers every degree to at most `max_degree` by unfusion. The smallest
/// node above the limit is handled first; each pair of its matching moves
/// to a fresh node hanging off a mediator. An empty matching pairs the two
/// smallest neighbours.
pub fn split_high_degree(
    g: &mut ClosedGraphLike,
    max_degree: usize,
    mut trace: Option<&mut RewriteTrace>,
) -> Result<()> {
    if max_degree < 3 {
        return Err(Error::InvalidArgument(format!("max_degree {max_degree} < 3")));
    }
    loop {
        let Some(u) = g.nodes().find(|&v| g.degree(v) > max_degree) else { break };
        let mut pairs = matching_unfusion(g, u)?;
        if pairs.is_empty() {
            let n = g.neighbors(u)?;
            let mut it = n.iter().copied();
            pairs.push((it.next().unwrap(), it.next().unwrap()));
        }
        for (a, b) in pairs {
            let mut keep = g.neighbors(u)?.clone();
            keep.remove(&a);
            keep.remove(&b);
            if keep.is_empty() {
                break;
            }
            unfuse(g, u, &keep)?;
            if let Some(t) = trace.as_deref_mut() {
                t.push(RewriteStep::Unfuse { node: u, keep: keep.into_iter().collect() });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewriteStep {
    LocalComplement(NodeId),
    Pivot(NodeId, NodeId),
    Unfuse { node: NodeId, keep: Vec<NodeId> },
}

/// Ordered record of rewrites; replaying it on the starting graph gives the
/// final graph exactly, fresh node ids included.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s: RewriteStep) {
        self.steps.push(s);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn replay(&self, g: &ClosedGraphLike) -> Result<ClosedGraphLike> {
        let mut g = g.clone();
        for s in &self.steps {
            match s {
                RewriteStep::LocalComplement(u) => local_complement(&mut g, *u)?,
                RewriteStep::Pivot(u, v) => pivot(&mut g, *u, *v)?,
                RewriteStep::Unfuse { node, keep } => {
                    unfuse(&mut g, *node, &keep.iter().copied().collect())?;
                }
            }
        }
        Ok(g)
    }

    /// One step per line: `lc u`, `pivot u v`, `unfuse u k1 k2 ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            let _ = match step {
                RewriteStep::LocalComplement(u) => writeln!(s, "lc {u}"),
                RewriteStep::Pivot(u, v) => writeln!(s, "pivot {u} {v}"),
                RewriteStep::Unfuse { node, keep } => {
                    let _ = write!(s, "unfuse {node}");
                    for k in keep {
                        let _ = write!(s, " {k}");
                    }
                    writeln!(s)
                }
            };
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut t = RewriteTrace::new();
        for (no, line) in text.lines().enumerate() {
            let mut words = line.split_whitespace();
            let Some(op) = words.next() else { continue };
            let ids: Vec<NodeId> = words
                .map(|w| w.parse().map(NodeId))
                .collect::<core::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("trace line {}: bad node id", no + 1)))?;
            let step = match (op, ids.as_slice()) {
                ("lc", [u]) => RewriteStep::LocalComplement(*u),
                ("pivot", [u, v]) => RewriteStep::Pivot(*u, *v),
                ("unfuse", [u, keep @ ..]) => RewriteStep::Unfuse { node: *u, keep: keep.to_vec() },
                _ => return Err(Error::InvalidArgument(format!("trace line {}: unknown step", no + 1))),
            };
            t.push(step);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zxgraph::eval_hybrid;
    use crate::LinearForm;

    fn graph(n: usize, edges: &[(usize, usize)]) -> ClosedGraphLike {
        let mut g = ClosedGraphLike::new();
        for i in 0..n {
            g.add_node(LinearForm::from_phase(0.3 + i as f64));
        }
        for &(a, b) in edges {
            g.add_edge(NodeId(a), NodeId(b)).unwrap();
        }
        g
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-10 * (1.0 + b.norm())
    }

    #[test]
    fn isolated_lc_keeps_value() {
        let mut g = graph(2, &[]);
        let before = eval_hybrid(&g).unwrap();
        local_complement(&mut g, NodeId(0)).unwrap();
        assert_eq!(g.num_edges(), 0);
        assert!(close(eval_hybrid(&g).unwrap(), before));
    }

    #[test]
    fn lc_on_path_adds_edge() {
        let mut g = graph(3, &[(0, 1), (1, 2)]);
        let before = eval_hybrid(&g).unwrap();
        local_complement(&mut g, NodeId(1)).unwrap();
        assert!(g.has_edge(NodeId(0), NodeId(2)));
        assert!(close(eval_hybrid(&g).unwrap(), before));
        assert_eq!(local_complement(&mut g, NodeId(9)), Err(Error::UnknownNode(NodeId(9))));
    }

    #[test]
    fn pivot_equals_three_lcs() {
        let e = [(0, 1), (0, 2), (1, 2), (1, 3), (0, 4), (2, 5), (3, 5), (4, 5)];
        let mut p = graph(6, &e);
        let mut l = p.clone();
        pivot(&mut p, NodeId(0), NodeId(1)).unwrap();
        for u in [0, 1, 0] {
            local_complement(&mut l, NodeId(u)).unwrap();
        }
        assert_eq!(p.edges(), l.edges());
        for (v, f) in p.forms() {
            let h = l.form(v).unwrap();
            assert!(close(f.0[0], h.0[0]) && close(f.0[1], h.0[1]), "form of {v}");
        }
        assert!(close(p.scalar, l.scalar));
        let (x, y) = (NodeId(3), NodeId(4));
        if !p.has_edge(x, y) {
            assert_eq!(pivot(&mut p, x, y), Err(Error::NotAnEdge(x, y)));
        }
        assert_eq!(pivot(&mut p, x, x), Err(Error::NotAnEdge(x, x)));
    }

    #[test]
    fn unfuse_bookkeeping() {
        let mut g = graph(3, &[(0, 1), (0, 2)]);
        let before = eval_hybrid(&g).unwrap();
        let (m, med) = unfuse(&mut g, NodeId(0), &BTreeSet::from([NodeId(1)])).unwrap();
        assert_eq!(g.degree(NodeId(0)), 2);
        assert_eq!(g.degree(m), 2);
        assert_eq!(g.degree(med), 2);
        assert!(close(eval_hybrid(&g).unwrap(), before));
        assert!(unfuse(&mut g, NodeId(0), &BTreeSet::new()).is_err());
        let all = g.neighbors(NodeId(0)).unwrap().clone();
        assert!(unfuse(&mut g, NodeId(0), &all).is_err());
    }

    #[test]
    fn matching_on_triangles() {
        let g = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(matching_unfusion(&g, NodeId(0)).unwrap(), vec![(NodeId(1), NodeId(2))]);
        assert_eq!(cycle_pair_weights(&g, NodeId(0)).unwrap()[&(NodeId(1), NodeId(2))], 1);
        let g = graph(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]);
        assert_eq!(matching_unfusion(&g, NodeId(0)).unwrap(), vec![(NodeId(1), NodeId(2)), (NodeId(3), NodeId(4))]);
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        assert!(matching_unfusion(&star, NodeId(0)).unwrap().is_empty());
    }

    #[test]
    fn star_split() {
        let mut g = graph(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6)]);
        let orig = g.clone();
        let before = eval_hybrid(&g).unwrap();
        let mut trace = RewriteTrace::new();
        split_high_degree(&mut g, 3, Some(&mut trace)).unwrap();
        assert!(g.max_degree() <= 3);
        assert!(close(eval_hybrid(&g).unwrap(), before));
        assert_eq!(trace.replay(&orig).unwrap(), g);
        assert_eq!(RewriteTrace::from_text(&trace.to_text()).unwrap(), trace);
        let mut small = graph(3, &[(0, 1), (1, 2)]);
        let copy = small.clone();
        split_high_degree(&mut small, 3, None).unwrap();
        assert_eq!(small, copy);
        assert!(split_high_degree(&mut small, 2, None).is_err());
    }

    #[test]
    fn greedy_and_exact_matching_agree_on_easy_weights() {
        let nodes: Vec<NodeId> = (0..4).map(NodeId).collect();
        let w = BTreeMap::from([((NodeId(0), NodeId(1)), 2), ((NodeId(2), NodeId(3)), 1), ((NodeId(1), NodeId(2)), 2)]);
        // exact: {01, 23} weight 3 beats {12} weight 2
        assert_eq!(best_matching(&nodes, &w), vec![(NodeId(0), NodeId(1)), (NodeId(2), NodeId(3))]);
    }

    #[test]
    fn trace_text_rejects_garbage() {
        assert!(RewriteTrace::from_text("lc x").is_err());
        assert!(RewriteTrace::from_text("swap 1 2").is_err());
        let t = RewriteTrace::from_text("lc 1\n\npivot 2 3\n").unwrap();
        assert_eq!(t.len(), 2);
    }
}
