//! Open ZX-diagrams, their graph-like normal form, and the closed hybrid
//! structure (graph state + per-node linear forms) the rewrites act on.
//!
//! Spider semantics: a Z-spider of phase `a` is `|0..0><0..0| + e^{ia}|1..1><1..1|`,
//! an X-spider is the same map in the `|+>,|->` basis, and a Hadamard wire
//! carries `H = [[1, 1], [1, -1]] / sqrt(2)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use core::fmt::{self, Write};

use num_complex::Complex64;

use crate::twtools::NetGraph;
use crate::{Error, Result};

/// Stable node identifier. Ids are never reused within one diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpiderKind {
    Z,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spider {
    pub kind: SpiderKind,
    /// Radians, kept in `[0, 2π)`.
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct WireId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wire {
    pub a: NodeId,
    pub b: NodeId,
    pub hadamard: bool,
}

impl Wire {
    pub fn is_self_loop(&self) -> bool {
        self.a == self.b
    }

    fn other(&self, v: NodeId) -> NodeId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

/// An open port: a wire from `node` to the outside world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryPort {
    pub node: NodeId,
    pub hadamard: bool,
}

pub(crate) fn normalize_phase(phase: f64) -> f64 {
    let p = phase % TAU;
    let p = if p < 0.0 { p + TAU } else { p };
    if TAU - p < 1e-12 || p < 1e-12 {
        0.0
    } else {
        p
    }
}

fn is_zero_phase(phase: f64) -> bool {
    normalize_phase(phase) == 0.0
}

/// A ZX-diagram with Z/X spiders, plain or Hadamard wires (self-loops and
/// parallel wires allowed), ordered boundary ports and a global scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct ZxDiagram {
    spiders: BTreeMap<NodeId, Spider>,
    wires: BTreeMap<WireId, Wire>,
    boundary: Vec<BoundaryPort>,
    pub scalar: Complex64,
    next_node: usize,
    next_wire: usize,
}

impl Default for ZxDiagram {
    fn default() -> Self {
        Self::new()
    }
}

impl ZxDiagram {
    pub fn new() -> Self {
        ZxDiagram {
            spiders: BTreeMap::new(),
            wires: BTreeMap::new(),
            boundary: Vec::new(),
            scalar: Complex64::new(1.0, 0.0),
            next_node: 0,
            next_wire: 0,
        }
    }

    pub fn add_spider(&mut self, kind: SpiderKind, phase: f64) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        self.spiders.insert(id, Spider { kind, phase: normalize_phase(phase) });
        id
    }

    pub fn add_wire(&mut self, a: NodeId, b: NodeId, hadamard: bool) -> Result<WireId> {
        for v in [a, b] {
            if !self.spiders.contains_key(&v) {
                return Err(Error::UnknownNode(v));
            }
        }
        let id = WireId(self.next_wire);
        self.next_wire += 1;
        self.wires.insert(id, Wire { a, b, hadamard });
        Ok(id)
    }

    /// Appends an open port; its index in [`ZxDiagram::boundary`] is the port id.
    pub fn add_boundary(&mut self, node: NodeId, hadamard: bool) -> Result<usize> {
        if !self.spiders.contains_key(&node) {
            return Err(Error::UnknownNode(node));
        }
        self.boundary.push(BoundaryPort { node, hadamard });
        Ok(self.boundary.len() - 1)
    }

    /// Puts one more Hadamard box on a wire. Two boxes cancel.
    pub fn push_hadamard(&mut self, wire: WireId) {
        if let Some(w) = self.wires.get_mut(&wire) {
            w.hadamard = !w.hadamard;
        }
    }

    pub fn spider(&self, v: NodeId) -> Option<&Spider> {
        self.spiders.get(&v)
    }

    pub fn spiders(&self) -> impl Iterator<Item = (NodeId, &Spider)> + '_ {
        self.spiders.iter().map(|(k, s)| (*k, s))
    }

    pub fn wires(&self) -> impl Iterator<Item = (WireId, &Wire)> + '_ {
        self.wires.iter().map(|(k, w)| (*k, w))
    }

    pub fn boundary(&self) -> &[BoundaryPort] {
        &self.boundary
    }

    pub fn num_spiders(&self) -> usize {
        self.spiders.len()
    }

    pub fn num_wires(&self) -> usize {
        self.wires.len()
    }

    fn incident(&self, v: NodeId) -> Vec<WireId> {
        self.wires.iter().filter(|(_, w)| w.a == v || w.b == v).map(|(id, _)| *id).collect()
    }

    /// Wire ends at `v`, counting a self-loop twice and boundary ports once.
    pub fn degree(&self, v: NodeId) -> usize {
        let internal: usize = self.wires.values().map(|w| usize::from(w.a == v) + usize::from(w.b == v)).sum();
        internal + self.boundary.iter().filter(|p| p.node == v).count()
    }

    /// Checks items 1-3 of graph-likeness: Z-spiders only, Hadamard wires
    /// only, no self-loops or parallel wires.
    pub fn is_graph_like(&self) -> bool {
        if self.spiders.values().any(|s| s.kind != SpiderKind::Z) {
            return false;
        }
        let mut seen = BTreeSet::new();
        for w in self.wires.values() {
            if !w.hadamard || w.is_self_loop() {
                return false;
            }
            let key = (w.a.min(w.b), w.a.max(w.b));
            if !seen.insert(key) {
                return false;
            }
        }
        true
    }

    fn remove_spider(&mut self, v: NodeId) {
        self.spiders.remove(&v);
        self.wires.retain(|_, w| w.a != v && w.b != v);
    }

    /// Rule 1 on every X-spider: toggle to Z and flip the Hadamard flag of
    /// each incident wire end (a self-loop gets flipped twice).
    fn toggle_all_x(&mut self) {
        let xs: Vec<NodeId> = self.spiders.iter().filter(|(_, s)| s.kind == SpiderKind::X).map(|(v, _)| *v).collect();
        for v in xs {
            self.spiders.get_mut(&v).unwrap().kind = SpiderKind::Z;
            for w in self.wires.values_mut() {
                if w.a == v {
                    w.hadamard = !w.hadamard;
                }
                if w.b == v {
                    w.hadamard = !w.hadamard;
                }
            }
            for p in self.boundary.iter_mut().filter(|p| p.node == v) {
                p.hadamard = !p.hadamard;
            }
        }
    }

    /// Rule 3: fuses the endpoints of the lowest plain non-loop wire.
    fn fuse_one(&mut self) -> bool {
        let found = self.wires.iter().find(|(_, w)| !w.hadamard && !w.is_self_loop()).map(|(id, w)| (*id, *w));
        let Some((id, w)) = found else { return false };
        let (keep, gone) = (w.a.min(w.b), w.a.max(w.b));
        self.wires.remove(&id);
        let phase = self.spiders[&gone].phase;
        let s = self.spiders.get_mut(&keep).unwrap();
        s.phase = normalize_phase(s.phase + phase);
        for w in self.wires.values_mut() {
            if w.a == gone {
                w.a = keep;
            }
            if w.b == gone {
                w.b = keep;
            }
        }
        for p in self.boundary.iter_mut().filter(|p| p.node == gone) {
            p.node = keep;
        }
        self.spiders.remove(&gone);
        true
    }

    /// Plain self-loops contribute a factor 1. A Hadamard self-loop on a
    /// Z-spider contributes `H[s][s] = (-1)^s / sqrt(2)`: phase `+π`, scalar `1/sqrt(2)`.
    fn remove_self_loops(&mut self) -> bool {
        let loops: Vec<(WireId, Wire)> =
            self.wires.iter().filter(|(_, w)| w.is_self_loop()).map(|(id, w)| (*id, *w)).collect();
        for (id, w) in &loops {
            self.wires.remove(id);
            if w.hadamard {
                let s = self.spiders.get_mut(&w.a).unwrap();
                s.phase = normalize_phase(s.phase + PI);
                self.scalar *= FRAC_1_SQRT_2;
            }
        }
        !loops.is_empty()
    }

    /// Two parallel Hadamard wires between Z-spiders multiply to
    /// `H[s][t]^2 = 1/2`, so each pair is dropped for a factor `1/2`.
    fn remove_parallel_hadamards(&mut self) -> bool {
        let mut groups: BTreeMap<(NodeId, NodeId), Vec<WireId>> = BTreeMap::new();
        for (id, w) in &self.wires {
            if w.hadamard && !w.is_self_loop() {
                groups.entry((w.a.min(w.b), w.a.max(w.b))).or_default().push(*id);
            }
        }
        let mut changed = false;
        for ids in groups.values() {
            for pair in ids.chunks_exact(2) {
                self.wires.remove(&pair[0]);
                self.wires.remove(&pair[1]);
                self.scalar *= 0.5;
                changed = true;
            }
        }
        changed
    }

    /// Rule 4: a phase-0 Z-spider between two distinct neighbours through two
    /// Hadamard wires is an identity; it becomes a plain wire (fused next).
    fn remove_one_trivial(&mut self) -> bool {
        let on_boundary: BTreeSet<NodeId> = self.boundary.iter().map(|p| p.node).collect();
        for (v, s) in &self.spiders {
            if !is_zero_phase(s.phase) || on_boundary.contains(v) {
                continue;
            }
            let inc = self.incident(*v);
            if inc.len() != 2 {
                continue;
            }
            let (w0, w1) = (self.wires[&inc[0]], self.wires[&inc[1]]);
            if !w0.hadamard || !w1.hadamard || w0.is_self_loop() || w1.is_self_loop() {
                continue;
            }
            let (n0, n1) = (w0.other(*v), w1.other(*v));
            if n0 == n1 {
                continue;
            }
            let v = *v;
            self.remove_spider(v);
            self.add_wire(n0, n1, false).expect("neighbours are live");
            return true;
        }
        false
    }
}

/// Rewrites `d` into graph-like form with Rules 1-4 plus self-loop and
/// parallel-edge elimination. The tensor value, scalar included, is unchanged.
pub fn to_graph_like(d: &ZxDiagram) -> ZxDiagram {
    let mut g = d.clone();
    g.toggle_all_x();
    loop {
        let mut changed = false;
        while g.fuse_one() {
            changed = true;
        }
        changed |= g.remove_self_loops();
        changed |= g.remove_parallel_hadamards();
        changed |= g.remove_one_trivial();
        if !changed {
            break;
        }
    }
    g
}

/// A 2-component row vector attached to a node. The node contributes
/// `form[s]` when its spider value is `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForm(pub [Complex64; 2]);

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

impl LinearForm {
    /// `[1, 1]`, i.e. `sqrt(2) <+|`.
    pub const PLUS: LinearForm = LinearForm([Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);

    pub fn from_phase(theta: f64) -> Self {
        LinearForm([Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, theta)])
    }

    /// Row vector times matrix.
    pub fn apply(&self, m: &Mat2) -> Self {
        let [a, b] = self.0;
        LinearForm([a * m[0][0] + b * m[1][0], a * m[0][1] + b * m[1][1]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Closed graph-like diagram with its phases pulled out into linear forms.
/// Every edge is an implicit Hadamard edge; the graph is simple.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedGraphLike {
    forms: BTreeMap<NodeId, LinearForm>,
    adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pub scalar: Complex64,
    next_id: usize,
}

impl Default for ClosedGraphLike {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosedGraphLike {
    pub fn new() -> Self {
        ClosedGraphLike { forms: BTreeMap::new(), adj: BTreeMap::new(), scalar: Complex64::new(1.0, 0.0), next_id: 0 }
    }

    pub fn add_node(&mut self, form: LinearForm) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.forms.insert(id, form);
        self.adj.insert(id, BTreeSet::new());
        id
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::NotGraphLike("self-loop"));
        }
        self.adj.get_mut(&u).unwrap().insert(v);
        self.adj.get_mut(&v).unwrap().insert(u);
        Ok(())
    }

    pub(crate) fn check(&self, v: NodeId) -> Result<()> {
        if self.forms.contains_key(&v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    /// Adds the edge if absent, removes it if present.
    pub(crate) fn toggle_edge(&mut self, u: NodeId, v: NodeId) {
        let nu = self.adj.get_mut(&u).unwrap();
        if !nu.remove(&v) {
            nu.insert(v);
            self.adj.get_mut(&v).unwrap().insert(u);
        } else {
            self.adj.get_mut(&v).unwrap().remove(&u);
        }
    }

    pub(crate) fn form_mut(&mut self, v: NodeId) -> &mut LinearForm {
        self.forms.get_mut(&v).unwrap()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj.get(&u).is_some_and(|n| n.contains(&v))
    }

    pub fn form(&self, v: NodeId) -> Option<&LinearForm> {
        self.forms.get(&v)
    }

    pub fn neighbors(&self, v: NodeId) -> Result<&BTreeSet<NodeId>> {
        self.adj.get(&v).ok_or(Error::UnknownNode(v))
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj.get(&v).map_or(0, |n| n.len())
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.forms.keys().copied()
    }

    pub fn forms(&self) -> impl Iterator<Item = (NodeId, &LinearForm)> + '_ {
        self.forms.iter().map(|(k, f)| (*k, f))
    }

    pub fn num_nodes(&self) -> usize {
        self.forms.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.values().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adj.values().map(|n| n.len()).max().unwrap_or(0)
    }

    /// Edges as `(u, v)` with `u < v`, sorted. The position of an edge in this
    /// list is its index id in the tensor network.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, n) in &self.adj {
            for v in n.range(NodeId(u.0 + 1)..) {
                out.push((*u, *v));
            }
        }
        out
    }

    /// The underlying network graph: node labels are node ids, edge ids are
    /// positions in [`ClosedGraphLike::edges`].
    pub fn net_graph(&self) -> NetGraph {
        let mut g = NetGraph::new();
        for v in self.nodes() {
            g.add_node(v.0);
        }
        for (i, (u, v)) in self.edges().into_iter().enumerate() {
            g.add_edge(i, u.0, v.0);
        }
        g
    }

    /// Deterministic text dump used by golden tests: sorted nodes, sorted
    /// edges, 17-significant-digit floats.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scalar {:.16e} {:.16e}", self.scalar.re, self.scalar.im);
        let _ = writeln!(s, "nodes {}", self.num_nodes());
        for (v, f) in &self.forms {
            let [a, b] = f.0;
            let _ = writeln!(s, "node {} {:.16e} {:.16e} {:.16e} {:.16e}", v, a.re, a.im, b.re, b.im);
        }
        let edges = self.edges();
        let _ = writeln!(s, "edges {}", edges.len());
        for (u, v) in edges {
            let _ = writeln!(s, "edge {} {}", u, v);
        }
        s
    }
}

/// Moves each spider phase `θ` into the linear form `[1, e^{iθ}]`.
pub fn close_to_hybrid(d: &ZxDiagram) -> Result<ClosedGraphLike> {
    if !d.boundary.is_empty() {
        return Err(Error::OpenBoundary(d.boundary.len()));
    }
    if !d.is_graph_like() {
        return Err(Error::NotGraphLike("run to_graph_like first"));
    }
    let mut g = ClosedGraphLike::new();
    let mut map = BTreeMap::new();
    for (v, s) in d.spiders() {
        map.insert(v, g.add_node(LinearForm::from_phase(s.phase)));
    }
    for w in d.wires.values() {
        g.add_edge(map[&w.a], map[&w.b])?;
    }
    g.scalar = d.scalar;
    Ok(g)
}

/// Default node limit of [`eval_hybrid`].
pub const HYBRID_ORACLE_LIMIT: usize = 22;

/// Brute-force value of a hybrid diagram:
/// `scalar · Σ_s Π_v form_v[s_v] · Π_{uv∈E} (-1)^{s_u s_v} / sqrt(2)`.
pub fn eval_hybrid(g: &ClosedGraphLike) -> Result<Complex64> {
    eval_hybrid_with_limit(g, HYBRID_ORACLE_LIMIT)
}

pub fn eval_hybrid_with_limit(g: &ClosedGraphLike, limit: usize) -> Result<Complex64> {
    let n = g.num_nodes();
    if n > limit || n > 40 {
        return Err(Error::OracleLimit { size: n, limit: limit.min(40) });
    }
    let ids: Vec<NodeId> = g.nodes().collect();
    let pos: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    // lower[i]: neighbours with a smaller position, as a bitmask
    let mut lower = alloc::vec![0u64; n];
    for (u, v) in g.edges() {
        let (a, b) = (pos[&u], pos[&v]);
        let (lo, hi) = (a.min(b), a.max(b));
        lower[hi] |= 1 << lo;
    }
    let forms: Vec<[Complex64; 2]> = ids.iter().map(|v| g.forms[v].0).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for s in 0u64..(1u64 << n) {
        let mut term = Complex64::new(1.0, 0.0);
        let mut parity = 0u32;
        for (i, f) in forms.iter().enumerate() {
            let bit = ((s >> i) & 1) as usize;
            term *= f[bit];
            if bit == 1 {
                parity ^= (lower[i] & s).count_ones() & 1;
            }
        }
        if parity == 1 {
            total -= term;
        } else {
            total += term;
        }
    }
    let edge_factor = libm::pow(FRAC_1_SQRT_2, g.num_edges() as f64);
    Ok(total * edge_factor * g.scalar)
}
