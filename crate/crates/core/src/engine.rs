//! Dense exact contraction with multiply-add and rank accounting.
//!
//! Every index has dimension 2. Contracting tensors with index sets `A` and
//! `B` costs `2^|A ∪ B|` multiply-adds, the same model the order finder
//! uses, so measured and predicted costs agree exactly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::orderfinder::ContractionPlan;
use crate::twtools::NetGraph;
use crate::zxgraph::ClosedGraphLike;
use crate::{pairwise_sum, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense tensor, row-major with the first index most significant. An index
/// may appear twice, which marks a self-edge to be traced.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    indices: Vec<usize>,
    data: Vec<Complex64>,
}

impl Tensor {
    pub fn new(indices: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if indices.len() >= 64 || data.len() != 1usize << indices.len() {
            return Err(Error::InvalidArgument(format!(
                "tensor of rank {} needs {} entries, got {}",
                indices.len(),
                1u128 << indices.len().min(127),
                data.len()
            )));
        }
        let mut count: BTreeMap<usize, usize> = BTreeMap::new();
        for &i in &indices {
            *count.entry(i).or_default() += 1;
        }
        if count.values().any(|&c| c > 2) {
            return Err(Error::InvalidArgument("index repeated more than twice".into()));
        }
        Ok(Tensor { indices, data })
    }

    pub fn scalar(v: Complex64) -> Self {
        Tensor { indices: Vec::new(), data: vec![v] }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    fn distinct(&self) -> BTreeSet<usize> {
        self.indices.iter().copied().collect()
    }

    /// Reorders axes so that `order[k]` (a position in the current index
    /// list) becomes axis `k`.
    fn permute(&self, order: &[usize]) -> Tensor {
        let r = self.rank();
        if order.iter().enumerate().all(|(k, &p)| k == p) {
            return self.clone();
        }
        let strides: Vec<usize> = order.iter().map(|&p| 1usize << (r - 1 - p)).collect();
        let mut data = vec![ZERO; self.data.len()];
        for (k, slot) in data.iter_mut().enumerate() {
            let mut src = 0;
            for (axis, &s) in strides.iter().enumerate() {
                if (k >> (r - 1 - axis)) & 1 == 1 {
                    src += s;
                }
            }
            *slot = self.data[src];
        }
        Tensor { indices: order.iter().map(|&p| self.indices[p]).collect(), data }
    }

    /// Fixes every occurrence of `index` to `value` and drops those axes.
    pub fn fix(&self, index: usize, value: bool) -> Tensor {
        let keep: Vec<usize> = (0..self.rank()).filter(|&p| self.indices[p] != index).collect();
        let fixed: Vec<usize> = (0..self.rank()).filter(|&p| self.indices[p] == index).collect();
        if fixed.is_empty() {
            return self.clone();
        }
        let mut order = keep.clone();
        order.extend(&fixed);
        let t = self.permute(&order);
        let tail = fixed.len();
        let pick = if value { (1 << tail) - 1 } else { 0 };
        let data = (0..1usize << keep.len()).map(|k| t.data[(k << tail) | pick]).collect();
        Tensor { indices: keep.iter().map(|&p| self.indices[p]).collect(), data }
    }

    /// Traces every index that appears twice.
    fn trace_repeated(&self) -> Tensor {
        let mut seen = BTreeSet::new();
        let doubled: Vec<usize> = self.indices.iter().copied().filter(|&i| !seen.insert(i)).collect();
        if doubled.is_empty() {
            return self.clone();
        }
        let free: Vec<usize> = (0..self.rank()).filter(|&p| !doubled.contains(&self.indices[p])).collect();
        let mut order = free.clone();
        for &d in &doubled {
            order.extend((0..self.rank()).filter(|&p| self.indices[p] == d));
        }
        let t = self.permute(&order);
        let m = doubled.len();
        let data = (0..1usize << free.len())
            .map(|k| {
                (0..1usize << m)
                    .map(|s| {
                        // each traced index contributes the bit pair (b, b)
                        let mut pair = 0;
                        for j in 0..m {
                            let b = (s >> (m - 1 - j)) & 1;
                            pair = (pair << 2) | (b << 1) | b;
                        }
                        t.data[(k << (2 * m)) | pair]
                    })
                    .sum()
            })
            .collect();
        Tensor { indices: free.iter().map(|&p| self.indices[p]).collect(), data }
    }

    /// Contracts over every shared index. Result axes are the free axes of
    /// `self` followed by those of `other`.
    pub fn contract(&self, other: &Tensor) -> Tensor {
        let sb = other.distinct();
        let sa = self.distinct();
        let shared: Vec<usize> = sa.intersection(&sb).copied().collect();
        let pos = |t: &Tensor, i: usize| t.indices.iter().position(|&x| x == i).unwrap();
        let free_a: Vec<usize> = (0..self.rank()).filter(|&p| !sb.contains(&self.indices[p])).collect();
        let free_b: Vec<usize> = (0..other.rank()).filter(|&p| !sa.contains(&other.indices[p])).collect();
        let mut oa = free_a.clone();
        oa.extend(shared.iter().map(|&i| pos(self, i)));
        let mut ob: Vec<usize> = shared.iter().map(|&i| pos(other, i)).collect();
        ob.extend(&free_b);
        let a = self.permute(&oa);
        let b = other.permute(&ob);
        let (na, ns, nb) = (1usize << free_a.len(), 1usize << shared.len(), 1usize << free_b.len());
        let mut data = vec![ZERO; na * nb];
        for i in 0..na {
            let row = &a.data[i * ns..(i + 1) * ns];
            let out = &mut data[i * nb..(i + 1) * nb];
            for (s, &x) in row.iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                let col = &b.data[s * nb..(s + 1) * nb];
                for (o, &y) in out.iter_mut().zip(col) {
                    *o += x * y;
                }
            }
        }
        let mut indices: Vec<usize> = free_a.iter().map(|&p| self.indices[p]).collect();
        indices.extend(free_b.iter().map(|&p| other.indices[p]));
        Tensor { indices, data }
    }
}

/// Running totals of a contraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContractionStats {
    /// Multiply-adds, `2^|A ∪ B|` per pairwise contraction.
    pub cost: u128,
    /// Largest rank of any tensor present, initial tensors included.
    pub max_rank: usize,
}

/// Closed tensor network with a global scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    tensors: BTreeMap<usize, Tensor>,
    owners: BTreeMap<usize, Vec<usize>>,
    consumed: BTreeSet<usize>,
    pub scalar: Complex64,
    stats: ContractionStats,
}

impl Default for Network {
    fn default() -> Self {
        Self::new()
    }
}

impl Network {
    pub fn new() -> Self {
        Network {
            tensors: BTreeMap::new(),
            owners: BTreeMap::new(),
            consumed: BTreeSet::new(),
            scalar: ONE,
            stats: ContractionStats::default(),
        }
    }

    /// Adds tensor `id`; an index may be carried by at most two tensors.
    pub fn add_tensor(&mut self, id: usize, t: Tensor) -> Result<()> {
        if self.tensors.contains_key(&id) {
            return Err(Error::InvalidArgument(format!("tensor {id} already present")));
        }
        for i in t.distinct() {
            let o = self.owners.entry(i).or_default();
            let doubled = t.indices.iter().filter(|&&x| x == i).count() == 2;
            if o.len() >= 2 || (doubled && !o.is_empty()) {
                return Err(Error::InvalidArgument(format!("index {i} carried by more than two tensors")));
            }
            o.push(id);
        }
        self.stats.max_rank = self.stats.max_rank.max(t.rank());
        self.tensors.insert(id, t);
        Ok(())
    }

    pub fn tensors(&self) -> &BTreeMap<usize, Tensor> {
        &self.tensors
    }

    pub fn stats(&self) -> ContractionStats {
        self.stats
    }

    pub fn is_consumed(&self, index: usize) -> bool {
        self.consumed.contains(&index)
    }

    /// Indices carried by exactly one tensor once.
    pub fn open_indices(&self) -> Vec<usize> {
        self.owners
            .iter()
            .filter(|(i, o)| o.len() == 1 && self.tensors[&o[0]].indices.iter().filter(|x| x == i).count() == 1)
            .map(|(&i, _)| i)
            .collect()
    }

    /// Tensors as nodes and indices as edges. Self-edges are left out.
    pub fn net_graph(&self) -> NetGraph {
        let mut g = NetGraph::new();
        for &t in self.tensors.keys() {
            g.add_node(t);
        }
        for (&i, o) in &self.owners {
            if o.len() == 2 {
                g.add_edge(i, o[0], o[1]);
            }
        }
        g
    }

    /// Fixes `index` to `value` in the tensors carrying it; the index counts
    /// as consumed afterwards.
    pub fn slice(&mut self, index: usize, value: bool) -> Result<()> {
        let owners = self.owners.remove(&index).ok_or(Error::DanglingIndex(index))?;
        for t in owners {
            let fixed = self.tensors[&t].fix(index, value);
            self.tensors.insert(t, fixed);
        }
        self.consumed.insert(index);
        Ok(())
    }

    /// Contracts the two tensors joined by `index` over all their shared
    /// indices, or traces a self-edge. Already consumed indices are a no-op.
    pub fn contract_edge(&mut self, index: usize) -> Result<()> {
        if self.consumed.contains(&index) {
            return Ok(());
        }
        let owners = self.owners.get(&index).ok_or(Error::DanglingIndex(index))?.clone();
        match owners[..] {
            [t] => {
                let tensor = &self.tensors[&t];
                if tensor.indices.iter().filter(|&&x| x == index).count() != 2 {
                    return Err(Error::DanglingIndex(index));
                }
                self.stats.cost += 1u128 << tensor.distinct().len();
                let traced = tensor.trace_repeated();
                for i in tensor.distinct().difference(&traced.distinct()) {
                    self.owners.remove(i);
                    self.consumed.insert(*i);
                }
                self.tensors.insert(t, traced);
            }
            [a, b] => {
                let (a, b) = (a.min(b), a.max(b));
                let ta = self.tensors.remove(&a).unwrap();
                let tb = self.tensors.remove(&b).unwrap();
                let (da, db) = (ta.distinct(), tb.distinct());
                self.stats.cost += 1u128 << da.union(&db).count();
                for i in da.intersection(&db) {
                    self.owners.remove(i);
                    self.consumed.insert(*i);
                }
                for i in db.difference(&da) {
                    for o in self.owners.get_mut(i).unwrap() {
                        if *o == b {
                            *o = a;
                        }
                    }
                }
                let t = ta.contract(&tb).trace_repeated();
                self.stats.max_rank = self.stats.max_rank.max(t.rank());
                self.tensors.insert(a, t);
            }
            _ => return Err(Error::DanglingIndex(index)),
        }
        Ok(())
    }

    /// Product of the remaining rank-0 tensors in id order, without the
    /// global scalar. Fails if any tensor still has indices.
    pub fn remaining_product(&self) -> Result<Complex64> {
        let mut v = ONE;
        for (id, t) in &self.tensors {
            if t.rank() != 0 {
                return Err(Error::InvalidPlan(format!("tensor {id} keeps rank {} after the order", t.rank())));
            }
            v *= t.data[0];
        }
        Ok(v)
    }
}

/// Hadamard `[[1, 1], [1, -1]] / sqrt(2)`.
fn h_entry(s: usize, t: usize) -> f64 {
    if s & t == 1 {
        -FRAC_1_SQRT_2
    } else {
        FRAC_1_SQRT_2
    }
}

/// Network of a closed graph-like diagram. Node `v` becomes tensor `v`, a
/// diagonal carrying its form; edge `k` of [`ClosedGraphLike::edges`] becomes
/// index `k`, and the Hadamard on it is absorbed by the lower endpoint.
pub fn hybrid_to_network(g: &ClosedGraphLike) -> Network {
    let edges = g.edges();
    let mut incident: BTreeMap<usize, Vec<(usize, bool)>> = g.nodes().map(|v| (v.0, Vec::new())).collect();
    for (k, (u, v)) in edges.iter().enumerate() {
        incident.get_mut(&u.0).unwrap().push((k, true));
        incident.get_mut(&v.0).unwrap().push((k, false));
    }
    let mut net = Network::new();
    net.scalar = g.scalar;
    for (v, f) in g.forms() {
        let legs = &incident[&v.0];
        let d = legs.len();
        let data = (0..1usize << d)
            .map(|bits| {
                let mut total = ZERO;
                for s in 0..2 {
                    let mut w = f.0[s];
                    for (j, &(_, absorbs)) in legs.iter().enumerate() {
                        let b = (bits >> (d - 1 - j)) & 1;
                        if absorbs {
                            w *= h_entry(s, b);
                        } else if b != s {
                            w = ZERO;
                            break;
                        }
                    }
                    total += w;
                }
                total
            })
            .collect();
        let t = Tensor::new(legs.iter().map(|&(k, _)| k).collect(), data).expect("consistent rank");
        net.add_tensor(v.0, t).expect("fresh tensor ids");
    }
    net
}

/// Gate-by-gate network of `<x|C|0...0>`: a `|0>` vector per qubit, one
/// tensor per gate with axes `(outputs, inputs)`, and a `<x_q|` effect per
/// qubit. Tensor ids follow creation order; index ids number wire segments.
pub fn circuit_to_network(c: &Circuit, x: &[bool]) -> Result<Network> {
    if x.len() != c.num_qubits {
        return Err(Error::BitstringLength { got: x.len(), expected: c.num_qubits });
    }
    let mut net = Network::new();
    let mut next_tensor = 0;
    let mut next_index = 0;
    let mut wire: Vec<usize> = Vec::with_capacity(c.num_qubits);
    let mut add = |net: &mut Network, t: Tensor| {
        net.add_tensor(next_tensor, t).expect("fresh ids");
        next_tensor += 1;
    };
    for _ in 0..c.num_qubits {
        wire.push(next_index);
        add(&mut net, Tensor::new(vec![next_index], vec![ONE, ZERO])?);
        next_index += 1;
    }
    for g in &c.gates {
        let inputs: Vec<usize> = g.qubits.iter().map(|&q| wire[q]).collect();
        let mut idx = Vec::new();
        for &q in &g.qubits {
            wire[q] = next_index;
            idx.push(next_index);
            next_index += 1;
        }
        idx.extend(inputs);
        add(&mut net, Tensor::new(idx, g.unitary())?);
    }
    for (q, &bit) in x.iter().enumerate() {
        let data = if bit { vec![ZERO, ONE] } else { vec![ONE, ZERO] };
        add(&mut net, Tensor::new(vec![wire[q]], data)?);
    }
    Ok(net)
}

/// Result of running a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Execution {
    pub amplitude: Complex64,
    /// Multiply-adds summed over all slice assignments.
    pub cost: u128,
    pub max_rank: usize,
}

/// Contraction of one slice assignment: bit `j` of `assignment` (most
/// significant first) fixes `plan.slices[j]`. Returns the subtask value
/// without the global scalar.
pub fn run_subtask(net: &Network, plan: &ContractionPlan, assignment: u64) -> Result<(Complex64, ContractionStats)> {
    let k = plan.slices.len();
    let mut n = net.clone();
    n.stats = ContractionStats::default();
    for (j, &s) in plan.slices.iter().enumerate() {
        n.slice(s, (assignment >> (k - 1 - j)) & 1 == 1)
            .map_err(|_| Error::InvalidPlan(format!("slice index {s} is not a live index")))?;
    }
    n.stats.max_rank = n.tensors.values().map(|t| t.rank()).max().unwrap_or(0);
    for &e in &plan.order {
        n.contract_edge(e).map_err(|_| Error::InvalidPlan(format!("order entry {e} is not a live index")))?;
    }
    Ok((n.remaining_product()?, n.stats))
}

/// Number of subtasks a plan splits into.
pub fn num_subtasks(plan: &ContractionPlan) -> Result<u64> {
    if plan.slices.len() >= 63 {
        return Err(Error::InvalidPlan(format!("{} sliced indices", plan.slices.len())));
    }
    Ok(1u64 << plan.slices.len())
}

/// Combines subtask results in assignment order with a fixed-shape sum.
pub fn combine_subtasks(net: &Network, results: &[(Complex64, ContractionStats)]) -> Execution {
    let values: Vec<Complex64> = results.iter().map(|r| r.0).collect();
    Execution {
        amplitude: pairwise_sum(&values) * net.scalar,
        cost: results.iter().map(|r| r.1.cost).sum(),
        max_rank: results.iter().map(|r| r.1.max_rank).max().unwrap_or(0),
    }
}

/// Runs every slice assignment sequentially.
pub fn execute_plan(net: &Network, plan: &ContractionPlan) -> Result<Execution> {
    let results = (0..num_subtasks(plan)?).map(|a| run_subtask(net, plan, a)).collect::<Result<Vec<_>>>()?;
    Ok(combine_subtasks(net, &results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::oracle::statevector_amplitude;
    use crate::zxgraph::eval_hybrid;
    use crate::{LinearForm, NodeId};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plan(order: Vec<usize>, slices: Vec<usize>) -> ContractionPlan {
        ContractionPlan { order, slices, ..Default::default() }
    }

    #[test]
    fn dot_product_and_trace() {
        let mut n = Network::new();
        n.add_tensor(0, Tensor::new(vec![7], vec![c(1., 0.), c(2., 0.)]).unwrap()).unwrap();
        n.add_tensor(1, Tensor::new(vec![7], vec![c(3., 0.), c(4., 0.)]).unwrap()).unwrap();
        n.contract_edge(7).unwrap();
        assert_eq!(n.remaining_product().unwrap(), c(11., 0.));
        assert_eq!(n.stats().cost, 2);
        n.contract_edge(7).unwrap();
        assert_eq!(n.contract_edge(8), Err(Error::DanglingIndex(8)));

        let mut n = Network::new();
        let m = vec![c(1., 0.), c(2., 0.), c(3., 0.), c(5., 0.)];
        n.add_tensor(0, Tensor::new(vec![4, 4], m).unwrap()).unwrap();
        n.contract_edge(4).unwrap();
        assert_eq!(n.remaining_product().unwrap(), c(6., 0.));
    }

    #[test]
    fn rank3_pair_costs_32() {
        let ones = vec![ONE; 8];
        let mut n = Network::new();
        n.add_tensor(0, Tensor::new(vec![0, 1, 2], ones.clone()).unwrap()).unwrap();
        n.add_tensor(1, Tensor::new(vec![2, 3, 4], ones).unwrap()).unwrap();
        n.contract_edge(2).unwrap();
        assert_eq!(n.stats().cost, 32);
        assert_eq!(n.stats().max_rank, 4);
        assert_eq!(n.open_indices(), vec![0, 1, 3, 4]);
    }

    #[test]
    fn contraction_matches_explicit_sum() {
        let a = Tensor::new(vec![0, 1], (0..4).map(|k| c(k as f64, 1.0)).collect()).unwrap();
        let b = Tensor::new(vec![2, 1, 0], (0..8).map(|k| c(1.0, k as f64)).collect()).unwrap();
        let r = a.contract(&b);
        assert_eq!(r.indices(), &[2]);
        for z in 0..2 {
            let mut want = ZERO;
            for x in 0..2 {
                for y in 0..2 {
                    want += a.data()[x * 2 + y] * b.data()[z * 4 + y * 2 + x];
                }
            }
            assert!((r.data()[z] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn fixing_slices() {
        let t = Tensor::new(vec![3, 5], vec![c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]).unwrap();
        assert_eq!(t.fix(3, true).data(), &[c(3., 0.), c(4., 0.)]);
        assert_eq!(t.fix(5, false).data(), &[c(1., 0.), c(3., 0.)]);
    }

    #[test]
    fn hybrid_examples() {
        let mut g = ClosedGraphLike::new();
        let a = g.add_node(LinearForm::PLUS);
        let b = g.add_node(LinearForm::PLUS);
        g.add_edge(a, b).unwrap();
        let net = hybrid_to_network(&g);
        let e = execute_plan(&net, &plan(vec![0], vec![])).unwrap();
        assert!((e.amplitude - c(core::f64::consts::SQRT_2, 0.)).norm() < 1e-12);

        let mut g = ClosedGraphLike::new();
        g.add_node(LinearForm([ONE, -ONE]));
        let e = execute_plan(&hybrid_to_network(&g), &plan(vec![], vec![])).unwrap();
        assert_eq!(e.amplitude, ZERO);
    }

    #[test]
    fn hybrid_triangle_matches_oracle_with_slicing() {
        let mut g = ClosedGraphLike::new();
        let ids: Vec<NodeId> = (0..4).map(|i| g.add_node(LinearForm::from_phase(0.4 * i as f64 + 0.1))).collect();
        for (x, y) in [(0, 1), (1, 2), (0, 2), (2, 3)] {
            g.add_edge(ids[x], ids[y]).unwrap();
        }
        g.scalar = c(0.5, -0.25);
        let want = eval_hybrid(&g).unwrap();
        let net = hybrid_to_network(&g);
        let full = execute_plan(&net, &plan(vec![0, 1, 2, 3], vec![])).unwrap();
        let sliced = execute_plan(&net, &plan(vec![0, 1, 2, 3], vec![1, 3])).unwrap();
        assert!((full.amplitude - want).norm() < 1e-12);
        assert!((sliced.amplitude - want).norm() < 1e-12);
        assert_eq!(
            execute_plan(&net, &plan(vec![0, 1], vec![])).unwrap_err(),
            Error::InvalidPlan("tensor 0 keeps rank 1 after the order".into())
        );
        assert!(execute_plan(&net, &plan(vec![9], vec![])).is_err());
    }

    #[test]
    fn standard_network_matches_statevector() {
        let circ = Circuit::new(
            3,
            vec![Gate::h(0), Gate::cnot(0, 1), Gate::fsim(1, 2, 0.7, 0.3), Gate::sqrt_w(2), Gate::cz(2, 0)],
        )
        .unwrap();
        for bits in 0..8 {
            let x: Vec<bool> = (0..3).map(|q| (bits >> (2 - q)) & 1 == 1).collect();
            let net = circuit_to_network(&circ, &x).unwrap();
            let order: Vec<usize> = net.net_graph().edges().keys().copied().collect();
            let got = execute_plan(&net, &plan(order, vec![])).unwrap().amplitude;
            let want = statevector_amplitude(&circ, &x).unwrap();
            assert!((got - want).norm() < 1e-12);
        }
    }
}
