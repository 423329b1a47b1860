//! Seeded generators and brute-force references shared by the integration
//! tests of both crates.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zxcontract_core::circuit::{Circuit, Gate};
use zxcontract_core::engine::{execute_plan, hybrid_to_network, Network};
use zxcontract_core::orderfinder::find_order;
use zxcontract_core::twtools::{ExpansionLimit, SearchBudget, SimpleGraph};
use zxcontract_core::{ClosedGraphLike, Complex64, LinearForm, NodeId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_complex(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Random hybrid diagram with 1..=max_nodes nodes. Half of the nodes carry
/// phase forms, the rest arbitrary complex forms.
pub fn random_hybrid(seed: u64, max_nodes: usize) -> ClosedGraphLike {
    random_hybrid_with_density(seed, max_nodes, 0.15, 0.75)
}

/// Sparser variant whose networks stay cheap to contract.
pub fn random_sparse_hybrid(seed: u64, max_nodes: usize) -> ClosedGraphLike {
    random_hybrid_with_density(seed, max_nodes, 0.1, 0.35)
}

fn random_hybrid_with_density(seed: u64, max_nodes: usize, lo: f64, hi: f64) -> ClosedGraphLike {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_nodes);
    let p = r.gen_range(lo..hi);
    let mut g = ClosedGraphLike::new();
    let ids: Vec<NodeId> = (0..n)
        .map(|_| {
            let form = if r.gen_bool(0.5) {
                LinearForm::from_phase(r.gen_range(-4.0..4.0))
            } else {
                LinearForm([unit_complex(&mut r), unit_complex(&mut r)])
            };
            g.add_node(form)
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_bool(p) {
                g.add_edge(ids[i], ids[j]).unwrap();
            }
        }
    }
    g.scalar = unit_complex(&mut r);
    g
}

/// Random circuit over the full gate set.
pub fn random_circuit(seed: u64, max_qubits: usize, max_gates: usize) -> Circuit {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_qubits);
    let m = r.gen_range(1..=max_gates);
    let mut gates = Vec::with_capacity(m);
    for _ in 0..m {
        let a = r.gen_range(0..n);
        let pick = if n == 1 { r.gen_range(0..6) } else { r.gen_range(0..9) };
        let mut other = || {
            let mut b = r.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            b
        };
        let g = match pick {
            0 => Gate::h(a),
            1 => Gate::sqrt_x(a),
            2 => Gate::sqrt_y(a),
            3 => Gate::sqrt_w(a),
            4 => Gate::rz(a, 0.0),
            5 => Gate::rx(a, 0.0),
            6 => Gate::cnot(a, other()),
            7 => Gate::cz(a, other()),
            _ => Gate::fsim(a, other(), 0.0, 0.0),
        };
        let g = match g.kind.num_params() {
            0 => g,
            1 => Gate { params: vec![r.gen_range(-3.2..3.2)], ..g },
            _ => Gate { params: vec![r.gen_range(-3.2..3.2), r.gen_range(-3.2..3.2)], ..g },
        };
        gates.push(g);
    }
    Circuit::new(n, gates).unwrap()
}

pub fn random_bits(seed: u64, n: usize) -> Vec<bool> {
    let mut r = rng(seed ^ 0xb175);
    (0..n).map(|_| r.gen_bool(0.5)).collect()
}

pub fn random_simple_graph(seed: u64, max_vertices: usize) -> SimpleGraph {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_vertices);
    let p = r.gen_range(0.1..0.9);
    let mut g = SimpleGraph::new();
    for v in 0..n {
        g.add_vertex(v);
    }
    for a in 0..n {
        for b in a + 1..n {
            if r.gen_bool(p) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Exact treewidth by dynamic programming over eliminated sets.
pub fn brute_force_treewidth(g: &SimpleGraph) -> usize {
    let vs: Vec<usize> = g.vertices().collect();
    let n = vs.len();
    assert!(n <= 16);
    if n == 0 {
        return 0;
    }
    let idx = |v: usize| vs.iter().position(|&w| w == v).unwrap();
    let adj: Vec<u32> = vs.iter().map(|&v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << idx(w))).collect();
    // q(s, v): vertices outside s ∪ {v} reachable from v through s
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut stack = vec![v];
        let mut out = 0u32;
        while let Some(x) = stack.pop() {
            let mut nb = adj[x] & !seen;
            while nb != 0 {
                let y = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                seen |= 1 << y;
                if s >> y & 1 == 1 {
                    stack.push(y);
                } else {
                    out |= 1 << y;
                }
            }
        }
        out.count_ones()
    };
    let full = (1u32 << n) - 1;
    let mut tw = vec![u32::MAX; 1 << n];
    tw[0] = 0;
    for s in 1..=full {
        let mut best = u32::MAX;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1 << v);
            best = best.min(tw[prev as usize].max(q(prev, v)));
        }
        tw[s as usize] = best;
    }
    tw[full as usize] as usize
}

pub fn small_budget() -> Box<dyn SearchBudget> {
    Box::new(ExpansionLimit::new(200))
}

/// Largest tensor rank the test contractions may materialize.
pub const TEST_TARGET_RANK: usize = 20;

/// Value of a network, contracted along a freshly found plan.
pub fn contract_value(net: &Network, seed: u64) -> Complex64 {
    let plan = find_order(&net.net_graph(), seed, TEST_TARGET_RANK, &small_budget).unwrap();
    execute_plan(net, &plan).unwrap().amplitude
}

pub fn hybrid_value_by_contraction(g: &ClosedGraphLike) -> Complex64 {
    contract_value(&hybrid_to_network(g), 0)
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

pub fn node_subset(seed: u64, of: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    let mut r = rng(seed);
    of.iter().copied().filter(|_| r.gen_bool(0.5)).collect()
}
