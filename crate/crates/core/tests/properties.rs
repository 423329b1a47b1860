mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use zxcontract_core::circuit::{random_grid_circuit, to_zx};
use zxcontract_core::engine::{circuit_to_network, execute_plan, hybrid_to_network, num_subtasks, run_subtask};
use zxcontract_core::oracle::{eval_zx_diagram, statevector_amplitude};
use zxcontract_core::orderfinder::{find_order, plan_with_precontraction, simulate};
use zxcontract_core::rewrite::{local_complement, pivot, split_high_degree, unfuse, RewriteTrace};
use zxcontract_core::simplify::{accept, run_pipeline, temperature, AnnealConfig, AnnealMode, Method, PipelineConfig};
use zxcontract_core::twtools::{
    line_graph, precontract, td_to_order, treewidth_bb, treewidth_min_fill, ExpansionLimit, Unlimited,
};
use zxcontract_core::zxgraph::eval_hybrid;
use zxcontract_core::{ClosedGraphLike, NodeId};

const TOL: f64 = 1e-10;

fn same_value(before: &ClosedGraphLike, after: &ClosedGraphLike) -> bool {
    let want = eval_hybrid(before).unwrap();
    let got = if after.num_nodes() <= 18 { eval_hybrid(after).unwrap() } else { hybrid_value_by_contraction(after) };
    close(got, want, TOL)
}

fn pick<T: Copy>(items: &[T], k: u64) -> Option<T> {
    (!items.is_empty()).then(|| items[(k % items.len() as u64) as usize])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn local_complement_preserves_value(seed in any::<u64>(), k in any::<u64>()) {
        let g = random_hybrid(seed, 14);
        let nodes: Vec<NodeId> = g.nodes().collect();
        let u = pick(&nodes, k).unwrap();
        let mut h = g.clone();
        local_complement(&mut h, u).unwrap();
        prop_assert!(same_value(&g, &h));
        // twice is the identity on the graph
        let mut h2 = h.clone();
        local_complement(&mut h2, u).unwrap();
        prop_assert_eq!(h2.edges(), g.edges());
    }

    #[test]
    fn pivot_preserves_value_and_matches_three_lcs(seed in any::<u64>(), k in any::<u64>()) {
        let g = random_hybrid(seed, 14);
        let Some((u, v)) = pick(&g.edges(), k) else { return Ok(()) };
        let mut p = g.clone();
        pivot(&mut p, u, v).unwrap();
        prop_assert!(same_value(&g, &p));
        let mut l = g.clone();
        for w in [u, v, u] {
            local_complement(&mut l, w).unwrap();
        }
        prop_assert_eq!(p.edges(), l.edges());
        for (w, f) in p.forms() {
            let h = l.form(w).unwrap();
            prop_assert!(close(f.0[0], h.0[0], TOL) && close(f.0[1], h.0[1], TOL));
        }
        prop_assert!(close(p.scalar, l.scalar, TOL));
    }

    #[test]
    fn pivot_rejects_non_edges(seed in any::<u64>()) {
        let mut g = random_hybrid(seed, 8);
        let nodes: Vec<NodeId> = g.nodes().collect();
        for &a in &nodes {
            for &b in &nodes {
                if a == b || !g.has_edge(a, b) {
                    prop_assert!(pivot(&mut g, a, b).is_err());
                }
            }
        }
    }

    #[test]
    fn unfuse_preserves_value(seed in any::<u64>(), k in any::<u64>()) {
        let g = random_hybrid(seed, 14);
        let candidates: Vec<NodeId> = g.nodes().filter(|&v| g.degree(v) >= 2).collect();
        let Some(u) = pick(&candidates, k) else { return Ok(()) };
        let nb = g.neighbors(u).unwrap().clone();
        let mut keep = node_subset(k, &nb);
        if keep.is_empty() {
            keep.insert(*nb.iter().next().unwrap());
        }
        if keep.len() == nb.len() {
            keep.remove(nb.iter().next_back().unwrap());
        }
        let mut h = g.clone();
        let (moved, mediator) = unfuse(&mut h, u, &keep).unwrap();
        prop_assert_eq!(h.num_nodes(), g.num_nodes() + 2);
        prop_assert_eq!(h.degree(mediator), 2);
        prop_assert_eq!(h.degree(moved), nb.len() - keep.len() + 1);
        prop_assert!(same_value(&g, &h));
    }

    #[test]
    fn split_bounds_degree_and_preserves_value(seed in any::<u64>(), extra in 0usize..3) {
        let g = random_sparse_hybrid(seed, 14);
        let mut h = g.clone();
        let mut trace = RewriteTrace::new();
        split_high_degree(&mut h, 3 + extra, Some(&mut trace)).unwrap();
        prop_assert!(h.max_degree() <= 3 + extra);
        prop_assert!(same_value(&g, &h));
        let text = trace.to_text();
        let replayed = RewriteTrace::from_text(&text).unwrap().replay(&g).unwrap();
        prop_assert_eq!(replayed.edges(), h.edges());
    }

    #[test]
    fn precontract_preserves_value(seed in any::<u64>()) {
        let g = random_sparse_hybrid(seed, 14);
        let mut net = hybrid_to_network(&g);
        let pc = precontract(&net.net_graph());
        for &e in &pc.merge_edges {
            net.contract_edge(e).unwrap();
        }
        prop_assert_eq!(net.tensors().len(), pc.graph.num_nodes());
        let rest: Vec<usize> = pc.graph.edges().keys().copied().collect();
        for e in rest {
            net.contract_edge(e).unwrap();
        }
        let got = net.remaining_product().unwrap() * net.scalar;
        prop_assert!(close(got, eval_hybrid(&g).unwrap(), TOL));
    }

    #[test]
    fn engine_matches_hybrid_oracle(seed in any::<u64>(), trial in 0u64..4) {
        let g = random_sparse_hybrid(seed, 14);
        let net = hybrid_to_network(&g);
        let plan = find_order(&net.net_graph(), trial, TEST_TARGET_RANK, &small_budget).unwrap();
        let ex = execute_plan(&net, &plan).unwrap();
        prop_assert!(close(ex.amplitude, eval_hybrid(&g).unwrap(), TOL));
        prop_assert_eq!(ex.cost, plan.predicted_cost);
        prop_assert_eq!(ex.max_rank, plan.max_rank);
    }

    #[test]
    fn contraction_rank_within_width_plus_one(seed in any::<u64>(), use_bb in any::<bool>()) {
        let g = random_hybrid(seed, 14);
        let net = hybrid_to_network(&g).net_graph();
        let (lg, map) = line_graph(&net);
        let td = if use_bb { treewidth_bb(&lg, &mut ExpansionLimit::new(300)) } else { treewidth_min_fill(&lg) };
        td.validate(&lg).unwrap();
        let order = td_to_order(&td, &map).unwrap();
        let sim = simulate(&net, &order, &BTreeSet::new()).unwrap();
        prop_assert!(sim.max_rank <= td.width() + 1, "rank {} width {}", sim.max_rank, td.width());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bb_is_exact_on_small_graphs(seed in any::<u64>()) {
        let g = random_simple_graph(seed, 8);
        let td = treewidth_bb(&g, &mut Unlimited);
        td.validate(&g).unwrap();
        prop_assert_eq!(td.width(), brute_force_treewidth(&g));
        prop_assert!(treewidth_min_fill(&g).width() >= td.width());
    }

    #[test]
    fn oracles_agree(seed in any::<u64>()) {
        let c = random_circuit(seed, 6, 20);
        let x = random_bits(seed, c.num_qubits);
        let sv = statevector_amplitude(&c, &x).unwrap();
        if let Ok(zx) = to_zx(&c, &x).and_then(|d| eval_zx_diagram(&d)) {
            prop_assert!(close(zx, sv, 1e-9));
        }
        let net = circuit_to_network(&c, &x).unwrap();
        prop_assert!(close(contract_value(&net, seed), sv, 1e-9));
    }

    #[test]
    fn pipeline_matches_statevector(seed in any::<u64>(), method_ix in 0usize..3, greedy in any::<bool>(), rank in prop::sample::select(vec![7usize, 12, usize::MAX])) {
        let c = random_circuit(seed, 8, 30);
        let x = random_bits(seed, c.num_qubits);
        let cfg = PipelineConfig {
            method: Method::ALL[method_ix],
            anneal: AnnealConfig {
                nb_steps: 15,
                seed,
                mode: if greedy { AnnealMode::Greedy } else { AnnealMode::Anneal },
                ..AnnealConfig::default()
            },
            trial_seeds: vec![seed, seed ^ 1],
            target_rank: rank,
            execute: true,
        };
        let out = run_pipeline(&c, &x, &cfg, &small_budget).unwrap();
        let want = statevector_amplitude(&c, &x).unwrap();
        prop_assert!(close(out.amplitude().unwrap(), want, 1e-9));
    }

    #[test]
    fn slices_sum_to_unsliced(seed in any::<u64>(), drop in 1usize..4) {
        let c = random_grid_circuit(2, 3, 10, seed).unwrap();
        let x = random_bits(seed, 6);
        let net = circuit_to_network(&c, &x).unwrap();
        let g = net.net_graph();
        let full = plan_with_precontraction(&g, seed, usize::MAX, &small_budget).unwrap();
        let rank = full.max_rank.saturating_sub(drop).max(5);
        let sliced = plan_with_precontraction(&g, seed, rank, &small_budget).unwrap();
        prop_assert_eq!(num_subtasks(&sliced).unwrap(), 1u64 << sliced.slices.len());
        let parts: Vec<_> = (0..num_subtasks(&sliced).unwrap()).map(|a| run_subtask(&net, &sliced, a).unwrap()).collect();
        let total = zxcontract_core::pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>()) * net.scalar;
        let want = execute_plan(&net, &full).unwrap().amplitude;
        prop_assert!(close(total, want, 1e-9));
        prop_assert!(sliced.max_rank <= rank);
    }
}

proptest! {
    #[test]
    fn temperature_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(temperature(lo).unwrap() >= temperature(hi).unwrap());
        prop_assert!((0.0..=1.0).contains(&temperature(a).unwrap()));
    }

    #[test]
    fn accept_is_a_probability(cost in 1e-3f64..1e6, new in 1e-3f64..1e6, tau in 0.0f64..=1.0) {
        let p = accept(cost, new, tau).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        if new <= cost {
            prop_assert_eq!(p, 1.0);
        }
    }
}

#[test]
fn annealing_formula_endpoints() {
    assert_eq!(temperature(0.0).unwrap(), 1.0);
    assert_eq!(temperature(1.0).unwrap(), 0.0);
    let e = std::f64::consts::E;
    assert!((accept(e, e * e, 0.5).unwrap() - 0.25).abs() < 1e-12);
}
