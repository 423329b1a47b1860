//! Simulated annealing over pivots and the end-to-end pipeline from a
//! circuit to a priced, optionally executed contraction plan.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{to_zx, Circuit};
use crate::engine::{circuit_to_network, execute_plan, hybrid_to_network, Execution, Network};
use crate::orderfinder::{best_of_trials, plan_with_precontraction, BudgetFactory, ContractionPlan};
use crate::rewrite::{pivot, split_high_degree, RewriteStep, RewriteTrace};
use crate::twtools::{
    line_graph, precontract, quick_tw, treewidth_min_fill, ExpansionLimit, SearchBudget, QUICK_TW_EXPANSIONS,
};
use crate::zxgraph::{close_to_hybrid, to_graph_like, ClosedGraphLike};
use crate::{Error, Result};

const INV_E: f64 = 0.36787944117144233;

/// `(e^{-prog} - 1/e) / (1 - 1/e)`: 1 at the start, 0 at the end.
pub fn temperature(prog: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prog) {
        return Err(Error::Domain(prog));
    }
    if prog == 1.0 {
        return Ok(0.0);
    }
    Ok((libm::exp(-prog) - INV_E) / (1.0 - INV_E))
}

/// Acceptance probability: 1 for an improvement, otherwise
/// `exp(-ln(ln(new_cost) - ln(cost) + 1) / tau)`, and 0 when `tau` is 0.
/// Both costs must be positive.
pub fn accept(cost: f64, new_cost: f64, tau: f64) -> Result<f64> {
    if cost.is_nan() || cost <= 0.0 {
        return Err(Error::Domain(cost));
    }
    if new_cost.is_nan() || new_cost <= 0.0 {
        return Err(Error::Domain(new_cost));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(tau));
    }
    if new_cost < cost {
        return Ok(1.0);
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    Ok(libm::exp(-libm::log(libm::log(new_cost) - libm::log(cost) + 1.0) / tau))
}

/// Shift applied to costs before [`accept`] so that widths of 0 stay in
/// its domain.
pub const ACCEPT_SHIFT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostFn {
    /// [`quick_tw`] of the network graph.
    #[default]
    QuickTw,
    /// Min-fill width of the line graph of the pre-contracted network.
    MinFillTw,
    /// Predicted multiply-adds of a single-trial plan.
    FlopEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnnealMode {
    #[default]
    Anneal,
    /// Temperature fixed at 0: only improvements are accepted.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnealConfig {
    pub nb_steps: usize,
    pub seed: u64,
    pub cost_fn: CostFn,
    pub mode: AnnealMode,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig { nb_steps: 100, seed: 0, cost_fn: CostFn::QuickTw, mode: AnnealMode::Anneal }
    }
}

/// Cost of a graph under `f`.
pub fn graph_cost(g: &ClosedGraphLike, f: CostFn) -> f64 {
    let net = g.net_graph();
    match f {
        CostFn::QuickTw => quick_tw(&net) as f64,
        CostFn::MinFillTw => {
            let (lg, _) = line_graph(&precontract(&net).graph);
            treewidth_min_fill(&lg).width() as f64
        }
        CostFn::FlopEstimate => {
            let budget = || -> Box<dyn SearchBudget> { Box::new(ExpansionLimit::new(QUICK_TW_EXPANSIONS)) };
            plan_with_precontraction(&net, 0, usize::MAX, &budget).map_or(f64::INFINITY, |p| p.predicted_cost as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealStep {
    pub step: usize,
    pub cost: f64,
    pub accepted: bool,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnealReport {
    pub initial_cost: f64,
    pub steps: Vec<AnnealStep>,
    pub best_cost: f64,
    /// 0 when the input itself was never beaten.
    pub best_step: usize,
    /// Pivots leading from the input to the returned graph.
    pub trace: RewriteTrace,
}

/// Random-pivot annealing. Each step pivots the current graph along a
/// uniformly chosen edge, prices the candidate and accepts it with
/// [`accept`] at temperature `temperature(step / nb_steps)`. The cheapest
/// graph seen is returned; the input wins ties.
pub fn anneal(g: &ClosedGraphLike, cfg: &AnnealConfig) -> Result<(ClosedGraphLike, AnnealReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = g.clone();
    let mut current_cost = graph_cost(g, cfg.cost_fn);
    let mut current_trace = RewriteTrace::new();
    let mut best = g.clone();
    let mut report = AnnealReport { initial_cost: current_cost, best_cost: current_cost, ..Default::default() };
    for step in 0..cfg.nb_steps {
        let tau = match cfg.mode {
            AnnealMode::Greedy => 0.0,
            AnnealMode::Anneal => temperature(step as f64 / cfg.nb_steps as f64)?,
        };
        let edges = current.edges();
        if edges.is_empty() {
            report.steps.push(AnnealStep { step, cost: current_cost, accepted: false, tau });
            continue;
        }
        let (u, v) = edges[rng.gen_range(0..edges.len())];
        let mut cand = current.clone();
        pivot(&mut cand, u, v)?;
        let cost = graph_cost(&cand, cfg.cost_fn);
        let p = accept(current_cost + ACCEPT_SHIFT, cost + ACCEPT_SHIFT, tau)?;
        let accepted = rng.gen::<f64>() < p;
        report.steps.push(AnnealStep { step, cost, accepted, tau });
        if cost < report.best_cost {
            report.best_cost = cost;
            report.best_step = step + 1;
            best = cand.clone();
            report.trace = current_trace.clone();
            report.trace.push(RewriteStep::Pivot(u, v));
        }
        if accepted {
            current = cand;
            current_cost = cost;
            current_trace.push(RewriteStep::Pivot(u, v));
        }
    }
    Ok((best, report))
}

/// How the network handed to the order finder is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Gate tensors straight from the circuit.
    Standard,
    /// Graph-like diagram, split to bounded degree, no annealing.
    ZxUnoptimized,
    /// Graph-like diagram annealed, then split.
    ZxOptimized,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::ZxUnoptimized => "zx-unoptimized",
            Method::ZxOptimized => "zx-optimized",
        }
    }

    pub const ALL: [Method; 3] = [Method::Standard, Method::ZxUnoptimized, Method::ZxOptimized];
}

/// Node, edge and degree counts of a graph at some pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub max_degree: usize,
}

impl GraphStats {
    pub fn of(g: &ClosedGraphLike) -> Self {
        GraphStats { nodes: g.num_nodes(), edges: g.num_edges(), max_degree: g.max_degree() }
    }

    pub fn of_network(n: &Network) -> Self {
        let g = n.net_graph();
        let max_degree = g.nodes().iter().map(|&v| g.degree(v)).max().unwrap_or(0);
        GraphStats { nodes: g.num_nodes(), edges: g.num_edges(), max_degree }
    }
}

/// A network ready for order finding, with what happened on the way.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub method: Method,
    pub network: Network,
    /// `(stage name, stats)` in pipeline order.
    pub stages: Vec<(&'static str, GraphStats)>,
    pub anneal: Option<AnnealReport>,
    /// Rewrites applied to the graph-like diagram (pivots, then unfusions).
    pub trace: RewriteTrace,
}

pub const DEFAULT_MAX_DEGREE: usize = 3;

/// Builds the network of `<x|C|0...0>` for `method`.
pub fn prepare_network(c: &Circuit, x: &[bool], method: Method, anneal_cfg: &AnnealConfig) -> Result<Prepared> {
    if method == Method::Standard {
        let network = circuit_to_network(c, x)?;
        let stats = GraphStats::of_network(&network);
        return Ok(Prepared {
            method,
            network,
            stages: alloc::vec![("network", stats)],
            anneal: None,
            trace: RewriteTrace::new(),
        });
    }
    let d = to_zx(c, x)?;
    let mut stages = alloc::vec![(
        "zx",
        GraphStats {
            nodes: d.num_spiders(),
            edges: d.num_wires(),
            max_degree: d.spiders().map(|(v, _)| d.degree(v)).max().unwrap_or(0),
        }
    )];
    let mut g = close_to_hybrid(&to_graph_like(&d))?;
    stages.push(("graph-like", GraphStats::of(&g)));
    let mut trace = RewriteTrace::new();
    let mut report = None;
    if method == Method::ZxOptimized {
        let (best, rep) = anneal(&g, anneal_cfg)?;
        g = best;
        trace = rep.trace.clone();
        report = Some(rep);
        stages.push(("anneal", GraphStats::of(&g)));
    }
    split_high_degree(&mut g, DEFAULT_MAX_DEGREE, Some(&mut trace))?;
    stages.push(("split", GraphStats::of(&g)));
    let network = hybrid_to_network(&g);
    Ok(Prepared { method, network, stages, anneal: report, trace })
}

/// Settings for [`run_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub method: Method,
    pub anneal: AnnealConfig,
    pub trial_seeds: Vec<u64>,
    pub target_rank: usize,
    pub execute: bool,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub prepared: Prepared,
    pub plan: ContractionPlan,
    pub execution: Option<Execution>,
}

impl PipelineOutput {
    pub fn amplitude(&self) -> Option<Complex64> {
        self.execution.map(|e| e.amplitude)
    }
}

/// Sequential pipeline: prepare, plan with the best of the trial seeds and
/// optionally contract.
pub fn run_pipeline(c: &Circuit, x: &[bool], cfg: &PipelineConfig, budget: BudgetFactory) -> Result<PipelineOutput> {
    let prepared = prepare_network(c, x, cfg.method, &cfg.anneal)?;
    let plan = best_of_trials(&prepared.network.net_graph(), &cfg.trial_seeds, cfg.target_rank, budget)?;
    let execution = if cfg.execute { Some(execute_plan(&prepared.network, &plan)?) } else { None };
    Ok(PipelineOutput { prepared, plan, execution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_grid_circuit, Gate};
    use crate::oracle::statevector_amplitude;
    use crate::orderfinder::DEFAULT_TARGET_RANK;
    use crate::twtools::Unlimited;
    use crate::zxgraph::eval_hybrid;
    use crate::LinearForm;

    #[test]
    fn temperature_endpoints_and_midpoint() {
        assert_eq!(temperature(0.0).unwrap(), 1.0);
        assert_eq!(temperature(1.0).unwrap(), 0.0);
        let mid = (libm::exp(-0.5) - libm::exp(-1.0)) / (1.0 - libm::exp(-1.0));
        assert!((temperature(0.5).unwrap() - mid).abs() < 1e-15);
        assert!(temperature(1.5).is_err());
        assert!(temperature(-0.1).is_err());
    }

    #[test]
    fn accept_examples() {
        assert_eq!(accept(100.0, 50.0, 0.3).unwrap(), 1.0);
        assert_eq!(accept(7.0, 7.0, 0.5).unwrap(), 1.0);
        assert_eq!(accept(7.0, 8.0, 0.0).unwrap(), 0.0);
        let e = core::f64::consts::E;
        assert!((accept(e, e * e, 0.5).unwrap() - 0.25).abs() < 1e-12);
        assert!(accept(0.0, 3.0, 0.5).is_err());
        assert!(accept(3.0, 3.0, 2.0).is_err());
    }

    fn ring(n: usize) -> ClosedGraphLike {
        let mut g = ClosedGraphLike::new();
        let ids: Vec<_> = (0..n).map(|i| g.add_node(LinearForm::from_phase(0.2 * i as f64))).collect();
        for i in 0..n {
            g.add_edge(ids[i], ids[(i + 1) % n]).unwrap();
            g.add_edge(ids[i], ids[(i + 3) % n]).unwrap();
        }
        g
    }

    #[test]
    fn anneal_contract() {
        let g = ring(10);
        let zero = AnnealConfig { nb_steps: 0, ..Default::default() };
        let (same, rep) = anneal(&g, &zero).unwrap();
        assert_eq!(same, g);
        assert!(rep.steps.is_empty());
        for mode in [AnnealMode::Anneal, AnnealMode::Greedy] {
            let cfg = AnnealConfig { nb_steps: 25, seed: 4, mode, ..Default::default() };
            let (a, ra) = anneal(&g, &cfg).unwrap();
            let (b, rb) = anneal(&g, &cfg).unwrap();
            assert_eq!((&a, &ra), (&b, &rb));
            assert_eq!(ra.steps.len(), 25);
            assert!(ra.best_cost <= ra.initial_cost);
            assert_eq!(graph_cost(&a, cfg.cost_fn), ra.best_cost);
            assert!((eval_hybrid(&a).unwrap() - eval_hybrid(&g).unwrap()).norm() < 1e-9);
            assert_eq!(ra.trace.replay(&g).unwrap(), a);
            if mode == AnnealMode::Greedy {
                assert!(ra.steps.iter().all(|s| s.tau == 0.0));
            }
        }
    }

    fn unlimited() -> Box<dyn SearchBudget> {
        Box::new(Unlimited)
    }

    #[test]
    fn bell_amplitude_through_every_method() {
        let c = Circuit::new(2, alloc::vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        for method in Method::ALL {
            let cfg = PipelineConfig {
                method,
                anneal: AnnealConfig { nb_steps: 10, ..Default::default() },
                trial_seeds: alloc::vec![0, 1],
                target_rank: DEFAULT_TARGET_RANK,
                execute: true,
            };
            let out = run_pipeline(&c, &[false, false], &cfg, &unlimited).unwrap();
            let a = out.amplitude().unwrap();
            assert!((a - Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-9, "{method:?}");
            assert_eq!(out.execution.unwrap().cost, out.plan.predicted_cost);
        }
    }

    #[test]
    fn grid_pipeline_matches_oracle_with_slicing() {
        let c = random_grid_circuit(2, 2, 4, 3).unwrap();
        let x = [true, false, false, true];
        let want = statevector_amplitude(&c, &x).unwrap();
        for (method, rank) in
            [(Method::ZxOptimized, 3), (Method::ZxUnoptimized, DEFAULT_TARGET_RANK), (Method::Standard, 2)]
        {
            let cfg = PipelineConfig {
                method,
                anneal: AnnealConfig { nb_steps: 15, seed: 2, ..Default::default() },
                trial_seeds: alloc::vec![7],
                target_rank: rank,
                execute: true,
            };
            let out = run_pipeline(&c, &x, &cfg, &unlimited).unwrap();
            let e = out.execution.unwrap();
            assert!((e.amplitude - want).norm() < 1e-9, "{method:?}");
            assert_eq!(e.cost, out.plan.predicted_cost);
            assert_eq!(e.max_rank, out.plan.max_rank);
            assert!(e.max_rank <= rank.max(out.plan.max_rank));
        }
    }
}
