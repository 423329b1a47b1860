//! Community-based contraction orders with index slicing.
//!
//! The network is split into Louvain communities; each community is ordered
//! from a tree decomposition of its line graph, then the metagraph of
//! communities is ordered the same way. Slicing then fixes the indices that
//! appear most often in the largest intermediate tensors.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::twtools::{line_graph, precontract, td_to_order, treewidth_bb, NetGraph, SearchBudget};
use crate::{Error, Result};

/// Where an order entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Stage {
    #[default]
    Precontract,
    Community,
    Metagraph,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Precontract => "precontract",
            Stage::Community => "community",
            Stage::Metagraph => "metagraph",
        }
    }
}

/// Default bound on intermediate tensor rank before slicing kicks in.
pub const DEFAULT_TARGET_RANK: usize = 26;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContractionPlan {
    /// Network edge (index) ids in contraction order.
    pub order: Vec<usize>,
    /// Stage of each order entry.
    pub stages: Vec<Stage>,
    /// Sliced index ids, in the order they were chosen.
    pub slices: Vec<usize>,
    /// Multiply-adds over all `2^|slices|` subtasks.
    pub predicted_cost: u128,
    /// Largest tensor rank in one subtask, initial tensors included.
    pub max_rank: usize,
    /// Multiply-adds of each order entry within one subtask.
    pub step_costs: Vec<u128>,
    /// Network node -> community id (smallest node of the community).
    pub community_partition: BTreeMap<usize, usize>,
    /// Seed of the trial that produced the plan.
    pub seed: u64,
}

impl ContractionPlan {
    /// Per-subtask cost summed by stage.
    pub fn stage_costs(&self) -> BTreeMap<Stage, u128> {
        let mut out = BTreeMap::new();
        for (s, c) in self.stages.iter().zip(&self.step_costs) {
            *out.entry(*s).or_insert(0) += c;
        }
        out
    }

    /// Deterministic text dump.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "predicted_cost {}", self.predicted_cost);
        let _ = writeln!(s, "max_rank {}", self.max_rank);
        let _ = write!(s, "slices");
        for i in &self.slices {
            let _ = write!(s, " {i}");
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "order {}", self.order.len());
        for ((e, st), c) in self.order.iter().zip(&self.stages).zip(&self.step_costs) {
            let _ = writeln!(s, "{e} {} {c}", st.name());
        }
        let _ = writeln!(s, "communities {}", self.community_partition.len());
        for (v, c) in &self.community_partition {
            let _ = writeln!(s, "{v} {c}");
        }
        s
    }
}

/// Outcome of a symbolic contraction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Simulation {
    pub cost: u128,
    pub max_rank: usize,
    pub step_costs: Vec<u128>,
    /// Index sets of every tensor (initial or intermediate) of rank `max_rank`.
    pub largest: Vec<BTreeSet<usize>>,
}

/// Replays `order` on index sets only. Sliced indices are removed up front;
/// an entry that is sliced or already consumed costs nothing; contracting
/// tensors `A`, `B` costs `2^|A ∪ B|` and leaves `A Δ B`.
pub fn simulate(net: &NetGraph, order: &[usize], slices: &BTreeSet<usize>) -> Result<Simulation> {
    let mut rep: BTreeMap<usize, usize> = net.nodes().iter().map(|&v| (v, v)).collect();
    fn find(rep: &mut BTreeMap<usize, usize>, v: usize) -> usize {
        let mut r = v;
        while rep[&r] != r {
            r = rep[&r];
        }
        let mut x = v;
        while rep[&x] != r {
            let nx = rep[&x];
            rep.insert(x, r);
            x = nx;
        }
        r
    }
    let mut sets: BTreeMap<usize, BTreeSet<usize>> = net
        .nodes()
        .iter()
        .map(|&v| (v, net.incident(v).iter().copied().filter(|e| !slices.contains(e)).collect()))
        .collect();
    let mut sim = Simulation::default();
    let note = |sim: &mut Simulation, s: &BTreeSet<usize>| {
        if s.len() > sim.max_rank {
            sim.max_rank = s.len();
            sim.largest.clear();
        }
        if s.len() == sim.max_rank {
            sim.largest.push(s.clone());
        }
    };
    for s in sets.values() {
        note(&mut sim, s);
    }
    for &e in order {
        let (a, b) =
            net.endpoints(e).ok_or_else(|| Error::InvalidPlan(format!("order entry {e} is not a network edge")))?;
        let (ra, rb) = (find(&mut rep, a), find(&mut rep, b));
        if slices.contains(&e) || ra == rb {
            sim.step_costs.push(0);
            continue;
        }
        let (keep, gone) = (ra.min(rb), ra.max(rb));
        let sa = sets.remove(&keep).unwrap();
        let sb = sets.remove(&gone).unwrap();
        let step = 1u128 << sa.union(&sb).count();
        sim.cost += step;
        sim.step_costs.push(step);
        let merged: BTreeSet<usize> = sa.symmetric_difference(&sb).copied().collect();
        note(&mut sim, &merged);
        sets.insert(keep, merged);
        rep.insert(gone, keep);
    }
    Ok(sim)
}

/// Greedy slicing: while the largest tensor exceeds `target_rank`, fix the
/// index occurring most often among the largest tensors (ties: lowest id).
pub fn find_slices(net: &NetGraph, order: &[usize], target_rank: usize) -> Result<Vec<usize>> {
    let mut slices = Vec::new();
    let mut set = BTreeSet::new();
    loop {
        let sim = simulate(net, order, &set)?;
        if sim.max_rank <= target_rank {
            return Ok(slices);
        }
        let mut count: BTreeMap<usize, usize> = BTreeMap::new();
        for t in &sim.largest {
            for &i in t {
                *count.entry(i).or_default() += 1;
            }
        }
        let Some((&best, _)) = count.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0))) else {
            return Ok(slices);
        };
        slices.push(best);
        set.insert(best);
    }
}

/// Two-phase Louvain modularity optimisation on the weighted simple graph
/// underlying `g` (parallel edges add weight). Node visits are shuffled by
/// a ChaCha RNG seeded with `seed`. Communities are returned as node ->
/// community id, where the id is the smallest member; each community is
/// connected.
pub fn louvain_partition(g: &NetGraph, seed: u64) -> BTreeMap<usize, usize> {
    let nodes: Vec<usize> = g.nodes().iter().copied().collect();
    let index: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); nodes.len()];
    for &(a, b) in g.edges().values() {
        let (i, j) = (index[&a], index[&b]);
        *adj[i].entry(j).or_default() += 1;
        *adj[j].entry(i).or_default() += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // membership of original nodes in current level nodes
    let mut member: Vec<usize> = (0..nodes.len()).collect();
    loop {
        let (comm, moved) = louvain_level(&adj, &mut rng);
        if !moved {
            break;
        }
        let mut relabel = BTreeMap::new();
        for &c in &comm {
            let next = relabel.len();
            relabel.entry(c).or_insert(next);
        }
        let mut next_adj: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); relabel.len()];
        for (i, row) in adj.iter().enumerate() {
            for (&j, &w) in row {
                *next_adj[relabel[&comm[i]]].entry(relabel[&comm[j]]).or_default() += w;
            }
        }
        for m in member.iter_mut() {
            *m = relabel[&comm[*m]];
        }
        adj = next_adj;
    }
    // split into connected pieces, label by smallest node
    let mut out = BTreeMap::new();
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, &m) in member.iter().enumerate() {
        groups.entry(m).or_default().insert(nodes[i]);
    }
    for group in groups.values() {
        for comp in g.induced(group).connected_components() {
            let id = *comp.first().unwrap();
            for v in comp {
                out.insert(v, id);
            }
        }
    }
    out
}

/// One local-moving phase. Returns the community of each node and whether
/// any node changed community.
fn louvain_level(adj: &[BTreeMap<usize, u64>], rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = adj.len();
    let k: Vec<i128> = adj.iter().map(|r| r.values().map(|&w| w as i128).sum()).collect();
    let m2: i128 = k.iter().sum();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot: Vec<i128> = k.clone();
    let mut moved_any = false;
    if m2 == 0 {
        return (comm, false);
    }
    let mut visit: Vec<usize> = (0..n).collect();
    visit.shuffle(rng);
    loop {
        let mut moved = false;
        for &i in &visit {
            let own = comm[i];
            tot[own] -= k[i];
            let mut links: BTreeMap<usize, i128> = BTreeMap::new();
            links.insert(own, 0);
            for (&j, &w) in &adj[i] {
                if j != i {
                    *links.entry(comm[j]).or_default() += w as i128;
                }
            }
            // gain ∝ k_in(c)·2m − tot(c)·k_i; stay unless strictly better
            let gain = |c: usize, kin: i128| kin * m2 - tot[c] * k[i];
            let mut best = (own, gain(own, links[&own]));
            for (&c, &kin) in &links {
                let g = gain(c, kin);
                if g > best.1 {
                    best = (c, g);
                }
            }
            tot[best.0] += k[i];
            if best.0 != own {
                comm[i] = best.0;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            return (comm, moved_any);
        }
    }
}

/// Produces a fresh budget for each branch-and-bound call.
pub type BudgetFactory<'a> = &'a dyn Fn() -> Box<dyn SearchBudget>;

fn order_edges(g: &NetGraph, budget: BudgetFactory) -> Result<Vec<usize>> {
    if g.num_edges() == 0 {
        return Ok(Vec::new());
    }
    let (lg, map) = line_graph(g);
    let td = treewidth_bb(&lg, &mut *budget());
    td_to_order(&td, &map)
}

/// `(order, stage of each entry, node -> community)`.
pub type UnslicedOrder = (Vec<usize>, Vec<Stage>, BTreeMap<usize, usize>);

/// Community order and metagraph order per connected component, without
/// slicing.
pub fn find_order_unsliced(net: &NetGraph, seed: u64, budget: BudgetFactory) -> Result<UnslicedOrder> {
    let partition = louvain_partition(net, seed);
    let mut order = Vec::new();
    let mut stages = Vec::new();
    for comp in net.connected_components() {
        let mut communities: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &v in &comp {
            communities.entry(partition[&v]).or_default().insert(v);
        }
        for members in communities.values() {
            let part = order_edges(&net.induced(members), budget)?;
            stages.extend(part.iter().map(|_| Stage::Community));
            order.extend(part);
        }
        let mut meta = NetGraph::new();
        for &c in communities.keys() {
            meta.add_node(c);
        }
        for (&e, &(a, b)) in net.edges() {
            if comp.contains(&a) && partition[&a] != partition[&b] {
                meta.add_edge(e, partition[&a], partition[&b]);
            }
        }
        let part = order_edges(&meta, budget)?;
        stages.extend(part.iter().map(|_| Stage::Metagraph));
        order.extend(part);
    }
    Ok((order, stages, partition))
}

/// Checks that `order` lists every edge of `net` exactly once, slices for
/// `target_rank` and prices the plan.
pub fn finalize_plan(
    net: &NetGraph,
    order: Vec<usize>,
    stages: Vec<Stage>,
    community_partition: BTreeMap<usize, usize>,
    target_rank: usize,
    seed: u64,
) -> Result<ContractionPlan> {
    let listed: BTreeSet<usize> = order.iter().copied().collect();
    if listed.len() != order.len()
        || order.len() != net.num_edges()
        || listed.iter().any(|e| net.endpoints(*e).is_none())
    {
        return Err(Error::InvalidPlan("order is not a permutation of the network edges".into()));
    }
    if stages.len() != order.len() {
        return Err(Error::InvalidPlan("one stage tag per order entry expected".into()));
    }
    let slices = find_slices(net, &order, target_rank)?;
    let sim = simulate(net, &order, &slices.iter().copied().collect())?;
    if slices.len() >= 64 {
        return Err(Error::InvalidPlan(format!("{} sliced indices", slices.len())));
    }
    Ok(ContractionPlan {
        predicted_cost: sim.cost << slices.len(),
        max_rank: sim.max_rank,
        step_costs: sim.step_costs,
        order,
        stages,
        slices,
        community_partition,
        seed,
    })
}

/// [`find_order_unsliced`] followed by [`finalize_plan`].
pub fn find_order(net: &NetGraph, seed: u64, target_rank: usize, budget: BudgetFactory) -> Result<ContractionPlan> {
    let (order, stages, partition) = find_order_unsliced(net, seed, budget)?;
    finalize_plan(net, order, stages, partition, target_rank, seed)
}

/// Pre-contracts `net`, orders the reduced network and prices the full
/// order (pre-contraction edges first) on `net`.
pub fn plan_with_precontraction(
    net: &NetGraph,
    seed: u64,
    target_rank: usize,
    budget: BudgetFactory,
) -> Result<ContractionPlan> {
    let pre = precontract(net);
    let (rest, rest_stages, reduced_partition) = find_order_unsliced(&pre.graph, seed, budget)?;
    let mut order = pre.merge_edges.clone();
    let mut stages = vec![Stage::Precontract; order.len()];
    order.extend(rest);
    stages.extend(rest_stages);
    let mut partition = BTreeMap::new();
    for (node, group) in &pre.groups {
        for &v in group {
            partition.insert(v, reduced_partition[node]);
        }
    }
    finalize_plan(net, order, stages, partition, target_rank, seed)
}

/// Picks the cheaper of two plans, ties to the lower seed.
pub fn better_plan(a: ContractionPlan, b: ContractionPlan) -> ContractionPlan {
    if (b.predicted_cost, b.seed) < (a.predicted_cost, a.seed) {
        b
    } else {
        a
    }
}

/// Runs [`plan_with_precontraction`] for each seed in turn and keeps the
/// cheapest plan.
pub fn best_of_trials(
    net: &NetGraph,
    seeds: &[u64],
    target_rank: usize,
    budget: BudgetFactory,
) -> Result<ContractionPlan> {
    let mut best: Option<ContractionPlan> = None;
    for &s in seeds {
        let p = plan_with_precontraction(net, s, target_rank, budget)?;
        best = Some(match best {
            None => p,
            Some(b) => better_plan(b, p),
        });
    }
    best.ok_or_else(|| Error::InvalidArgument("at least one trial seed is needed".into()))
}
