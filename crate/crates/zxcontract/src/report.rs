//! Report file and CSV sidecars.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};
use zxcontract_core::circuit::Circuit;
use zxcontract_core::orderfinder::ContractionPlan;
use zxcontract_core::simplify::{AnnealReport, GraphStats};
use zxcontract_core::Complex64;

use crate::qcfile::write_circuit;

pub const CSV_HEADER: &str = "stage,depth,method,seed,cost,width,nodes,edges";
pub const ANNEAL_CSV_HEADER: &str = "step,cost,accepted,tau";

/// SHA-256 over the canonical circuit text and the output bitstring.
pub fn input_digest(c: &Circuit, bits: &[bool]) -> String {
    let mut h = Sha256::new();
    h.update(write_circuit(c).as_bytes());
    h.update(b"bits ");
    h.update(bits_string(bits).as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InputInfo {
    pub source: String,
    pub digest: String,
    pub qubits: usize,
    pub gates: usize,
    pub bits: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConfigEcho {
    pub method: String,
    pub mode: String,
    pub cost_fn: String,
    pub steps: usize,
    pub seed: u64,
    pub trial_seeds: Vec<u64>,
    pub bb_budget: String,
    pub target_rank: usize,
    pub deterministic: bool,
    pub verify: bool,
    pub execute: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StageRecord {
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    pub max_degree: usize,
}

impl StageRecord {
    pub fn new(name: &str, s: GraphStats) -> Self {
        StageRecord { name: name.to_string(), nodes: s.nodes, edges: s.edges, max_degree: s.max_degree }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AnnealSummary {
    pub initial_cost: f64,
    pub best_cost: f64,
    pub best_step: usize,
    pub accepted: usize,
    /// Cost of every candidate, one entry per step.
    pub quick_tw_trace: Vec<f64>,
}

impl AnnealSummary {
    pub fn of(r: &AnnealReport) -> Self {
        AnnealSummary {
            initial_cost: r.initial_cost,
            best_cost: r.best_cost,
            best_step: r.best_step,
            accepted: r.steps.iter().filter(|s| s.accepted).count(),
            quick_tw_trace: r.steps.iter().map(|s| s.cost).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PlanRecord {
    pub order: Vec<usize>,
    pub slices: Vec<usize>,
    pub subtasks: u128,
    pub predicted_cost: u128,
    pub max_rank: usize,
    pub stage_costs: BTreeMap<String, u128>,
}

impl PlanRecord {
    pub fn of(p: &ContractionPlan) -> Self {
        PlanRecord {
            order: p.order.clone(),
            slices: p.slices.clone(),
            subtasks: 1u128 << p.slices.len().min(127),
            predicted_cost: p.predicted_cost,
            max_rank: p.max_rank,
            stage_costs: p.stage_costs().into_iter().map(|(s, c)| (s.name().to_string(), c)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexRecord {
    fn from(z: Complex64) -> Self {
        ComplexRecord { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ExecutionRecord {
    pub amplitude: ComplexRecord,
    pub probability: f64,
    pub cost: u128,
    pub max_rank: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OracleRecord {
    pub amplitude: ComplexRecord,
    /// Absent when the pipeline did not contract.
    pub abs_error: Option<f64>,
    pub tolerance: f64,
    /// `match`, `mismatch` or `not-executed`.
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub version: String,
    pub input: InputInfo,
    pub config: ConfigEcho,
    pub stages: Vec<StageRecord>,
    pub anneal: Option<AnnealSummary>,
    pub rewrite_trace: Vec<String>,
    pub plan: PlanRecord,
    pub execution: Option<ExecutionRecord>,
    pub oracle: Option<OracleRecord>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// One row of the stage/bench CSV. Empty optional fields stay blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvRow {
    pub stage: String,
    pub depth: Option<usize>,
    pub method: String,
    pub seed: u64,
    pub cost: Option<u128>,
    pub width: Option<usize>,
    pub nodes: usize,
    pub edges: usize,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), |x| x.to_string())
}

pub fn rows_to_csv(rows: &[CsvRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.stage,
            opt(&r.depth),
            r.method,
            r.seed,
            opt(&r.cost),
            opt(&r.width),
            r.nodes,
            r.edges
        );
    }
    out
}

pub fn anneal_csv(r: Option<&AnnealReport>) -> String {
    let mut out = String::from(ANNEAL_CSV_HEADER);
    out.push('\n');
    for s in r.map(|r| r.steps.as_slice()).unwrap_or(&[]) {
        let _ = writeln!(out, "{},{:?},{},{:?}", s.step, s.cost, s.accepted, s.tau);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use zxcontract_core::circuit::Gate;

    #[test]
    fn digest_depends_on_bits() {
        let c = Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        let a = input_digest(&c, &[false, false]);
        assert_eq!(a.len(), 64);
        assert_eq!(a, input_digest(&c, &[false, false]));
        assert_ne!(a, input_digest(&c, &[true, true]));
    }

    #[test]
    fn csv_blanks() {
        let rows = [CsvRow {
            stage: "split".into(),
            depth: None,
            method: "zx-unoptimized".into(),
            seed: 3,
            cost: None,
            width: Some(4),
            nodes: 10,
            edges: 12,
        }];
        assert_eq!(rows_to_csv(&rows), format!("{CSV_HEADER}\nsplit,,zx-unoptimized,3,,4,10,12\n"));
    }
}
