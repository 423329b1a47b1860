//! Brute-force ground truth. Nothing here is shared with the engine or with
//! the hybrid evaluation in `zxgraph`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::circuit::{Circuit, GateKind};
use crate::zxgraph::{NodeId, SpiderKind, ZxDiagram};
use crate::{Error, Result};

/// Largest qubit count [`statevector_amplitude`] accepts.
pub const MAX_STATEVECTOR_QUBITS: usize = 22;
/// Default spider limit per connected component for [`eval_zx_diagram`].
pub const ZX_ORACLE_LIMIT: usize = 22;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type M2 = [[Complex64; 2]; 2];
type M4 = [[Complex64; 4]; 4];

fn one_qubit_matrix(kind: GateKind, params: &[f64]) -> M2 {
    let r = FRAC_1_SQRT_2;
    match kind {
        GateKind::H => [[cx(r, 0.0), cx(r, 0.0)], [cx(r, 0.0), cx(-r, 0.0)]],
        GateKind::Rz => [[cx(1.0, 0.0), cx(0.0, 0.0)], [cx(0.0, 0.0), Complex64::from_polar(1.0, params[0])]],
        GateKind::Rx => {
            // H · diag(1, e^{ia}) · H
            let e = Complex64::from_polar(1.0, params[0]);
            let p = (cx(1.0, 0.0) + e) * 0.5;
            let m = (cx(1.0, 0.0) - e) * 0.5;
            [[p, m], [m, p]]
        }
        GateKind::SqrtX => [[cx(r, 0.0), cx(0.0, -r)], [cx(0.0, -r), cx(r, 0.0)]],
        GateKind::SqrtY => [[cx(r, 0.0), cx(-r, 0.0)], [cx(r, 0.0), cx(r, 0.0)]],
        GateKind::SqrtW => {
            // principal branches: sqrt(i) = e^{iπ/4}, sqrt(-i) = e^{-iπ/4}
            let si = Complex64::from_polar(1.0, FRAC_PI_4);
            let smi = Complex64::from_polar(1.0, -FRAC_PI_4);
            [[cx(r, 0.0), -si * r], [smi * r, cx(r, 0.0)]]
        }
        _ => unreachable!("two-qubit gate"),
    }
}

/// Basis order `|q_a q_b>`, first listed qubit most significant.
fn two_qubit_matrix(kind: GateKind, params: &[f64]) -> M4 {
    let o = cx(0.0, 0.0);
    let l = cx(1.0, 0.0);
    match kind {
        GateKind::Cnot => [[l, o, o, o], [o, l, o, o], [o, o, o, l], [o, o, l, o]],
        GateKind::Cz => [[l, o, o, o], [o, l, o, o], [o, o, l, o], [o, o, o, -l]],
        GateKind::Fsim => {
            let (theta, phi) = (params[0], params[1]);
            let c = cx(libm::cos(theta), 0.0);
            let s = cx(0.0, -libm::sin(theta));
            [[l, o, o, o], [o, c, s, o], [o, s, c, o], [o, o, o, Complex64::from_polar(1.0, -phi)]]
        }
        _ => unreachable!("one-qubit gate"),
    }
}

/// Dense state vector over `n` qubits; qubit 0 is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub num_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::OracleLimit { size: num_qubits, limit: MAX_STATEVECTOR_QUBITS });
        }
        let mut amplitudes = vec![cx(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = cx(1.0, 0.0);
        Ok(StateVector { num_qubits, amplitudes })
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    fn apply1(&mut self, q: usize, m: &M2) {
        let b = self.bit(q);
        for i in 0..self.amplitudes.len() {
            if i & b == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | b]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | b] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply2(&mut self, qa: usize, qb: usize, m: &M4) {
        let (ba, bb) = (self.bit(qa), self.bit(qb));
        for i in 0..self.amplitudes.len() {
            if i & ba == 0 && i & bb == 0 {
                let idx = [i, i | bb, i | ba, i | ba | bb];
                let v: Vec<Complex64> = idx.iter().map(|&k| self.amplitudes[k]).collect();
                for (r, &k) in idx.iter().enumerate() {
                    self.amplitudes[k] = (0..4).map(|c| m[r][c] * v[c]).sum();
                }
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Runs the circuit on `|0...0>` with dense matrices.
pub fn simulate(c: &Circuit) -> Result<StateVector> {
    let mut sv = StateVector::zero(c.num_qubits)?;
    for g in &c.gates {
        match g.qubits.as_slice() {
            [q] => sv.apply1(*q, &one_qubit_matrix(g.kind, &g.params)),
            [a, b] => sv.apply2(*a, *b, &two_qubit_matrix(g.kind, &g.params)),
            _ => unreachable!("gate arity validated on construction"),
        }
    }
    Ok(sv)
}

/// `<x|C|0...0>`; `x[i]` is the output bit of qubit `i`.
pub fn statevector_amplitude(c: &Circuit, x: &[bool]) -> Result<Complex64> {
    if x.len() != c.num_qubits {
        return Err(Error::BitstringLength { got: x.len(), expected: c.num_qubits });
    }
    let sv = simulate(c)?;
    let idx = x.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
    Ok(sv.amplitudes[idx])
}

/// Exhaustive value of a closed ZX-diagram.
///
/// Each X-spider is rewritten on the fly as a Z-spider with a Hadamard on
/// every leg, so every spider carries one binary value. A wire then
/// contributes `δ(s,t)` or `H[s][t]` depending on the parity of Hadamards on
/// it. Connected components are summed independently; the limit applies to
/// the largest component.
pub fn eval_zx_diagram(d: &ZxDiagram) -> Result<Complex64> {
    eval_zx_diagram_with_limit(d, ZX_ORACLE_LIMIT)
}

pub fn eval_zx_diagram_with_limit(d: &ZxDiagram, limit: usize) -> Result<Complex64> {
    if !d.boundary().is_empty() {
        return Err(Error::OpenBoundary(d.boundary().len()));
    }
    let ids: Vec<NodeId> = d.spiders().map(|(v, _)| v).collect();
    let pos: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = ids.len();
    let spiders: Vec<(SpiderKind, f64)> = d.spiders().map(|(_, s)| (s.kind, s.phase)).collect();
    // (a, b, odd Hadamard parity)
    let wires: Vec<(usize, usize, bool)> = d
        .wires()
        .map(|(_, w)| {
            let (a, b) = (pos[&w.a], pos[&w.b]);
            let mut h = w.hadamard;
            h ^= spiders[a].0 == SpiderKind::X;
            h ^= spiders[b].0 == SpiderKind::X;
            (a, b, h)
        })
        .collect();

    // union-find for components
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for &(a, b, _) in &wires {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        comps.entry(r).or_default().push(v);
    }
    if let Some(big) = comps.values().map(|c| c.len()).max() {
        if big > limit {
            return Err(Error::OracleLimit { size: big, limit });
        }
    }

    let h = FRAC_1_SQRT_2;
    let mut total = d.scalar;
    for members in comps.values() {
        let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let cw: Vec<(usize, usize, bool)> = wires
            .iter()
            .filter(|(a, _, _)| local.contains_key(a))
            .map(|&(a, b, hh)| (local[&a], local[&b], hh))
            .collect();
        let mut sum = cx(0.0, 0.0);
        'assign: for s in 0u64..(1u64 << members.len()) {
            let bit = |i: usize| (s >> i) & 1 == 1;
            let mut term = cx(1.0, 0.0);
            for (i, &v) in members.iter().enumerate() {
                if bit(i) {
                    term *= Complex64::from_polar(1.0, spiders[v].1);
                }
            }
            for &(a, b, hh) in &cw {
                if hh {
                    term *= if bit(a) && bit(b) { -h } else { h };
                } else if bit(a) != bit(b) {
                    continue 'assign;
                }
            }
            sum += term;
        }
        // X-spider conversion: Z(α) with H on every leg equals X(α) exactly,
        // so no extra scalar is needed.
        total *= sum;
    }
    Ok(total)
}
