//! Circuits over `{H, CNOT, CZ, RZ, RX, √X, √Y, √W, fSim}` and their
//! translation into closed ZX-diagrams.
//!
//! Conventions: `RZ(a) = diag(1, e^{ia})` (the Z-spider) and `RX(a) = H·RZ(a)·H`
//! (the X-spider). `√W` uses principal branches `sqrt(i) = e^{iπ/4}` and
//! `sqrt(-i) = e^{-iπ/4}`; the other branch pair flips the sign of both
//! off-diagonal entries and is not what the gadget implements.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::zxgraph::{NodeId, SpiderKind, ZxDiagram};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    H,
    Cnot,
    Cz,
    Rz,
    Rx,
    SqrtX,
    SqrtY,
    SqrtW,
    Fsim,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Rz => "rz",
            GateKind::Rx => "rx",
            GateKind::SqrtX => "sx",
            GateKind::SqrtY => "sy",
            GateKind::SqrtW => "sw",
            GateKind::Fsim => "fsim",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "h" => GateKind::H,
            "cnot" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "rz" => GateKind::Rz,
            "rx" => GateKind::Rx,
            "sx" => GateKind::SqrtX,
            "sy" => GateKind::SqrtY,
            "sw" => GateKind::SqrtW,
            "fsim" => GateKind::Fsim,
            _ => return None,
        })
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Fsim => 2,
            _ => 1,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rz | GateKind::Rx => 1,
            GateKind::Fsim => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if qubits.len() != kind.num_qubits() || params.len() != kind.num_params() {
            return Err(Error::GateArity { gate: kind.name(), expected: kind.num_qubits(), params: kind.num_params() });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::RepeatedQubit { gate: kind.name(), qubit: qubits[0] });
        }
        Ok(Gate { kind, qubits, params })
    }

    pub fn h(q: usize) -> Self {
        Gate { kind: GateKind::H, qubits: vec![q], params: vec![] }
    }
    pub fn rz(q: usize, a: f64) -> Self {
        Gate { kind: GateKind::Rz, qubits: vec![q], params: vec![a] }
    }
    pub fn rx(q: usize, a: f64) -> Self {
        Gate { kind: GateKind::Rx, qubits: vec![q], params: vec![a] }
    }
    pub fn sqrt_x(q: usize) -> Self {
        Gate { kind: GateKind::SqrtX, qubits: vec![q], params: vec![] }
    }
    pub fn sqrt_y(q: usize) -> Self {
        Gate { kind: GateKind::SqrtY, qubits: vec![q], params: vec![] }
    }
    pub fn sqrt_w(q: usize) -> Self {
        Gate { kind: GateKind::SqrtW, qubits: vec![q], params: vec![] }
    }
    pub fn cnot(c: usize, t: usize) -> Self {
        Gate { kind: GateKind::Cnot, qubits: vec![c, t], params: vec![] }
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Cz, qubits: vec![a, b], params: vec![] }
    }
    pub fn fsim(a: usize, b: usize, theta: f64, phi: f64) -> Self {
        Gate { kind: GateKind::Fsim, qubits: vec![a, b], params: vec![theta, phi] }
    }

    /// Row-major unitary, rows indexed by output. Two-qubit gates use the
    /// basis `|q_a q_b>` with the first listed qubit most significant.
    pub fn unitary(&self) -> Vec<Complex64> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let r = FRAC_1_SQRT_2;
        match self.kind {
            GateKind::H => vec![c(r, 0.), c(r, 0.), c(r, 0.), c(-r, 0.)],
            GateKind::Rz => vec![c(1., 0.), c(0., 0.), c(0., 0.), Complex64::from_polar(1.0, self.params[0])],
            GateKind::Rx => {
                let e = Complex64::from_polar(1.0, self.params[0]);
                let (p, m) = ((c(1., 0.) + e) * 0.5, (c(1., 0.) - e) * 0.5);
                vec![p, m, m, p]
            }
            GateKind::SqrtX => vec![c(r, 0.), c(0., -r), c(0., -r), c(r, 0.)],
            GateKind::SqrtY => vec![c(r, 0.), c(-r, 0.), c(r, 0.), c(r, 0.)],
            GateKind::SqrtW => {
                vec![c(r, 0.), -Complex64::from_polar(r, FRAC_PI_4), Complex64::from_polar(r, -FRAC_PI_4), c(r, 0.)]
            }
            GateKind::Cnot | GateKind::Cz | GateKind::Fsim => {
                let mut u = vec![c(0., 0.); 16];
                for i in 0..4 {
                    u[i * 4 + i] = c(1., 0.);
                }
                match self.kind {
                    GateKind::Cnot => {
                        u[10] = c(0., 0.);
                        u[15] = c(0., 0.);
                        u[11] = c(1., 0.);
                        u[14] = c(1., 0.);
                    }
                    GateKind::Cz => u[15] = c(-1., 0.),
                    _ => {
                        let (theta, phi) = (self.params[0], self.params[1]);
                        let (cs, sn) = (libm::cos(theta), libm::sin(theta));
                        u[5] = c(cs, 0.);
                        u[10] = c(cs, 0.);
                        u[6] = c(0., -sn);
                        u[9] = c(0., -sn);
                        u[15] = Complex64::from_polar(1.0, -phi);
                    }
                }
                u
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one qubit".into()));
        }
        for g in &gates {
            Gate::new(g.kind, g.qubits.clone(), g.params.clone())?;
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= num_qubits) {
                return Err(Error::QubitOutOfRange { qubit: q, width: num_qubits });
            }
        }
        Ok(Circuit { num_qubits, gates })
    }
}

/// fSim angles used by [`random_grid_circuit`], close to the values of the
/// Sycamore coupler calibration.
pub const GRID_FSIM_THETA: f64 = FRAC_PI_2;
pub const GRID_FSIM_PHI: f64 = FRAC_PI_6;

/// Random `rows x cols` grid circuit. Each layer applies one of `{√X, √Y, √W}`
/// to every qubit, then fSim gates on a maximal matching of grid couplers.
/// Couplers fall into four classes (horizontal even/odd column, vertical
/// even/odd row); layer `l` fills its matching starting from class `l mod 4`.
pub fn random_grid_circuit(rows: usize, cols: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if rows * cols < 2 || depth == 0 {
        return Err(Error::InvalidArgument("grid circuit needs rows*cols >= 2 and depth >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = |r: usize, c: usize| r * cols + c;
    let mut classes: [Vec<(usize, usize)>; 4] = Default::default();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                classes[c % 2].push((q(r, c), q(r, c + 1)));
            }
            if r + 1 < rows {
                classes[2 + r % 2].push((q(r, c), q(r + 1, c)));
            }
        }
    }
    let n = rows * cols;
    let mut gates = Vec::new();
    for layer in 0..depth {
        for qubit in 0..n {
            gates.push(match rng.gen_range(0..3) {
                0 => Gate::sqrt_x(qubit),
                1 => Gate::sqrt_y(qubit),
                _ => Gate::sqrt_w(qubit),
            });
        }
        let mut busy = vec![false; n];
        for k in 0..4 {
            for &(a, b) in &classes[(layer + k) % 4] {
                if !busy[a] && !busy[b] {
                    busy[a] = true;
                    busy[b] = true;
                    gates.push(Gate::fsim(a, b, GRID_FSIM_THETA, GRID_FSIM_PHI));
                }
            }
        }
    }
    Circuit::new(n, gates)
}

/// Factor that turns each gadget's tensor into the exact gate unitary,
/// calibrated with the brute-force diagram oracle.
pub mod gadget_scalar {
    use super::*;

    /// `X(π/2)`, the `√Y` chain and the `√W` chain all equal `e^{iπ/4}·U`.
    pub fn clifford_sqrt() -> Complex64 {
        Complex64::from_polar(1.0, -FRAC_PI_4)
    }
    /// The CNOT and CZ gadgets equal `U / sqrt(2)`.
    pub const TWO_QUBIT: f64 = SQRT_2;
    /// A degree-1 X-spider of phase 0 or π is `sqrt(2)|0>` or `sqrt(2)|1>`.
    pub const BASIS_STATE: f64 = FRAC_1_SQRT_2;
    /// The fSim gadget equals `e^{iθ} / (2 sqrt(2)) · fSim(θ, φ)`.
    pub fn fsim(theta: f64) -> Complex64 {
        Complex64::from_polar(2.0 * SQRT_2, -theta)
    }
}

struct Builder {
    d: ZxDiagram,
    /// last spider on each qubit wire and whether a Hadamard is pending on it
    frontier: Vec<(NodeId, bool)>,
}

impl Builder {
    fn attach(&mut self, q: usize, v: NodeId) {
        let (prev, h) = self.frontier[q];
        self.d.add_wire(prev, v, h).expect("live spiders");
        self.frontier[q] = (v, false);
    }

    fn chain(&mut self, q: usize, spiders: &[(SpiderKind, f64)]) -> Vec<NodeId> {
        spiders
            .iter()
            .map(|&(k, p)| {
                let v = self.d.add_spider(k, p);
                self.attach(q, v);
                v
            })
            .collect()
    }

    fn hadamard(&mut self, q: usize) {
        self.frontier[q].1 = !self.frontier[q].1;
    }

    /// Z-spider on each wire, both joined to an X-spider with a phase leaf.
    fn phase_gadget(&mut self, a: usize, b: usize, phase: f64) {
        let za = self.chain(a, &[(SpiderKind::Z, 0.0)])[0];
        let zb = self.chain(b, &[(SpiderKind::Z, 0.0)])[0];
        let x = self.d.add_spider(SpiderKind::X, 0.0);
        let leaf = self.d.add_spider(SpiderKind::Z, phase);
        for v in [za, zb, leaf] {
            self.d.add_wire(v, x, false).expect("live spiders");
        }
    }

    fn gate(&mut self, g: &Gate) {
        use SpiderKind::{X, Z};
        let q = &g.qubits;
        match g.kind {
            GateKind::H => self.hadamard(q[0]),
            GateKind::Rz => {
                self.chain(q[0], &[(Z, g.params[0])]);
            }
            GateKind::Rx => {
                self.chain(q[0], &[(X, g.params[0])]);
            }
            GateKind::SqrtX => {
                self.chain(q[0], &[(X, FRAC_PI_2)]);
                self.d.scalar *= gadget_scalar::clifford_sqrt();
            }
            GateKind::SqrtY => {
                self.chain(q[0], &[(X, FRAC_PI_2), (Z, FRAC_PI_2), (X, -FRAC_PI_2)]);
                self.d.scalar *= gadget_scalar::clifford_sqrt();
            }
            GateKind::SqrtW => {
                self.chain(q[0], &[(Z, -FRAC_PI_4), (X, FRAC_PI_2), (Z, FRAC_PI_4)]);
                self.d.scalar *= gadget_scalar::clifford_sqrt();
            }
            GateKind::Cnot | GateKind::Cz => {
                let c = self.chain(q[0], &[(Z, 0.0)])[0];
                let kind = if g.kind == GateKind::Cnot { X } else { Z };
                let t = self.chain(q[1], &[(kind, 0.0)])[0];
                self.d.add_wire(c, t, g.kind == GateKind::Cz).expect("live spiders");
                self.d.scalar *= gadget_scalar::TWO_QUBIT;
            }
            GateKind::Fsim => {
                let (theta, phi) = (g.params[0], g.params[1]);
                let (a, b) = (q[0], q[1]);
                for w in [a, b] {
                    self.chain(w, &[(X, FRAC_PI_2)]);
                }
                self.phase_gadget(a, b, theta);
                for w in [a, b] {
                    self.chain(w, &[(X, -FRAC_PI_2)]);
                    self.hadamard(w);
                }
                self.phase_gadget(a, b, theta);
                for w in [a, b] {
                    self.hadamard(w);
                }
                self.phase_gadget(a, b, phi / 2.0);
                for w in [a, b] {
                    self.chain(w, &[(Z, -phi / 2.0)]);
                }
                self.d.scalar *= gadget_scalar::fsim(theta);
            }
        }
    }
}

/// Closed diagram whose value is `<x|C|0...0>`, built by chaining per-gate
/// gadgets between `|0>` states and `<x_i|` effects (degree-1 X-spiders).
pub fn to_zx(c: &Circuit, x: &[bool]) -> Result<ZxDiagram> {
    if x.len() != c.num_qubits {
        return Err(Error::BitstringLength { got: x.len(), expected: c.num_qubits });
    }
    let mut b = Builder { d: ZxDiagram::new(), frontier: Vec::with_capacity(c.num_qubits) };
    for _ in 0..c.num_qubits {
        let s = b.d.add_spider(SpiderKind::X, 0.0);
        b.frontier.push((s, false));
        b.d.scalar *= gadget_scalar::BASIS_STATE;
    }
    for g in &c.gates {
        b.gate(g);
    }
    for (q, &bit) in x.iter().enumerate() {
        b.chain(q, &[(SpiderKind::X, if bit { PI } else { 0.0 })]);
        b.d.scalar *= gadget_scalar::BASIS_STATE;
    }
    Ok(b.d)
}

/// Parses a bitstring such as `"0110"`.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::InvalidArgument(alloc::format!("bad bit {:?}", ch))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{eval_zx_diagram, statevector_amplitude};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// Tensor entry `<out| gadget |in>` of a single gate, closing the gadget
    /// with basis states and effects on every wire.
    fn gadget_entry(g: &Gate, n: usize, input: usize, output: usize) -> Complex64 {
        // prepare |input> with RX(π) (an exact X) before the gate
        let mut gates = Vec::new();
        for q in 0..n {
            if (input >> (n - 1 - q)) & 1 == 1 {
                gates.push(Gate::rx(q, PI));
            }
        }
        gates.push(g.clone());
        let c = Circuit::new(n, gates).unwrap();
        let x: Vec<bool> = (0..n).map(|q| (output >> (n - 1 - q)) & 1 == 1).collect();
        // fusion keeps the prepared fSim diagrams under the oracle cap
        eval_zx_diagram(&crate::zxgraph::to_graph_like(&to_zx(&c, &x).unwrap())).unwrap()
    }

    #[test]
    fn gadgets_reproduce_every_unitary_entry() {
        let gates = [
            Gate::h(0),
            Gate::rz(0, 0.77),
            Gate::rx(0, -1.3),
            Gate::sqrt_x(0),
            Gate::sqrt_y(0),
            Gate::sqrt_w(0),
            Gate::cnot(0, 1),
            Gate::cz(0, 1),
            Gate::fsim(0, 1, 0.5, 0.25),
            Gate::fsim(1, 0, -1.1, 2.2),
        ];
        for g in &gates {
            let n = g.kind.num_qubits();
            let dim = 1 << n;
            let u = g.unitary();
            for i in 0..dim {
                for o in 0..dim {
                    // input prep through RX(π) is exact, so entries match U
                    let mut want = u[o * dim + i];
                    if g.qubits == [1, 0] {
                        let sw = |k: usize| ((k & 1) << 1) | (k >> 1);
                        want = u[sw(o) * dim + sw(i)];
                    }
                    let got = gadget_entry(g, n, i, o);
                    assert!(close(got, want, 1e-10), "{:?} ({o},{i}): {got} vs {want}", g.kind);
                }
            }
        }
    }

    #[test]
    fn unitary_matches_oracle_matrices() {
        let gates = [Gate::sqrt_w(0), Gate::fsim(0, 1, 0.3, 0.9), Gate::rx(0, 0.4)];
        for g in &gates {
            let n = g.kind.num_qubits();
            let dim = 1 << n;
            let u = g.unitary();
            for o in 0..dim {
                let c = Circuit::new(n, vec![g.clone()]).unwrap();
                let x: Vec<bool> = (0..n).map(|q| (o >> (n - 1 - q)) & 1 == 1).collect();
                assert!(close(statevector_amplitude(&c, &x).unwrap(), u[o * dim], 1e-12));
            }
        }
    }

    #[test]
    fn small_examples() {
        let c = Circuit::new(1, vec![Gate::h(0)]).unwrap();
        let v = eval_zx_diagram(&to_zx(&c, &[false]).unwrap()).unwrap();
        assert!(close(v, Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-12));
        let c = Circuit::new(2, vec![Gate::cnot(0, 1)]).unwrap();
        let v = eval_zx_diagram(&to_zx(&c, &[false, false]).unwrap()).unwrap();
        assert!(close(v, Complex64::new(1.0, 0.0), 1e-12));
        let c = Circuit::new(2, vec![Gate::fsim(0, 1, 0.6, 1.7)]).unwrap();
        let v = eval_zx_diagram(&to_zx(&c, &[false, false]).unwrap()).unwrap();
        assert!(close(v, Complex64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn circuit_validation() {
        assert_eq!(Circuit::new(2, vec![Gate::cnot(0, 2)]), Err(Error::QubitOutOfRange { qubit: 2, width: 2 }));
        assert!(Gate::new(GateKind::Cz, vec![1, 1], vec![]).is_err());
        assert!(Gate::new(GateKind::Rz, vec![0], vec![]).is_err());
        assert!(to_zx(&Circuit::new(2, vec![]).unwrap(), &[false]).is_err());
    }

    #[test]
    fn grid_generator_counts_and_determinism() {
        let a = random_grid_circuit(2, 2, 1, 7).unwrap();
        assert_eq!(a, random_grid_circuit(2, 2, 1, 7).unwrap());
        let c = random_grid_circuit(1, 2, 3, 0).unwrap();
        let ones = c.gates.iter().filter(|g| g.kind.num_qubits() == 1).count();
        let fsims = c.gates.iter().filter(|g| g.kind == GateKind::Fsim).count();
        assert_eq!((ones, fsims), (6, 3));
        assert!(random_grid_circuit(1, 1, 3, 0).is_err());
        assert!(random_grid_circuit(2, 2, 0, 0).is_err());
    }

    #[test]
    fn grid_amplitude_is_bounded() {
        let c = random_grid_circuit(3, 3, 8, 1).unwrap();
        let a = statevector_amplitude(&c, &[false; 9]).unwrap();
        assert!(a.re.is_finite() && a.im.is_finite() && a.norm() <= 1.0);
    }
}
