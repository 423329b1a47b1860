//! Line-oriented circuit files.
//!
//! ```text
//! # Bell pair
//! qubits 2
//! h 0
//! cnot 0 1
//! ```
//!
//! The first nonblank line declares the width. Every following nonblank line
//! is a gate name, its qubits, then its angles in radians. `#` comments run to
//! the end of the line.

use std::fmt::Write as _;
use std::path::Path;

use zxcontract_core::circuit::{Circuit, Gate, GateKind};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut width = None;
    let mut gates = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("");
        let mut words = body.split_whitespace();
        let Some(head) = words.next() else { continue };
        let rest: Vec<&str> = words.collect();
        let Some(n) = width else {
            if head != "qubits" || rest.len() != 1 {
                return Err(err(line, "expected `qubits <n>` before any gate"));
            }
            let n: usize = rest[0].parse().map_err(|_| err(line, format!("bad qubit count `{}`", rest[0])))?;
            if n == 0 {
                return Err(err(line, "circuit needs at least one qubit"));
            }
            width = Some(n);
            continue;
        };
        let kind = GateKind::from_name(head).ok_or_else(|| err(line, format!("unknown gate `{head}`")))?;
        let (nq, np) = (kind.num_qubits(), kind.num_params());
        if rest.len() != nq + np {
            return Err(err(
                line,
                format!("`{head}` takes {nq} qubit(s) and {np} angle(s), got {} argument(s)", rest.len()),
            ));
        }
        let mut qubits = Vec::with_capacity(nq);
        for w in &rest[..nq] {
            let q: usize = w.parse().map_err(|_| err(line, format!("bad qubit index `{w}`")))?;
            if q >= n {
                return Err(err(line, format!("qubit {q} out of range for {n} qubit(s)")));
            }
            qubits.push(q);
        }
        let mut params = Vec::with_capacity(np);
        for w in &rest[nq..] {
            let a: f64 = w.parse().map_err(|_| err(line, format!("bad angle `{w}`")))?;
            if !a.is_finite() {
                return Err(err(line, format!("angle `{w}` is not finite")));
            }
            params.push(a);
        }
        gates.push(Gate::new(kind, qubits, params).map_err(|e| err(line, e.to_string()))?);
    }
    let n = width.ok_or_else(|| err(last_line.max(1), "missing `qubits <n>` line"))?;
    Circuit::new(n, gates).map_err(|e| err(last_line, e.to_string()))
}

/// Canonical text of `c`. Angles use the shortest representation that reads
/// back to the same `f64`, so `parse_circuit(&write_circuit(c)) == c`.
pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.num_qubits);
    for g in &c.gates {
        out.push_str(g.kind.name());
        for q in &g.qubits {
            let _ = write!(out, " {q}");
        }
        for a in &g.params {
            let _ = write!(out, " {a:?}");
        }
        out.push('\n');
    }
    out
}

pub fn read_circuit_file(path: &Path) -> anyhow::Result<Circuit> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    parse_circuit(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
