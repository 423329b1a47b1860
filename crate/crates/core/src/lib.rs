//! Contraction-cost reduction for quantum-circuit tensor networks through
//! ZX-calculus rewriting.
//!
//! The crate is `no_std` and only needs `alloc`. The full flow is:
//!
//! 1. [`circuit::to_zx`] turns a circuit plus an output bitstring into a closed
//!    ZX-diagram whose value is the amplitude `<x|C|0...0>`.
//! 2. [`zxgraph::to_graph_like`] and [`zxgraph::close_to_hybrid`] rewrite it
//!    into a [`ClosedGraphLike`]: a simple graph of Hadamard edges with a
//!    2-component linear form on every node.
//! 3. [`simplify::anneal`] searches over pivots ([`rewrite::pivot`]) to lower a
//!    treewidth proxy, then [`rewrite::split_high_degree`] caps node degrees.
//! 4. [`twtools::precontract`] condenses the network and
//!    [`orderfinder::find_order`] builds a community-based contraction order
//!    with index slicing.
//! 5. [`engine::execute_plan`] contracts the network exactly and accounts
//!    every multiply-add.
//!
//! [`oracle`] holds two brute-force references (state vector and exhaustive
//! diagram summation) that share no code with the paths they check.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod engine;
mod error;
pub mod oracle;
pub mod orderfinder;
pub mod rewrite;
pub mod simplify;
pub mod twtools;
pub mod zxgraph;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use zxgraph::{ClosedGraphLike, LinearForm, NodeId, ZxDiagram};

/// Sums values with a balanced binary tree whose shape depends only on the
/// number of terms, so parallel and sequential callers agree bit for bit.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
