//! Datapath RTL optimizer.
//!
//! Rewrites combinational arithmetic circuits over an e-graph of
//! width/signage-typed terms, extracts a minimum-gate-cost implementation,
//! emits Verilog, and certifies correctness through a chain of
//! single-rewrite steps checked by an exhaustive small-width oracle.

pub mod backend;
pub mod cli;
pub mod condsynth;
pub mod engine;
pub mod extraction;
pub mod frontend;
pub mod ir;
pub mod rules;
