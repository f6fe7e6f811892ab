//! Synthesis of space-time adapters.
//!
//! Takes the I/O timing constraints between a producer and a consumer block
//! (which datum is written on which port at which cycle, and when it is read)
//! and derives a buffer architecture made of FIFOs, LIFOs and registers,
//! together with a cycle-level control schedule:
//!
//! 1. [`graph`]: classify every pair of data as Register/FIFO/LIFO
//!    compatible and build the labeled compatibility DAG.
//! 2. [`structure`]: find FIFO/LIFO candidates as label-homogeneous paths
//!    and size them.
//! 3. [`allocation`]: greedily pick candidates into hierarchical nodes.
//! 4. [`merge`]: share elements between structures with disjoint lifetimes.
//! 5. [`netlist`]: emit elements, binding, interconnect and schedule.
//! 6. [`sim`]: replay the netlist cycle by cycle against the constraints.
//!
//! [`pipeline::synthesize`] runs steps 1 to 5.

pub mod allocation;
pub mod cli;
pub mod graph;
pub mod interleaver;
pub mod merge;
pub mod model;
pub mod netlist;
pub mod pipeline;
pub mod sim;
pub mod structure;
pub mod workload;

pub use allocation::{assign, Assignment, HierNode, Kind, Weights};
pub use graph::{build_graph, classify_pair, Compat, CompatGraph, Label};
pub use merge::{optimize, register_compatible, MergedElement};
pub use model::{parse_constraints, serialize_constraints, ConstraintSet, Interval, TimedDatum};
pub use netlist::{emit, Netlist};
pub use pipeline::{synthesize, Synthesis};
pub use sim::{simulate, SimTrace};

/// Pretty JSON with object keys sorted.
pub(crate) fn canonical_json<T: serde::Serialize>(value: &T) -> String {
    // serde_json::Map is BTreeMap-backed, so going through Value sorts keys
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}
