//! Random circuits on a qubit subset: gates, layers, generation, patching
//! and JSON documents.

mod circuit;
mod gates;
mod generate;
mod io;
mod patch;

pub use circuit::{gate_counts, Circuit, GateCounts, Layer, TwoQubitGate};
pub use gates::{Gate1Q, Gate2Q, Matrix2, Matrix4};
pub use generate::{generate, GenerateOptions, DEFAULT_SEQUENCE};
pub use io::{deserialize, serialize, CircuitDocument};
pub use patch::{apply_patch, PatchSpec};
