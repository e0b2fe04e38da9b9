//! Desk-scale random circuit sampling pipeline.
//!
//! The crate covers the full path from a diagonally coupled superconducting
//! lattice to fidelity numbers and classical cost figures:
//!
//! - [`device`]: lattice topology, coupler patterns A–D, qubit subsets and
//!   calibrated device profiles.
//! - [`circuits`]: random circuit generation with `{√X, √Y, √W}` single-qubit
//!   layers and patterned iSWAP-like layers, patch cuts, gate counting and
//!   JSON documents.
//! - [`simulator`]: exact statevector simulation, ideal and noisy sampling,
//!   and factorized simulation of patched circuits.
//! - [`xeb`]: linear XEB, Porter-Thomas diagnostics, speckle purity and the
//!   stability band monitor.
//! - [`errormodel`]: digital error-model fidelity prediction.
//! - [`costest`]: tensor-network construction, contraction ordering with
//!   memory-constrained slicing, exact contraction and cost reporting.

pub mod circuits;
pub mod costest;
pub mod data;
pub mod device;
pub mod errormodel;
mod error;
pub mod rng;
pub mod simulator;
pub mod xeb;

pub use circuits::{Circuit, Gate1Q, Gate2Q, GateCounts, Layer, PatchSpec};
pub use costest::{
    build_network, contract, optimize_order, report_cost, ContractionPlan, CostReport, Machine,
    NetworkOutput, OptimizeOptions, TensorNetwork,
};
pub use device::{
    build_topology, Coupler, DeviceProfile, DeviceTopology, GateParams, Pattern, QubitId,
    QubitSubset,
};
pub use error::{Error, Result};
pub use errormodel::{predict_fidelity, ErrorBudget};
pub use simulator::{NoiseSpec, SampleSet, StateVector};
pub use xeb::{FidelityEstimate, Method, StabilityReport};

/// Schema version written into every JSON document this crate produces.
pub const SCHEMA_VERSION: u32 = 1;
