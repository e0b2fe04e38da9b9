//! Tensor-network cost estimation: network construction, contraction
//! ordering with slicing, exact contraction and cost reports.

mod contract;
mod manifest;
mod network;
mod plan;
mod report;

pub use contract::{contract, contract_counted, contract_pair, permute};
pub use manifest::{BenchmarkManifest, BenchmarkRow, Discrepancy, ReferenceCost, RuntimeCheck};
pub use network::{build_network, build_network_from, NetworkOutput, Tensor, TensorNetwork};
pub use plan::{optimize_order, plan_from_steps, ContractionPlan, OptimizeOptions, SliceRound};
pub use report::{
    report_cost, report_cost_with, CostReport, Machine, SamplingCost, BYTES_PER_ENTRY,
    MACHINE_FLOPS_PER_COMPLEX, SAMPLING_MODEL,
};
