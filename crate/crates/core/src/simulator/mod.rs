//! Exact statevector simulation and sampling.
//!
//! Bit `i` of a basis-state index holds subset position `i`; bitstrings are
//! stored as `u128` and written as lowercase hex of that index.

mod kernels;
mod patched;
mod sampling;
mod samples_io;
mod statevector;

pub use patched::{simulate_patched, simulate_patched_with, PatchState, PatchedState};
pub use sampling::{
    sample, sample_distribution, sample_with, DistFactor, IdealDistribution, NoiseSpec, SampleMeta,
    SampleSet,
};
pub use samples_io::{read_samples, write_samples, SampleHeader};
pub use statevector::{
    amplitude, probabilities, simulate, simulate_from, Simulator, StateVector, DEFAULT_MAX_QUBITS,
};

/// A measured bitstring, bit `i` = subset position `i`.
pub type Bits = u128;
