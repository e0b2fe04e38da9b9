//! Shared fixtures for the benchmarks.

use rcs_core::circuits::{generate, GenerateOptions};
use rcs_core::device::{zcz3_topology, MeanRates};
use rcs_core::{Circuit, DeviceProfile, QubitSubset};

/// Random circuit on the `n` most central qubits of the lattice, with ideal
/// iSWAP gates.
pub fn random_circuit(n: usize, cycles: usize, seed: u64) -> Circuit {
    let topology = zcz3_topology();
    let subset = QubitSubset::compact(&topology, n).expect("subset size within the lattice");
    let profile = DeviceProfile::uniform("bench", MeanRates::ZERO);
    generate(&topology, &subset, &GenerateOptions::new(cycles, seed), &profile).expect("valid circuit")
}
