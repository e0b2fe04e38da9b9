//! Processor lattice, coupler patterns, qubit subsets and device profiles.

mod profile;
mod subset;
mod topology;

pub use profile::{
    load_profile, CouplerEntry, DeviceProfile, Durations, GateParams, MeanRates, QubitRates,
    StateResolvedReadout,
};
pub use subset::{validate_subset, QubitSubset, SubsetDocument};
pub use topology::{build_topology, pattern_layer, Coupler, DeviceTopology, Pattern, QubitId};

/// Lattice dimensions of the bundled 105-qubit processor.
pub const ZCZ3_ROWS: u32 = 15;
pub const ZCZ3_COLS: u32 = 7;

/// The bundled 15 x 7 diagonally coupled lattice.
pub fn zcz3_topology() -> DeviceTopology {
    build_topology(ZCZ3_ROWS, ZCZ3_COLS)
}
