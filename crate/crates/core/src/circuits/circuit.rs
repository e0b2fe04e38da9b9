use std::collections::HashSet;

use crate::device::{GateParams, QubitSubset};
use crate::{Error, Result};

use super::{Gate1Q, Gate2Q, PatchSpec};

/// A two-qubit gate on subset positions `a` and `b`. The gate matrix is
/// expressed on `|ab⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitGate {
    pub a: usize,
    pub b: usize,
    pub params: GateParams,
}

impl TwoQubitGate {
    pub fn gate(&self) -> Gate2Q {
        Gate2Q::new(self.params)
    }

    pub fn touches(&self, q: usize) -> bool {
        self.a == q || self.b == q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    /// Single-qubit gates, ascending by position.
    Single(Vec<(usize, Gate1Q)>),
    /// Two-qubit gates ascending by lower position, plus the positions
    /// designated to idle during this layer.
    Two {
        gates: Vec<TwoQubitGate>,
        idle: Vec<usize>,
    },
}

impl Layer {
    fn normalize(&mut self) {
        match self {
            Layer::Single(gates) => gates.sort_by_key(|&(q, _)| q),
            Layer::Two { gates, idle } => {
                gates.sort_by_key(|g| g.a.min(g.b));
                idle.sort_unstable();
            }
        }
    }

    /// Positions acted on by the layer, with idle markers included.
    fn qubits(&self) -> Vec<usize> {
        match self {
            Layer::Single(gates) => gates.iter().map(|&(q, _)| q).collect(),
            Layer::Two { gates, idle } => gates
                .iter()
                .flat_map(|g| [g.a, g.b])
                .chain(idle.iter().copied())
                .collect(),
        }
    }
}

/// A layered circuit on a qubit subset, with the generation metadata needed
/// to reproduce it.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    subset: QubitSubset,
    layers: Vec<Layer>,
    pub(crate) cycles: usize,
    pub(crate) pattern_sequence: String,
    pub(crate) seed: u64,
    pub(crate) no_repeat: bool,
    pub(crate) patch: Option<PatchSpec>,
}

impl Circuit {
    /// Build a circuit from explicit layers. Rejects out-of-range positions
    /// and layers that use a qubit twice.
    pub fn new(subset: QubitSubset, mut layers: Vec<Layer>) -> Result<Self> {
        let n = subset.len();
        for (i, layer) in layers.iter_mut().enumerate() {
            let mut seen = HashSet::new();
            for q in layer.qubits() {
                if q >= n {
                    return Err(Error::validation(
                        format!("layers[{i}]"),
                        format!("position {q} outside a {n}-qubit subset"),
                    ));
                }
                if !seen.insert(q) {
                    return Err(Error::validation(
                        format!("layers[{i}]"),
                        format!("qubit {} used twice in one layer", subset.qubits()[q]),
                    ));
                }
            }
            if let Layer::Two { gates, .. } = layer {
                if let Some(g) = gates.iter().find(|g| g.a == g.b) {
                    return Err(Error::validation(
                        format!("layers[{i}]"),
                        format!("two-qubit gate on a single qubit {}", g.a),
                    ));
                }
            }
            layer.normalize();
        }
        Ok(Circuit {
            subset,
            layers,
            cycles: 0,
            pattern_sequence: String::new(),
            seed: 0,
            no_repeat: false,
            patch: None,
        })
    }

    /// A circuit with no gates.
    pub fn empty(subset: QubitSubset) -> Self {
        Circuit::new(subset, Vec::new()).expect("empty circuit is valid")
    }

    pub fn subset(&self) -> &QubitSubset {
        &self.subset
    }

    pub fn num_qubits(&self) -> usize {
        self.subset.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn pattern_sequence(&self) -> &str {
        &self.pattern_sequence
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether single-qubit kinds were forbidden from repeating on a qubit in
    /// consecutive cycles.
    pub fn no_repeat(&self) -> bool {
        self.no_repeat
    }

    pub fn patch(&self) -> Option<&PatchSpec> {
        self.patch.as_ref()
    }

    pub(crate) fn with_metadata(
        mut self,
        cycles: usize,
        pattern_sequence: String,
        seed: u64,
        no_repeat: bool,
    ) -> Self {
        self.cycles = cycles;
        self.pattern_sequence = pattern_sequence;
        self.seed = seed;
        self.no_repeat = no_repeat;
        self
    }

    pub(crate) fn with_patch(mut self, patch: Option<PatchSpec>) -> Self {
        self.patch = patch;
        self
    }

    pub(crate) fn layers_mut(&mut self) -> &mut Vec<Layer> {
        &mut self.layers
    }

    /// Every two-qubit gate with the index of its layer.
    pub fn two_qubit_gates(&self) -> impl Iterator<Item = (usize, &TwoQubitGate)> {
        self.layers
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match l {
                Layer::Two { gates, .. } => Some((i, gates)),
                Layer::Single(_) => None,
            })
            .flat_map(|(i, gates)| gates.iter().map(move |g| (i, g)))
    }
}

/// Gate tallies used by the error model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GateCounts {
    pub n_1q: usize,
    pub n_2q: usize,
    pub n_idle: usize,
    pub n_measured: usize,
}

pub fn gate_counts(circuit: &Circuit) -> GateCounts {
    let mut counts = GateCounts {
        n_measured: circuit.num_qubits(),
        ..GateCounts::default()
    };
    for layer in circuit.layers() {
        match layer {
            Layer::Single(g) => counts.n_1q += g.len(),
            Layer::Two { gates, idle } => {
                counts.n_2q += gates.len();
                counts.n_idle += idle.len();
            }
        }
    }
    counts
}
