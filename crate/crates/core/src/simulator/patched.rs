use std::collections::HashMap;

use num_complex::Complex64;

use crate::circuits::{Circuit, Layer, TwoQubitGate};
use crate::device::QubitSubset;
use crate::{Error, Result};

use super::{Bits, Simulator, StateVector};

/// Exact state of one patch; `positions[i]` is the parent-circuit position
/// stored in bit `i` of the patch state.
#[derive(Clone, Debug)]
pub struct PatchState {
    pub positions: Vec<usize>,
    pub state: StateVector,
}

impl PatchState {
    fn restrict(&self, x: Bits) -> Bits {
        self.positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | (((x >> p) & 1) << i))
    }
}

/// Product state of a patched circuit.
#[derive(Clone, Debug)]
pub struct PatchedState {
    pub num_qubits: usize,
    pub patches: Vec<PatchState>,
}

impl PatchedState {
    /// Global amplitude as the product of patch amplitudes.
    pub fn amplitude(&self, x: Bits) -> Complex64 {
        self.patches
            .iter()
            .map(|p| p.state.amplitudes()[p.restrict(x) as usize])
            .product()
    }

    pub fn probability(&self, x: Bits) -> f64 {
        self.patches
            .iter()
            .map(|p| p.state.amplitudes()[p.restrict(x) as usize].norm_sqr())
            .product()
    }
}

/// Split a patched circuit into one sub-circuit per region and simulate each.
pub fn simulate_patched(circuit: &Circuit) -> Result<PatchedState> {
    simulate_patched_with(&Simulator::default(), circuit)
}

pub fn simulate_patched_with(sim: &Simulator, circuit: &Circuit) -> Result<PatchedState> {
    if circuit.patch().is_none() {
        return Err(Error::validation("circuit", "circuit carries no patch boundaries"));
    }
    let pieces = split(circuit)?;
    for (positions, _) in &pieces {
        sim.check(positions.len())?;
    }
    let patches = pieces
        .into_iter()
        .map(|(positions, sub)| {
            Ok(PatchState {
                positions,
                state: sim.run(&sub)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PatchedState {
        num_qubits: circuit.num_qubits(),
        patches,
    })
}

/// Independent pieces of a circuit: one per patch region, or the whole circuit
/// when it is not patched. Each piece lists the parent positions it covers.
pub(crate) fn split(circuit: &Circuit) -> Result<Vec<(Vec<usize>, Circuit)>> {
    let Some(spec) = circuit.patch() else {
        return Ok(vec![((0..circuit.num_qubits()).collect(), circuit.clone())]);
    };
    let subset = circuit.subset();
    let mut pieces = Vec::with_capacity(spec.regions.len());
    let mut covered = 0;
    for (r, region) in spec.regions.iter().enumerate() {
        let mut positions = region
            .iter()
            .map(|&q| {
                subset.position(q).ok_or_else(|| {
                    Error::validation(format!("patch.regions[{r}]"), format!("qubit {q} is not in the subset"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        positions.sort_unstable();
        covered += positions.len();
        let local: HashMap<usize, usize> = positions.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let layers = circuit
            .layers()
            .iter()
            .map(|layer| restrict_layer(layer, &local, r))
            .collect::<Result<Vec<_>>>()?;
        let qubits = positions.iter().map(|&p| subset.qubits()[p]).collect();
        let sub = Circuit::new(QubitSubset::new(format!("{}#{r}", subset.name()), qubits)?, layers)?;
        pieces.push((positions, sub));
    }
    if covered != circuit.num_qubits() {
        return Err(Error::validation("patch", "patch regions do not cover every qubit exactly once"));
    }
    Ok(pieces)
}

fn restrict_layer(layer: &Layer, local: &HashMap<usize, usize>, region: usize) -> Result<Layer> {
    Ok(match layer {
        Layer::Single(gates) => Layer::Single(
            gates
                .iter()
                .filter_map(|&(q, g)| local.get(&q).map(|&l| (l, g)))
                .collect(),
        ),
        Layer::Two { gates, idle } => {
            let mut kept = Vec::new();
            for g in gates {
                match (local.get(&g.a), local.get(&g.b)) {
                    (Some(&a), Some(&b)) => kept.push(TwoQubitGate { a, b, ..*g }),
                    (None, None) => {}
                    _ => {
                        return Err(Error::validation(
                            "circuit",
                            format!("a two-qubit gate crosses the boundary of patch {region}"),
                        ))
                    }
                }
            }
            Layer::Two {
                gates: kept,
                idle: idle.iter().filter_map(|q| local.get(q).copied()).collect(),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{apply_patch, generate, GenerateOptions, PatchSpec};
    use crate::device::{zcz3_topology, DeviceProfile, MeanRates};
    use crate::simulator::simulate;

    #[test]
    fn unpatched_circuit_rejected() {
        let s = QubitSubset::new("t", vec![0, 7]).unwrap();
        assert!(simulate_patched(&Circuit::empty(s)).is_err());
    }

    #[test]
    fn patch_probabilities_sum_to_one() {
        let t = zcz3_topology();
        let s = QubitSubset::compact(&t, 10).unwrap();
        let p = DeviceProfile::uniform("z", MeanRates::ZERO);
        let c = generate(&t, &s, &GenerateOptions::new(6, 5), &p).unwrap();
        let q = s.qubits();
        let patched = apply_patch(&c, &PatchSpec::new(vec![q[..5].to_vec(), q[5..].to_vec()]));
        // the split may be disconnected on the lattice; apply_patch does not require it
        let state = simulate_patched(&patched.unwrap()).unwrap();
        let total: f64 = (0..1u128 << 10).map(|x| state.probability(x)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_crossing_gates_matches_direct_simulation() {
        // Two separated pairs: no coupler joins them, so patching removes nothing.
        let t = zcz3_topology();
        let s = QubitSubset::new("pairs", vec![0, 7, 4, 11]).unwrap();
        let p = DeviceProfile::uniform("z", MeanRates::ZERO);
        let layers = {
            let sub = QubitSubset::new("a", vec![0, 7]).unwrap();
            let c = generate(&t, &sub, &GenerateOptions::new(4, 1), &p).unwrap();
            c.layers()
                .iter()
                .map(|l| match l {
                    Layer::Single(g) => Layer::Single(g.iter().flat_map(|&(q, k)| [(q, k), (q + 2, k)]).collect()),
                    Layer::Two { gates, .. } => Layer::Two {
                        gates: gates
                            .iter()
                            .flat_map(|g| [*g, TwoQubitGate { a: g.a + 2, b: g.b + 2, ..*g }])
                            .collect(),
                        idle: vec![],
                    },
                })
                .collect()
        };
        let c = Circuit::new(s, layers).unwrap();
        let patched = apply_patch(&c, &PatchSpec::new(vec![vec![0, 7], vec![4, 11]])).unwrap();
        assert_eq!(patched.layers(), c.layers());
        let direct = simulate(&c).unwrap();
        let factored = simulate_patched(&patched).unwrap();
        for x in 0..16u128 {
            assert!((direct.amplitude(x).unwrap() - factored.amplitude(x)).norm() < 1e-14);
        }
    }
}
