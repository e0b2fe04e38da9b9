use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::device::{DeviceTopology, QubitSubset};
use crate::{Error, Result};

use super::{Circuit, Layer};

/// A partition of a subset into regions, by physical qubit id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub regions: Vec<Vec<u32>>,
}

impl PatchSpec {
    pub fn new(regions: Vec<Vec<u32>>) -> Self {
        PatchSpec { regions }
    }

    pub fn k(&self) -> usize {
        self.regions.len()
    }

    /// Region index of every qubit.
    pub fn region_map(&self) -> HashMap<u32, usize> {
        self.regions
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&q| (q, i)))
            .collect()
    }

    /// Check that the regions are disjoint, cover `subset` exactly, and are
    /// each connected on the lattice.
    pub fn validate(&self, topology: &DeviceTopology, subset: &QubitSubset) -> Result<()> {
        let mut owner: HashMap<u32, usize> = HashMap::new();
        for (i, region) in self.regions.iter().enumerate() {
            if region.is_empty() {
                return Err(Error::validation(format!("regions[{i}]"), "empty region"));
            }
            for &q in region {
                if !subset.contains(q) {
                    return Err(Error::validation(
                        format!("regions[{i}]"),
                        format!("qubit {q} is not in subset `{}`", subset.name()),
                    ));
                }
                if let Some(j) = owner.insert(q, i) {
                    return Err(Error::validation(
                        format!("regions[{i}]"),
                        format!("qubit {q} also belongs to region {j}"),
                    ));
                }
            }
            if let Some(q) = topology.first_stranded(region) {
                return Err(Error::validation(
                    format!("regions[{i}]"),
                    format!("region is not connected: qubit {q} is stranded"),
                ));
            }
        }
        if let Some(q) = subset.qubits().iter().find(|q| !owner.contains_key(q)) {
            return Err(Error::validation(
                "regions",
                format!("qubit {q} is not assigned to any region"),
            ));
        }
        Ok(())
    }
}

/// Delete every two-qubit gate whose endpoints lie in different regions.
///
/// Qubits whose gate was cut are not turned into idle slots: the idle
/// markers placed at generation time are kept as they are.
pub fn apply_patch(circuit: &Circuit, spec: &PatchSpec) -> Result<Circuit> {
    let subset = circuit.subset();
    let map = spec.region_map();
    for (i, region) in spec.regions.iter().enumerate() {
        if let Some(q) = region.iter().find(|&&q| !subset.contains(q)) {
            return Err(Error::validation(
                format!("regions[{i}]"),
                format!("qubit {q} is not in the circuit's subset"),
            ));
        }
    }
    let region_of = |pos: usize| -> Result<usize> {
        let q = subset.qubits()[pos];
        map.get(&q).copied().ok_or_else(|| {
            Error::validation("regions", format!("qubit {q} is not assigned to any region"))
        })
    };
    let mut out = circuit.clone();
    for layer in out.layers_mut() {
        if let Layer::Two { gates, .. } = layer {
            let mut kept = Vec::with_capacity(gates.len());
            for g in gates.drain(..) {
                if region_of(g.a)? == region_of(g.b)? {
                    kept.push(g);
                }
            }
            *gates = kept;
        }
    }
    Ok(out.with_patch(Some(spec.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{gate_counts, generate, GenerateOptions};
    use crate::data::{bundled_profile, bundled_subset};
    use crate::device::{zcz3_topology, GateParams};

    fn circuit(name: &str, cycles: usize, seed: u64) -> (Circuit, Vec<PatchSpec>, Vec<PatchSpec>) {
        let t = zcz3_topology();
        let doc = bundled_subset(name).unwrap();
        let s = doc.subset().unwrap();
        let p = bundled_profile("zcz3-mean").unwrap();
        let c = generate(&t, &s, &GenerateOptions::new(cycles, seed), &p).unwrap();
        let two = doc.patches.get("2").map(|r| PatchSpec::new(r.clone())).into_iter().collect();
        let four = doc.patches.get("4").map(|r| PatchSpec::new(r.clone())).into_iter().collect();
        (c, two, four)
    }

    #[test]
    fn single_region_leaves_circuit_unchanged() {
        let (c, _, _) = circuit("subset31", 12, 3);
        let whole = PatchSpec::new(vec![c.subset().qubits().to_vec()]);
        let patched = apply_patch(&c, &whole).unwrap();
        assert_eq!(patched.layers(), c.layers());
        assert_eq!(patched.patch(), Some(&whole));
    }

    #[test]
    fn split_pair_loses_its_gate() {
        let s = QubitSubset::new("pair", vec![0, 7]).unwrap();
        let layer = Layer::Two {
            gates: vec![super::super::TwoQubitGate { a: 0, b: 1, params: GateParams::ISWAP }],
            idle: vec![],
        };
        let c = Circuit::new(s, vec![layer]).unwrap();
        let patched = apply_patch(&c, &PatchSpec::new(vec![vec![0], vec![7]])).unwrap();
        assert_eq!(gate_counts(&patched).n_2q, 0);
    }

    #[test]
    fn bundled_patch_specs_are_valid() {
        let t = zcz3_topology();
        for name in ["subset31", "subset83"] {
            let doc = bundled_subset(name).unwrap();
            let s = doc.subset().unwrap();
            for regions in doc.patches.values() {
                PatchSpec::new(regions.clone()).validate(&t, &s).unwrap();
            }
        }
    }

    #[test]
    fn finer_partitions_remove_more_gates() {
        let (c, two, four) = circuit("subset83", 32, 11);
        let full = gate_counts(&c);
        let p2 = gate_counts(&apply_patch(&c, &two[0]).unwrap());
        let p4 = gate_counts(&apply_patch(&c, &four[0]).unwrap());
        assert!(p2.n_2q < full.n_2q);
        assert!(p4.n_2q < p2.n_2q);
        assert_eq!(p4.n_1q, full.n_1q);
        assert_eq!(p4.n_idle, full.n_idle);
        // removed gates: 2 crossing couplers x 8 uses, 11 crossing couplers x 8 uses
        assert_eq!(full.n_2q - p2.n_2q, 16);
        assert_eq!(full.n_2q - p4.n_2q, 88);
    }

    #[test]
    fn every_four_patch_region_refines_a_two_patch_region() {
        for name in ["subset31", "subset83"] {
            let doc = bundled_subset(name).unwrap();
            let two = PatchSpec::new(doc.patches["2"].clone()).region_map();
            for region in &doc.patches["4"] {
                let owners: std::collections::BTreeSet<_> = region.iter().map(|q| two[q]).collect();
                assert_eq!(owners.len(), 1, "{name}");
            }
        }
    }

    #[test]
    fn foreign_region_qubit_rejected() {
        let (c, _, _) = circuit("subset31", 2, 0);
        let spec = PatchSpec::new(vec![vec![104]]);
        assert!(apply_patch(&c, &spec).is_err());
    }

    #[test]
    fn disconnected_region_rejected() {
        let t = zcz3_topology();
        let s = QubitSubset::new("s", vec![0, 7, 1]).unwrap();
        let spec = PatchSpec::new(vec![vec![0, 1], vec![7]]);
        assert!(spec.validate(&t, &s).is_err());
    }
}
