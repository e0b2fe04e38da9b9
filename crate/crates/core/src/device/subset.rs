use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SCHEMA_VERSION};

use super::DeviceTopology;

/// An ordered set of active qubits. Position `i` in `active` is the qubit
/// stored in bit `i` of every basis-state index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitSubset {
    name: String,
    active: Vec<u32>,
    positions: HashMap<u32, usize>,
}

impl QubitSubset {
    /// Create a subset; rejects duplicate qubits.
    pub fn new(name: impl Into<String>, active: Vec<u32>) -> Result<Self> {
        let name = name.into();
        let mut positions = HashMap::with_capacity(active.len());
        for (i, &q) in active.iter().enumerate() {
            if positions.insert(q, i).is_some() {
                return Err(Error::validation(
                    format!("subset `{name}`"),
                    format!("qubit {q} listed twice"),
                ));
            }
        }
        Ok(QubitSubset {
            name,
            active,
            positions,
        })
    }

    /// The first `n` qubits in breadth-first order from the lattice center.
    pub fn compact(topology: &DeviceTopology, n: usize) -> Result<Self> {
        if n == 0 || n > topology.num_qubits() {
            return Err(Error::validation(
                "qubits",
                format!("compact subset size {n} outside 1..={}", topology.num_qubits()),
            ));
        }
        let mut qubits = topology.bfs_from_center();
        qubits.truncate(n);
        qubits.sort_unstable();
        QubitSubset::new(format!("compact{n}"), qubits)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubits(&self) -> &[u32] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, q: u32) -> bool {
        self.positions.contains_key(&q)
    }

    /// Bit position of a physical qubit.
    pub fn position(&self, q: u32) -> Option<usize> {
        self.positions.get(&q).copied()
    }
}

/// Reject subsets with out-of-range qubits or that do not induce a connected
/// subgraph of the lattice.
pub fn validate_subset(topology: &DeviceTopology, subset: &QubitSubset) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::validation(
            format!("subset `{}`", subset.name()),
            "no active qubits",
        ));
    }
    if let Some(&q) = subset.qubits().iter().find(|&&q| topology.qubit(q).is_none()) {
        return Err(Error::validation(
            format!("subset `{}`", subset.name()),
            format!("qubit {q} is not on the {}x{} lattice", topology.rows(), topology.cols()),
        ));
    }
    match topology.first_stranded(subset.qubits()) {
        Some(qubit) => Err(Error::DisconnectedSubset {
            subset: subset.name().to_string(),
            qubit,
        }),
        None => Ok(()),
    }
}

/// On-disk form of a subset, optionally carrying named patch partitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetDocument {
    pub schema_version: u32,
    pub name: String,
    /// Membership is a reconstruction rather than a published list.
    #[serde(default)]
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub qubits: Vec<u32>,
    /// Patch partitions keyed by name, e.g. `"2"` and `"4"`.
    #[serde(default)]
    pub patches: std::collections::BTreeMap<String, Vec<Vec<u32>>>,
}

impl SubsetDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SubsetDocument = Error::from_json(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::parse(
                "schema_version",
                format!("unsupported schema version {}", doc.schema_version),
            ));
        }
        Ok(doc)
    }

    pub fn subset(&self) -> Result<QubitSubset> {
        QubitSubset::new(self.name.clone(), self.qubits.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::build_topology;

    #[test]
    fn duplicates_rejected() {
        assert!(QubitSubset::new("dup", vec![1, 2, 1]).is_err());
    }

    #[test]
    fn non_adjacent_pair_rejected() {
        let t = build_topology(15, 7);
        let s = QubitSubset::new("pair", vec![0, 104]).unwrap();
        match validate_subset(&t, &s) {
            Err(Error::DisconnectedSubset { qubit, .. }) => assert_eq!(qubit, 104),
            other => panic!("expected disconnected subset, got {other:?}"),
        }
    }

    #[test]
    fn adjacent_pair_accepted() {
        let t = build_topology(15, 7);
        let s = QubitSubset::new("pair", vec![0, 7]).unwrap();
        validate_subset(&t, &s).unwrap();
    }

    #[test]
    fn off_lattice_qubit_rejected() {
        let t = build_topology(3, 3);
        let s = QubitSubset::new("far", vec![0, 9]).unwrap();
        assert!(matches!(validate_subset(&t, &s), Err(Error::Validation { .. })));
    }

    #[test]
    fn compact_subsets_are_connected() {
        let t = build_topology(15, 7);
        for n in [1, 12, 14, 16, 20, 26] {
            let s = QubitSubset::compact(&t, n).unwrap();
            assert_eq!(s.len(), n);
            validate_subset(&t, &s).unwrap();
        }
    }

    #[test]
    fn positions_follow_order() {
        let s = QubitSubset::new("s", vec![10, 3, 4]).unwrap();
        assert_eq!(s.position(3), Some(1));
        assert_eq!(s.position(5), None);
    }
}
