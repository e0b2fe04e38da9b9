use serde::{Deserialize, Serialize};

use crate::device::{GateParams, QubitSubset};
use crate::{Error, Result, SCHEMA_VERSION};

use super::{Circuit, Gate1Q, Layer, PatchSpec, TwoQubitGate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetRecord {
    pub name: String,
    pub qubits: Vec<u32>,
}

/// One gate. Single-qubit gates carry `kind`, two-qubit gates carry
/// `params`, idle markers carry `kind: "IDLE"`. Qubits are physical ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    pub layer: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GateParams>,
    pub qubits: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    pub schema_version: u32,
    pub subset: SubsetRecord,
    pub cycles: usize,
    pub pattern_sequence: String,
    pub seed: u64,
    pub no_repeat: bool,
    /// `"1q"` or `"2q"` per layer.
    pub layers: Vec<String>,
    pub gates: Vec<GateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<PatchSpec>,
    /// Digest of the run that produced this document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_digest: Option<String>,
}

const IDLE: &str = "IDLE";

impl CircuitDocument {
    pub fn from_circuit(circuit: &Circuit) -> Self {
        let qubits = circuit.subset().qubits();
        let mut kinds = Vec::with_capacity(circuit.layers().len());
        let mut gates = Vec::new();
        for (i, layer) in circuit.layers().iter().enumerate() {
            match layer {
                Layer::Single(list) => {
                    kinds.push("1q".to_string());
                    gates.extend(list.iter().map(|&(q, g)| GateRecord {
                        layer: i,
                        kind: Some(g.name().to_string()),
                        params: None,
                        qubits: vec![qubits[q]],
                    }));
                }
                Layer::Two { gates: list, idle } => {
                    kinds.push("2q".to_string());
                    gates.extend(list.iter().map(|g| GateRecord {
                        layer: i,
                        kind: None,
                        params: Some(g.params),
                        qubits: vec![qubits[g.a], qubits[g.b]],
                    }));
                    gates.extend(idle.iter().map(|&q| GateRecord {
                        layer: i,
                        kind: Some(IDLE.to_string()),
                        params: None,
                        qubits: vec![qubits[q]],
                    }));
                }
            }
        }
        CircuitDocument {
            schema_version: SCHEMA_VERSION,
            subset: SubsetRecord {
                name: circuit.subset().name().to_string(),
                qubits: qubits.to_vec(),
            },
            cycles: circuit.cycles(),
            pattern_sequence: circuit.pattern_sequence().to_string(),
            seed: circuit.seed(),
            no_repeat: circuit.no_repeat(),
            layers: kinds,
            gates,
            patch: circuit.patch().cloned(),
            run_digest: None,
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::parse(
                "schema_version",
                format!("unsupported schema version {}", self.schema_version),
            ));
        }
        let subset = QubitSubset::new(self.subset.name.clone(), self.subset.qubits.clone())
            .map_err(|e| Error::parse("subset.qubits", e.to_string()))?;
        let mut layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, k)| match k.as_str() {
                "1q" => Ok(Layer::Single(Vec::new())),
                "2q" => Ok(Layer::Two {
                    gates: Vec::new(),
                    idle: Vec::new(),
                }),
                other => Err(Error::parse(format!("layers[{i}]"), format!("unknown layer type `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;

        for (i, rec) in self.gates.iter().enumerate() {
            let at = |field: &str| format!("gates[{i}].{field}");
            let position = |q: u32| {
                subset
                    .position(q)
                    .ok_or_else(|| Error::parse(at("qubits"), format!("qubit {q} is not in the subset")))
            };
            let layer = layers
                .get_mut(rec.layer)
                .ok_or_else(|| Error::parse(at("layer"), format!("layer {} does not exist", rec.layer)))?;
            match (layer, rec.kind.as_deref(), &rec.params, rec.qubits.as_slice()) {
                (Layer::Single(list), Some(kind), None, &[q]) => {
                    let g: Gate1Q = kind.parse().map_err(|_| {
                        Error::parse(at("kind"), format!("unknown gate kind `{kind}`"))
                    })?;
                    list.push((position(q)?, g));
                }
                (Layer::Two { idle, .. }, Some(IDLE), None, &[q]) => idle.push(position(q)?),
                (Layer::Two { gates, .. }, None, Some(params), &[a, b]) => gates.push(TwoQubitGate {
                    a: position(a)?,
                    b: position(b)?,
                    params: *params,
                }),
                (Layer::Two { .. }, Some(kind), _, _) if kind != IDLE => {
                    return Err(Error::parse(at("kind"), format!("unknown gate kind `{kind}` in a two-qubit layer")))
                }
                _ => {
                    return Err(Error::parse(
                        format!("gates[{i}]"),
                        format!("malformed gate record for a {} layer", self.layers[rec.layer]),
                    ))
                }
            }
        }

        let circuit = Circuit::new(subset, layers).map_err(|e| match e {
            Error::Validation { field, message } => Error::parse(field, message),
            other => other,
        })?;
        Ok(circuit
            .with_metadata(self.cycles, self.pattern_sequence.clone(), self.seed, self.no_repeat)
            .with_patch(self.patch.clone()))
    }
}

/// Pretty JSON for a circuit.
pub fn serialize(circuit: &Circuit) -> String {
    serde_json::to_string_pretty(&CircuitDocument::from_circuit(circuit)).expect("circuit serializes")
}

pub fn deserialize(text: &str) -> Result<Circuit> {
    let doc: CircuitDocument = Error::from_json(text)?;
    doc.to_circuit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{apply_patch, generate, GenerateOptions};
    use crate::data::{bundled_profile, bundled_subset};
    use crate::device::zcz3_topology;

    #[test]
    fn generated_circuit_round_trips() {
        let t = zcz3_topology();
        let doc = bundled_subset("subset31").unwrap();
        let s = doc.subset().unwrap();
        let p = bundled_profile("zcz3-mean").unwrap();
        let c = generate(&t, &s, &GenerateOptions::new(9, 42), &p).unwrap();
        assert_eq!(deserialize(&serialize(&c)).unwrap(), c);
        let patched = apply_patch(&c, &PatchSpec::new(doc.patches["4"].clone())).unwrap();
        assert_eq!(deserialize(&serialize(&patched)).unwrap(), patched);
    }

    fn two_qubit_doc(gates: &str) -> String {
        format!(
            r#"{{"schema_version":1,"subset":{{"name":"pair","qubits":[0,7,1]}},
            "cycles":1,"pattern_sequence":"A","seed":0,"no_repeat":true,
            "layers":["1q","2q"],"gates":[{gates}]}}"#
        )
    }

    #[test]
    fn overlapping_gates_rejected() {
        let p = r#"{"theta":1.5707963267948966,"phi":0,"delta_plus":0,"delta_minus":0,"delta_minus_off":0}"#;
        let text = two_qubit_doc(&format!(
            r#"{{"layer":1,"params":{p},"qubits":[0,7]}},{{"layer":1,"params":{p},"qubits":[7,1]}}"#
        ));
        match deserialize(&text) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("used twice"), "{message}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_reports_location() {
        let text = two_qubit_doc(r#"{"layer":0,"kind":"SX","qubits":[0]},{"layer":0,"kind":"T","qubits":[7]}"#);
        match deserialize(&text) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "gates[1].kind"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_layer_reports_location() {
        let text = two_qubit_doc(r#"{"layer":5,"kind":"SX","qubits":[0]}"#);
        match deserialize(&text) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "gates[0].layer"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn single_gate_in_two_qubit_layer_rejected() {
        let text = two_qubit_doc(r#"{"layer":1,"kind":"SX","qubits":[0]}"#);
        assert!(matches!(deserialize(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn type_errors_carry_json_path() {
        let text = two_qubit_doc(r#"{"layer":"one","kind":"SX","qubits":[0]}"#);
        match deserialize(&text) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "gates[0].layer"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
