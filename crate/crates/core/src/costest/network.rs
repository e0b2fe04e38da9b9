use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Layer};
use crate::simulator::Bits;
use crate::{Error, Result};

/// A tensor whose every index has dimension 2. `data` is row-major with the
/// first index most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub indices: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl Tensor {
    pub fn new(indices: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != 1usize << indices.len() {
            return Err(Error::validation(
                "tensor",
                format!("{} entries for rank {}", data.len(), indices.len()),
            ));
        }
        Ok(Tensor { indices, data })
    }

    pub fn scalar(value: Complex64) -> Self {
        Tensor {
            indices: Vec::new(),
            data: vec![value],
        }
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }
}

/// What the output legs of the circuit are attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "bits")]
pub enum NetworkOutput {
    /// Project onto a bitstring; the network contracts to one amplitude.
    Bitstring(Bits),
    /// Leave the output legs open.
    Open,
}

/// A closed or open tensor network built from a circuit.
#[derive(Clone, Debug)]
pub struct TensorNetwork {
    pub tensors: Vec<Tensor>,
    pub num_indices: usize,
    /// Open output indices, ordered by subset position.
    pub open: Vec<usize>,
}

impl TensorNetwork {
    /// Tensors sharing each index; every index has one (open) or two entries.
    pub fn index_owners(&self) -> Vec<Vec<usize>> {
        let mut owners = vec![Vec::new(); self.num_indices];
        for (t, tensor) in self.tensors.iter().enumerate() {
            for &i in &tensor.indices {
                owners[i].push(t);
            }
        }
        owners
    }

    /// Check the degree invariant: open indices on exactly one tensor, all
    /// others on exactly two, and no index repeated within a tensor.
    pub fn validate(&self) -> Result<()> {
        let owners = self.index_owners();
        for (i, o) in owners.iter().enumerate() {
            let expected = if self.open.contains(&i) { 1 } else { 2 };
            if o.len() != expected {
                return Err(Error::validation(
                    format!("index {i}"),
                    format!("appears on {} tensors, expected {expected}", o.len()),
                ));
            }
            if o.len() == 2 && o[0] == o[1] {
                return Err(Error::validation(format!("index {i}"), "repeated within one tensor"));
            }
        }
        Ok(())
    }

    pub fn largest_tensor_entries(&self) -> u64 {
        self.tensors.iter().map(|t| 1u64 << t.rank()).max().unwrap_or(1)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_range(field: &str, x: Bits, n: usize) -> Result<()> {
    if n < 128 && x >> n != 0 {
        return Err(Error::validation(field, format!("{x:#x} is out of range for {n} qubits")));
    }
    Ok(())
}

fn basis_vector(bit: bool) -> Vec<Complex64> {
    if bit {
        vec![c(0.0), c(1.0)]
    } else {
        vec![c(1.0), c(0.0)]
    }
}

/// One tensor per gate, a `|0⟩` projector on every input leg, and either a
/// `⟨x|` projector or an open index on every output leg.
pub fn build_network(circuit: &Circuit, output: NetworkOutput) -> Result<TensorNetwork> {
    build_network_from(circuit, 0, output)
}

/// As [`build_network`] with the input legs projected onto `|input⟩`.
pub fn build_network_from(circuit: &Circuit, input: Bits, output: NetworkOutput) -> Result<TensorNetwork> {
    let n = circuit.num_qubits();
    check_range("input", input, n)?;
    if let NetworkOutput::Bitstring(x) = output {
        check_range("bitstring", x, n)?;
    }
    let mut next = 0;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut tensors = Vec::new();
    let mut wire: Vec<usize> = (0..n).map(|_| fresh()).collect();
    for (q, &w) in wire.iter().enumerate() {
        tensors.push(Tensor {
            indices: vec![w],
            data: basis_vector((input >> q) & 1 == 1),
        });
    }
    for layer in circuit.layers() {
        match layer {
            Layer::Single(gates) => {
                for &(q, g) in gates {
                    let out = fresh();
                    let m = g.matrix();
                    tensors.push(Tensor {
                        indices: vec![out, wire[q]],
                        data: m.iter().flatten().copied().collect(),
                    });
                    wire[q] = out;
                }
            }
            Layer::Two { gates, .. } => {
                for g in gates {
                    let (ao, bo) = (fresh(), fresh());
                    let m = g.gate().matrix();
                    tensors.push(Tensor {
                        indices: vec![ao, bo, wire[g.a], wire[g.b]],
                        data: m.iter().flatten().copied().collect(),
                    });
                    wire[g.a] = ao;
                    wire[g.b] = bo;
                }
            }
        }
    }
    let open = match output {
        NetworkOutput::Bitstring(x) => {
            for (q, &w) in wire.iter().enumerate() {
                tensors.push(Tensor {
                    indices: vec![w],
                    data: basis_vector((x >> q) & 1 == 1),
                });
            }
            Vec::new()
        }
        NetworkOutput::Open => wire,
    };
    Ok(TensorNetwork {
        tensors,
        num_indices: next,
        open,
    })
}
